// Copyright 2026 The idread Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


#include "idread/font.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <map>

namespace idread::text {

namespace {

struct Bitmap {
  char ch;
  std::array<std::string_view, kGlyphRows> rows;
};

// clang-format off
constexpr Bitmap kBitmaps[] = {
    {'A', {".###.", "#...#", "#...#", "#####", "#...#", "#...#", "#...#"}},
    {'B', {"####.", "#...#", "#...#", "####.", "#...#", "#...#", "####."}},
    {'C', {".###.", "#...#", "#....", "#....", "#....", "#...#", ".###."}},
    {'D', {"####.", "#...#", "#...#", "#...#", "#...#", "#...#", "####."}},
    {'E', {"#####", "#....", "#....", "####.", "#....", "#....", "#####"}},
    {'F', {"#####", "#....", "#....", "####.", "#....", "#....", "#...."}},
    {'G', {".###.", "#...#", "#....", "#.###", "#...#", "#...#", ".####"}},
    {'H', {"#...#", "#...#", "#...#", "#####", "#...#", "#...#", "#...#"}},
    {'I', {"###", ".#.", ".#.", ".#.", ".#.", ".#.", "###"}},
    {'J', {"..###", "...#.", "...#.", "...#.", "...#.", "#..#.", ".##.."}},
    {'K', {"#...#", "#..#.", "#.#..", "##...", "#.#..", "#..#.", "#...#"}},
    {'L', {"#....", "#....", "#....", "#....", "#....", "#....", "#####"}},
    {'M', {"#...#", "##.##", "#.#.#", "#.#.#", "#...#", "#...#", "#...#"}},
    {'N', {"#...#", "#...#", "##..#", "#.#.#", "#..##", "#...#", "#...#"}},
    {'O', {".###.", "#...#", "#...#", "#...#", "#...#", "#...#", ".###."}},
    {'P', {"####.", "#...#", "#...#", "####.", "#....", "#....", "#...."}},
    {'Q', {".###.", "#...#", "#...#", "#...#", "#.#.#", "#..#.", ".##.#"}},
    {'R', {"####.", "#...#", "#...#", "####.", "#.#..", "#..#.", "#...#"}},
    {'S', {".####", "#....", "#....", ".###.", "....#", "....#", "####."}},
    {'T', {"#####", "..#..", "..#..", "..#..", "..#..", "..#..", "..#.."}},
    {'U', {"#...#", "#...#", "#...#", "#...#", "#...#", "#...#", ".###."}},
    {'V', {"#...#", "#...#", "#...#", "#...#", "#...#", ".#.#.", "..#.."}},
    {'W', {"#...#", "#...#", "#...#", "#.#.#", "#.#.#", "#.#.#", ".#.#."}},
    {'X', {"#...#", "#...#", ".#.#.", "..#..", ".#.#.", "#...#", "#...#"}},
    {'Y', {"#...#", "#...#", ".#.#.", "..#..", "..#..", "..#..", "..#.."}},
    {'Z', {"#####", "....#", "...#.", "..#..", ".#...", "#....", "#####"}},
    {'0', {".###.", "#...#", "#..##", "#.#.#", "##..#", "#...#", ".###."}},
    {'1', {".#.", "##.", ".#.", ".#.", ".#.", ".#.", "###"}},
    {'2', {".###.", "#...#", "....#", "...#.", "..#..", ".#...", "#####"}},
    {'3', {"#####", "...#.", "..#..", "...#.", "....#", "#...#", ".###."}},
    {'4', {"...#.", "..##.", ".#.#.", "#..#.", "#####", "...#.", "...#."}},
    {'5', {"#####", "#....", "####.", "....#", "....#", "#...#", ".###."}},
    {'6', {"..##.", ".#...", "#....", "####.", "#...#", "#...#", ".###."}},
    {'7', {"#####", "....#", "...#.", "..#..", ".#...", ".#...", ".#..."}},
    {'8', {".###.", "#...#", "#...#", ".###.", "#...#", "#...#", ".###."}},
    {'9', {".###.", "#...#", "#...#", ".####", "....#", "...#.", ".##.."}},
    {' ', {"...", "...", "...", "...", "...", "...", "..."}},
    {'.', {"..", "..", "..", "..", "..", "##", "##"}},
    {'-', {"....", "....", "....", "####", "....", "....", "...."}},
    {'/', {"....#", "....#", "...#.", "..#..", ".#...", "#....", "#...."}},
    {'<', {"...#", "..#.", ".#..", "#...", ".#..", "..#.", "...#"}},
};
// clang-format on

constexpr double kSerifFoot = 0.4;

Glyph build(const Bitmap& bm, Typeface face) {
  const int w = static_cast<int>(bm.rows[0].size());
  auto ink = [&](int r, int c) { return r >= 0 && r < kGlyphRows && c >= 0 && c < w && bm.rows[r][c] == '#'; };
  Glyph g{bm.ch, 0, {}};
  for (int r = 0; r < kGlyphRows; ++r) {
    for (int c = 0; c < w;) {
      if (!ink(r, c)) {
        ++c;
        continue;
      }
      int e = c;
      while (ink(r, e)) ++e;
      g.rects.push_back({double(c), double(r), double(e), double(r + 1)});
      c = e;
    }
  }
  if (face == Typeface::Serif) {
    for (int c = 0; c < w; ++c) {
      for (const auto [row, inner, y0] : {std::array{0, 1, 0}, std::array{kGlyphRows - 1, kGlyphRows - 2, 1}}) {
        if (!ink(row, c) || !ink(inner, c)) continue;
        const double top = y0 ? kGlyphRows - kSerifFoot : 0.0;
        if (!ink(row, c - 1)) g.rects.push_back({c - kSerifFoot, top, double(c), top + kSerifFoot});
        if (!ink(row, c + 1)) g.rects.push_back({double(c + 1), top, c + 1 + kSerifFoot, top + kSerifFoot});
      }
    }
  }
  double lo = w, hi = 0;
  for (const auto& r : g.rects) {
    lo = std::min(lo, r.x0);
    hi = std::max(hi, r.x1);
  }
  if (g.rects.empty()) lo = 0, hi = w;  // space keeps its nominal width
  for (auto& r : g.rects) r.x0 -= lo, r.x1 -= lo;
  g.ink_width = hi - lo;
  return g;
}

const std::map<char, Glyph>& table(Typeface face) {
  static const std::array<std::map<char, Glyph>, 2> tables = [] {
    std::array<std::map<char, Glyph>, 2> t;
    for (const auto& bm : kBitmaps) {
      t[0].emplace(bm.ch, build(bm, Typeface::Sans));
      t[1].emplace(bm.ch, build(bm, Typeface::Serif));
    }
    return t;
  }();
  return tables[static_cast<int>(face)];
}

void add_rect(Coverage& out, double x0, double y0, double x1, double y1) {
  const int px0 = std::max(0, static_cast<int>(std::floor(x0)));
  const int px1 = std::min(out.width, static_cast<int>(std::ceil(x1)));
  const int py0 = std::max(0, static_cast<int>(std::floor(y0)));
  const int py1 = std::min(out.height, static_cast<int>(std::ceil(y1)));
  for (int py = py0; py < py1; ++py) {
    const double oy = std::min(y1, py + 1.0) - std::max(y0, double(py));
    if (oy <= 0) continue;
    for (int px = px0; px < px1; ++px) {
      const double ox = std::min(x1, px + 1.0) - std::max(x0, double(px));
      if (ox > 0) out.alpha[static_cast<std::size_t>(py) * out.width + px] += static_cast<float>(ox * oy);
    }
  }
}

}  // namespace

std::string_view typeface_name(Typeface t) { return t == Typeface::Serif ? "serif" : "sans"; }

Typeface typeface_from_name(std::string_view name) {
  if (name == "sans") return Typeface::Sans;
  if (name == "serif") return Typeface::Serif;
  throw Error(ErrorKind::FormatError, "unknown typeface '" + std::string(name) + "'");
}

std::string_view charset() {
  static const std::string s = [] {
    std::string r;
    for (const auto& bm : kBitmaps) r.push_back(bm.ch);
    return r;
  }();
  return s;
}

bool in_charset(char c) { return charset().find(c) != std::string_view::npos; }

const Glyph& glyph(char c, Typeface face) {
  const auto& t = table(face);
  const auto it = t.find(c);
  if (it == t.end()) throw Error(ErrorKind::InvalidArgument, std::string("character not in charset: '") + c + "'");
  return it->second;
}

double letter_spacing(Typeface face) { return face == Typeface::Serif ? 2.8 : 2.0; }

double text_width(std::string_view s, Typeface face) {
  if (s.empty()) return 0;
  double w = letter_spacing(face) * static_cast<double>(s.size() - 1);
  for (char c : s) w += glyph(c, face).ink_width;
  return w;
}

void rasterize_text(Coverage& out, double x, double y, std::string_view s, Typeface face, double cell) {
  double pen = x;
  for (char c : s) {
    const Glyph& g = glyph(c, face);
    for (const auto& r : g.rects) add_rect(out, pen + r.x0 * cell, y + r.y0 * cell, pen + r.x1 * cell, y + r.y1 * cell);
    pen += (g.ink_width + letter_spacing(face)) * cell;
  }
  for (float& a : out.alpha) a = std::min(a, 1.0f);
}

void draw_text(raster::Image& img, double x, double y, std::string_view s, Typeface face, double cell,
               raster::Rgb color) {
  if (s.empty()) return;
  const int bx0 = std::max(0, static_cast<int>(std::floor(x)));
  const int by0 = std::max(0, static_cast<int>(std::floor(y)));
  const int bx1 = std::min(img.width(), static_cast<int>(std::ceil(x + text_width(s, face) * cell)) + 1);
  const int by1 = std::min(img.height(), static_cast<int>(std::ceil(y + kGlyphRows * cell)) + 1);
  if (bx1 <= bx0 || by1 <= by0) return;
  Coverage cov{bx1 - bx0, by1 - by0, {}};
  cov.alpha.assign(static_cast<std::size_t>(cov.width) * cov.height, 0.0f);
  rasterize_text(cov, x - bx0, y - by0, s, face, cell);
  const float col[3] = {float(color.r), float(color.g), float(color.b)};
  for (int py = 0; py < cov.height; ++py)
    for (int px = 0; px < cov.width; ++px) {
      const float a = cov.alpha[static_cast<std::size_t>(py) * cov.width + px];
      if (a <= 0) continue;
      std::uint8_t* p = img.pixel(bx0 + px, by0 + py);
      for (int k = 0; k < 3; ++k)
        p[k] = static_cast<std::uint8_t>(round_even_l(p[k] * (1.0f - a) + col[k] * a));
    }
}

Coverage render_glyph(char c, Typeface face, int height) {
  const Glyph& g = glyph(c, face);
  const double cell = static_cast<double>(height) / kGlyphRows;
  Coverage cov{std::max(1, static_cast<int>(std::ceil(g.ink_width * cell - 1e-9))), height, {}};
  cov.alpha.assign(static_cast<std::size_t>(cov.width) * height, 0.0f);
  rasterize_text(cov, 0, 0, std::string_view(&c, 1), face, cell);
  return cov;
}

}  // namespace idread::text
