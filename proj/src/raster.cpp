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

#include "idread/raster.hpp"

#include <algorithm>
#include <cmath>

namespace idread::raster {

Image::Image(int width, int height, Rgb fill) : width_(width), height_(height) {
  if (width < 1 || height < 1) throw Error(ErrorKind::InvalidArgument, "image dimensions must be positive");
  data_.resize(static_cast<std::size_t>(width) * static_cast<std::size_t>(height) * 3);
  for (std::size_t i = 0; i < data_.size(); i += 3) {
    data_[i] = fill.r;
    data_[i + 1] = fill.g;
    data_[i + 2] = fill.b;
  }
}

namespace {

double cross(Point o, Point a, Point b) { return (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x); }

}  // namespace

Point Quad::centroid() const {
  return {(v[0].x + v[1].x + v[2].x + v[3].x) / 4.0, (v[0].y + v[1].y + v[2].y + v[3].y) / 4.0};
}

double Quad::signed_area() const {
  double s = 0.0;
  for (int i = 0; i < 4; ++i) {
    const Point& a = v[i];
    const Point& b = v[(i + 1) % 4];
    s += a.x * b.y - b.x * a.y;
  }
  return s / 2.0;
}

double Quad::shortest_side() const {
  double best = std::hypot(v[1].x - v[0].x, v[1].y - v[0].y);
  for (int i = 1; i < 4; ++i) best = std::min(best, std::hypot(v[(i + 1) % 4].x - v[i].x, v[(i + 1) % 4].y - v[i].y));
  return best;
}

bool Quad::valid() const {
  for (const Point& p : v)
    if (!std::isfinite(p.x) || !std::isfinite(p.y)) return false;
  for (int i = 0; i < 4; ++i)
    if (cross(v[i], v[(i + 1) % 4], v[(i + 2) % 4]) <= 0.0) return false;
  return signed_area() > 0.0;
}

Point Homography::apply(Point p) const {
  const double w = m[6] * p.x + m[7] * p.y + m[8];
  return {(m[0] * p.x + m[1] * p.y + m[2]) / w, (m[3] * p.x + m[4] * p.y + m[5]) / w};
}

Homography Homography::operator*(const Homography& rhs) const {
  Homography out;
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 3; ++c) {
      double s = 0.0;
      for (int k = 0; k < 3; ++k) s += m[r * 3 + k] * rhs.m[k * 3 + c];
      out.m[r * 3 + c] = s;
    }
  for (double& x : out.m) x /= out.m[8];
  return out;
}

Homography Homography::inverse() const {
  const auto& a = m;
  const double det = a[0] * (a[4] * a[8] - a[5] * a[7]) - a[1] * (a[3] * a[8] - a[5] * a[6]) +
                     a[2] * (a[3] * a[7] - a[4] * a[6]);
  if (std::abs(det) <= 1e-12) throw Error(ErrorKind::DegenerateQuad, "homography is not invertible");
  Homography inv;
  inv.m = {(a[4] * a[8] - a[5] * a[7]) / det, (a[2] * a[7] - a[1] * a[8]) / det, (a[1] * a[5] - a[2] * a[4]) / det,
           (a[5] * a[6] - a[3] * a[8]) / det, (a[0] * a[8] - a[2] * a[6]) / det, (a[2] * a[3] - a[0] * a[5]) / det,
           (a[3] * a[7] - a[4] * a[6]) / det, (a[1] * a[6] - a[0] * a[7]) / det, (a[0] * a[4] - a[1] * a[3]) / det};
  for (double& x : inv.m) x /= inv.m[8];
  return inv;
}

double color_distance(Rgb p, Rgb q) { return std::sqrt(static_cast<double>(color_distance_sq(p, q))); }

namespace {

// Similarity transform moving the points' centroid to the origin with mean
// distance sqrt(2); conditions the 8x8 system for pixel-scale coordinates.
Homography normalizer(const std::array<Point, 4>& pts) {
  double cx = 0, cy = 0;
  for (const auto& p : pts) {
    cx += p.x;
    cy += p.y;
  }
  cx /= 4;
  cy /= 4;
  double mean = 0;
  for (const auto& p : pts) mean += std::hypot(p.x - cx, p.y - cy);
  mean /= 4;
  if (mean <= 0) throw Error(ErrorKind::DegenerateQuad, "coincident points");
  const double s = std::sqrt(2.0) / mean;
  Homography t;
  t.m = {s, 0, -s * cx, 0, s, -s * cy, 0, 0, 1};
  return t;
}

void check_collinear(const std::array<Point, 4>& pts) {
  double scale = 0;
  for (const auto& p : pts) scale = std::max({scale, std::abs(p.x), std::abs(p.y)});
  scale = std::max(scale, 1.0);
  for (int i = 0; i < 4; ++i) {
    const Point& a = pts[(i + 1) % 4];
    const Point& b = pts[(i + 2) % 4];
    const Point& c = pts[(i + 3) % 4];
    if (std::abs(cross(a, b, c)) <= 1e-10 * scale * scale)
      throw Error(ErrorKind::DegenerateQuad, "three collinear points");
  }
}

}  // namespace

Homography solve_homography(const std::array<Point, 4>& src, const std::array<Point, 4>& dst) {
  check_collinear(src);
  check_collinear(dst);
  const Homography ts = normalizer(src);
  const Homography td = normalizer(dst);

  // Rows of [A | b] for x' = (h0 x + h1 y + h2) / (h6 x + h7 y + 1), same for y'.
  double a[8][9] = {};
  for (int i = 0; i < 4; ++i) {
    const Point s = ts.apply(src[i]);
    const Point d = td.apply(dst[i]);
    double* r0 = a[2 * i];
    double* r1 = a[2 * i + 1];
    r0[0] = s.x, r0[1] = s.y, r0[2] = 1, r0[6] = -s.x * d.x, r0[7] = -s.y * d.x, r0[8] = d.x;
    r1[3] = s.x, r1[4] = s.y, r1[5] = 1, r1[6] = -s.x * d.y, r1[7] = -s.y * d.y, r1[8] = d.y;
  }
  for (int col = 0; col < 8; ++col) {
    int piv = col;
    for (int r = col + 1; r < 8; ++r)
      if (std::abs(a[r][col]) > std::abs(a[piv][col])) piv = r;
    if (std::abs(a[piv][col]) < 1e-12) throw Error(ErrorKind::DegenerateQuad, "singular homography system");
    if (piv != col)
      for (int c = 0; c < 9; ++c) std::swap(a[piv][c], a[col][c]);
    for (int r = 0; r < 8; ++r) {
      if (r == col) continue;
      const double f = a[r][col] / a[col][col];
      if (f == 0.0) continue;
      for (int c = col; c < 9; ++c) a[r][c] -= f * a[col][c];
    }
  }
  Homography hn;
  for (int i = 0; i < 8; ++i) hn.m[i] = a[i][8] / a[i][i];
  hn.m[8] = 1.0;
  Homography h = td.inverse() * hn * ts;
  (void)h.inverse();  // throws when not invertible
  return h;
}

Homography rect_to_quad(const Quad& src, int out_w, int out_h) {
  const Quad r = Quad::rect(0, 0, out_w, out_h);
  return solve_homography(r.v, src.v);
}

std::array<float, 3> sample_bilinear(const Image& img, double x, double y) {
  const double fx = std::clamp(x - 0.5, 0.0, static_cast<double>(img.width() - 1));
  const double fy = std::clamp(y - 0.5, 0.0, static_cast<double>(img.height() - 1));
  const int x0 = static_cast<int>(fx);
  const int y0 = static_cast<int>(fy);
  const int x1 = std::min(x0 + 1, img.width() - 1);
  const int y1 = std::min(y0 + 1, img.height() - 1);
  const float ax = static_cast<float>(fx - x0);
  const float ay = static_cast<float>(fy - y0);
  const std::uint8_t* p00 = img.pixel(x0, y0);
  const std::uint8_t* p10 = img.pixel(x1, y0);
  const std::uint8_t* p01 = img.pixel(x0, y1);
  const std::uint8_t* p11 = img.pixel(x1, y1);
  std::array<float, 3> out{};
  for (int c = 0; c < 3; ++c) {
    const float top = p00[c] + ax * (p10[c] - p00[c]);
    const float bot = p01[c] + ax * (p11[c] - p01[c]);
    out[c] = top + ay * (bot - top);
  }
  return out;
}

namespace {

std::uint8_t to_byte(float v) { return static_cast<std::uint8_t>(std::clamp(std::nearbyint(v), 0.0f, 255.0f)); }

}  // namespace

Image warp_homography(const Image& img, const Homography& out_to_src, int out_w, int out_h) {
  if (out_w < 1 || out_h < 1) throw Error(ErrorKind::InvalidArgument, "output size must be positive");
  Image out(out_w, out_h);
  for (int y = 0; y < out_h; ++y) {
    for (int x = 0; x < out_w; ++x) {
      const Point s = out_to_src.apply({x + 0.5, y + 0.5});
      const auto c = sample_bilinear(img, s.x, s.y);
      std::uint8_t* p = out.pixel(x, y);
      p[0] = to_byte(c[0]);
      p[1] = to_byte(c[1]);
      p[2] = to_byte(c[2]);
    }
  }
  return out;
}

Image warp_perspective(const Image& img, const Quad& src, int out_w, int out_h) {
  if (out_w < 1 || out_h < 1) throw Error(ErrorKind::InvalidArgument, "output size must be positive");
  return warp_homography(img, rect_to_quad(src, out_w, out_h), out_w, out_h);
}

bool point_in_quad(Point p, const Quad& q) {
  for (int i = 0; i < 4; ++i)
    if (cross(q.v[i], q.v[(i + 1) % 4], p) < 0.0) return false;
  return true;
}

Image resize(const Image& img, int out_w, int out_h) {
  if (out_w < 1 || out_h < 1) throw Error(ErrorKind::InvalidArgument, "output size must be positive");
  Image out(out_w, out_h);
  const double sx = static_cast<double>(img.width()) / out_w;
  const double sy = static_cast<double>(img.height()) / out_h;
  for (int y = 0; y < out_h; ++y) {
    for (int x = 0; x < out_w; ++x) {
      const auto c = sample_bilinear(img, (x + 0.5) * sx, (y + 0.5) * sy);
      std::uint8_t* p = out.pixel(x, y);
      p[0] = to_byte(c[0]);
      p[1] = to_byte(c[1]);
      p[2] = to_byte(c[2]);
    }
  }
  return out;
}

Image resize_to_height(const Image& img, int target_h) {
  if (target_h < 1) throw Error(ErrorKind::InvalidArgument, "target height must be positive");
  const long w = std::max(1L, round_even_l(static_cast<double>(img.width()) * target_h / img.height()));
  if (w == img.width() && target_h == img.height()) return img;
  return resize(img, static_cast<int>(w), target_h);
}

Image crop(const Image& img, int x, int y, int w, int h) {
  if (w < 1 || h < 1 || x < 0 || y < 0 || x + w > img.width() || y + h > img.height())
    throw Error(ErrorKind::InvalidArgument, "crop rectangle outside image");
  Image out(w, h);
  for (int r = 0; r < h; ++r) std::copy_n(img.pixel(x, y + r), static_cast<std::size_t>(w) * 3, out.pixel(0, r));
  return out;
}

std::vector<float> to_gray(const Image& img) {
  std::vector<float> g(static_cast<std::size_t>(img.width()) * img.height());
  const auto bytes = img.bytes();
  for (std::size_t i = 0; i < g.size(); ++i)
    g[i] = 0.299f * bytes[3 * i] + 0.587f * bytes[3 * i + 1] + 0.114f * bytes[3 * i + 2];
  return g;
}

}  // namespace idread::raster
