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


// Bitmap typefaces used to draw document text and to build the recognizer's
// glyph templates. Glyphs are 7 cells tall with proportional widths; the
// serif face adds short feet at the ends of vertical strokes and a wider
// letter gap so the feet never touch the neighbours.

#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "idread/raster.hpp"

namespace idread::text {

enum class Typeface { Sans = 0, Serif = 1 };

std::string_view typeface_name(Typeface t);
Typeface typeface_from_name(std::string_view name);

inline constexpr int kGlyphRows = 7;

/// A–Z, 0–9, space and . - / <
std::string_view charset();
bool in_charset(char c);

/// Axis-aligned box in cell units; glyph ink starts at x = 0.
struct CellRect {
  double x0, y0, x1, y1;
};

struct Glyph {
  char ch;
  double ink_width;  // cells
  std::vector<CellRect> rects;
};

const Glyph& glyph(char c, Typeface face);

/// Gap between consecutive glyphs, in cells.
double letter_spacing(Typeface face);

/// Width of a rendered string in cells (no trailing gap).
double text_width(std::string_view s, Typeface face);

/// Box-filtered coverage in [0, 1], row-major.
struct Coverage {
  int width = 0;
  int height = 0;
  std::vector<float> alpha;
};

/// Renders `s` with its cell grid origin at (x, y) (top of the cap height)
/// into a coverage buffer of the given size.
void rasterize_text(Coverage& out, double x, double y, std::string_view s, Typeface face, double cell);

/// Composites `color` over the image wherever the text covers it.
void draw_text(raster::Image& img, double x, double y, std::string_view s, Typeface face, double cell,
               raster::Rgb color);

/// Single glyph rendered with a cap height of `height` pixels.
Coverage render_glyph(char c, Typeface face, int height);

}  // namespace idread::text
