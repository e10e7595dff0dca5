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

// Document localization by background color similarity.
//
// Pixels whose color is close to colors sampled near the photo border form a
// selection mask. A candidate quadrilateral is scored by
//
//   c = sum(a * !b) + d * sum(!a * b)
//
// where a is the mask and b the rasterized quad, and its vertices are pushed
// outward from a central starting rectangle while c improves.

#pragma once

#include <cstdint>
#include <vector>

#include "idread/raster.hpp"

namespace idread::locator {

using raster::Image;
using raster::Quad;
using raster::Rgb;

struct LocatorParams {
  int samples = 100;            // L
  int initial_threshold = 25;   // T0
  double weight = 1.5;          // d
  double outer_frac = 0.07;
  double inner_frac = 0.30;
  double stop_frac = 0.0001;
  int step_px = 0;              // 0 selects max(1, round(0.005 * min(M, N)))
  std::uint64_t seed = 0;
  unsigned threads = 1;

  void validate() const;
  int effective_step(int width, int height) const;
};

/// One bit per pixel, row-major.
struct SelectionMask {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> bits;

  SelectionMask() = default;
  SelectionMask(int w, int h) : width(w), height(h), bits(static_cast<std::size_t>(w) * h, 0) {}
  bool at(int x, int y) const { return bits[static_cast<std::size_t>(y) * width + x] != 0; }
  std::size_t count() const;
  friend bool operator==(const SelectionMask&, const SelectionMask&) = default;
};

/// Integer pixel rectangle [x0, x1) x [y0, y1).
struct PixelRect {
  int x0 = 0, y0 = 0, x1 = 0, y1 = 0;
  bool contains(int x, int y) const { return x >= x0 && x < x1 && y >= y0 && y < y1; }
  friend bool operator==(const PixelRect&, const PixelRect&) = default;
};

struct Regions {
  PixelRect inner_frame;  // outer region is everything outside this
  Quad start;
};

Regions init_regions(int width, int height, const LocatorParams& params);

struct ThresholdResult {
  int threshold = 0;
  SelectionMask mask;
};

ThresholdResult adapt_threshold(const Image& img, Rgb sample, const Quad& start, const LocatorParams& params);

SelectionMask build_background_mask(const Image& img, const LocatorParams& params);

/// Per-row inclusive pixel spans [first, last] of the pixels whose centers
/// pass point_in_quad. Rows with no pixels have first > last.
struct RowSpan {
  int first = 0;
  int last = -1;
};
std::vector<RowSpan> rasterize_quad(const Quad& q, int width, int height);

/// Evaluates c for many quads against one mask in O(rows) per quad, using a
/// summed-area table of the mask.
class GoodnessEvaluator {
 public:
  GoodnessEvaluator(const SelectionMask& mask, double weight);
  double operator()(const Quad& q) const;

 private:
  int width_;
  int height_;
  double weight_;
  std::vector<std::int64_t> sat_;  // (height+1) x (width+1)
  std::int64_t total_;
};

double goodness(const SelectionMask& mask, const Quad& quad, double weight);

struct OptimizeTrace {
  int outward_sweeps = 0;
  int refine_sweeps = 0;
  std::vector<double> goodness_per_sweep;  // value after each sweep, starting with the initial quad
};

/// Greedy vertex search. The outward phase moves each vertex (in canonical
/// order) by step_px along its outward diagonal, horizontal or vertical
/// direction, keeping the best strict improvement, until a sweep changes
/// nothing. A refinement phase then allows all eight directions with the
/// step halved down to one pixel, again accepting strict improvements only.
/// Vertices are clamped to the image rectangle [0, M] x [0, N].
Quad optimize_vertices(const SelectionMask& mask, const Quad& start, const LocatorParams& params,
                       OptimizeTrace* trace = nullptr);

Quad locate(const Image& img, const LocatorParams& params);

}  // namespace idread::locator
