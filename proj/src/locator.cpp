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

#include "idread/locator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>

namespace idread::locator {

using raster::Point;
using raster::point_in_quad;

void LocatorParams::validate() const {
  if (samples < 1) throw Error(ErrorKind::InvalidArgument, "samples must be >= 1");
  if (initial_threshold < 1) throw Error(ErrorKind::InvalidArgument, "initial threshold must be >= 1");
  if (!(weight > 0)) throw Error(ErrorKind::InvalidArgument, "weight must be > 0");
  if (!(outer_frac > 0 && outer_frac < inner_frac && inner_frac < 0.5))
    throw Error(ErrorKind::InvalidArgument, "need 0 < outer_frac < inner_frac < 0.5");
  if (!(stop_frac > 0 && stop_frac < 1)) throw Error(ErrorKind::InvalidArgument, "stop_frac must be in (0,1)");
  if (step_px < 0) throw Error(ErrorKind::InvalidArgument, "step must be >= 1 (or 0 for auto)");
}

int LocatorParams::effective_step(int width, int height) const {
  if (step_px > 0) return step_px;
  return std::max(1, static_cast<int>(round_even_l(0.005 * std::min(width, height))));
}

std::size_t SelectionMask::count() const {
  return static_cast<std::size_t>(std::count(bits.begin(), bits.end(), std::uint8_t{1}));
}

Regions init_regions(int width, int height, const LocatorParams& params) {
  params.validate();
  if (width < 20 || height < 20) throw Error(ErrorKind::ImageTooSmall, "image must be at least 20x20");
  auto at = [](double frac, int extent) { return static_cast<int>(round_even_l(frac * extent)); };
  Regions r;
  r.inner_frame = {at(params.outer_frac, width), at(params.outer_frac, height), at(1.0 - params.outer_frac, width),
                   at(1.0 - params.outer_frac, height)};
  const int sx0 = at(params.inner_frac, width), sy0 = at(params.inner_frac, height);
  const int sx1 = at(1.0 - params.inner_frac, width), sy1 = at(1.0 - params.inner_frac, height);
  if (r.inner_frame.x1 <= r.inner_frame.x0 || r.inner_frame.y1 <= r.inner_frame.y0 || sx1 <= sx0 || sy1 <= sy0)
    throw Error(ErrorKind::ImageTooSmall, "central rectangle is empty");
  r.start = Quad::rect(sx0, sy0, sx1, sy1);
  return r;
}

std::vector<RowSpan> rasterize_quad(const Quad& q, int width, int height) {
  std::vector<RowSpan> spans(static_cast<std::size_t>(height));
  double min_y = q.v[0].y, max_y = q.v[0].y;
  for (const Point& p : q.v) {
    min_y = std::min(min_y, p.y);
    max_y = std::max(max_y, p.y);
  }
  const int row0 = std::max(0, static_cast<int>(std::floor(min_y - 0.5)));
  const int row1 = std::min(height - 1, static_cast<int>(std::ceil(max_y - 0.5)));
  for (int i = row0; i <= row1; ++i) {
    const double y = i + 0.5;
    double lo_x = std::numeric_limits<double>::infinity();
    double hi_x = -lo_x;
    for (int e = 0; e < 4; ++e) {
      const Point& a = q.v[e];
      const Point& b = q.v[(e + 1) % 4];
      if ((a.y <= y && y <= b.y) || (b.y <= y && y <= a.y)) {
        if (a.y == b.y) {
          lo_x = std::min({lo_x, a.x, b.x});
          hi_x = std::max({hi_x, a.x, b.x});
        } else {
          const double x = a.x + (y - a.y) * (b.x - a.x) / (b.y - a.y);
          lo_x = std::min(lo_x, x);
          hi_x = std::max(hi_x, x);
        }
      }
    }
    if (lo_x > hi_x) continue;
    // The analytic span is bracketed one pixel wide on each side, then
    // trimmed with the exact predicate so both paths agree bit for bit.
    int lo = std::max(0, static_cast<int>(std::floor(lo_x - 0.5)));
    int hi = std::min(width - 1, static_cast<int>(std::ceil(hi_x - 0.5)));
    auto inside = [&](int j) { return point_in_quad({j + 0.5, y}, q); };
    while (lo <= hi && !inside(lo)) ++lo;
    while (hi >= lo && !inside(hi)) --hi;
    if (lo > hi) continue;
    while (lo > 0 && inside(lo - 1)) --lo;
    while (hi < width - 1 && inside(hi + 1)) ++hi;
    spans[static_cast<std::size_t>(i)] = {lo, hi};
  }
  return spans;
}

ThresholdResult adapt_threshold(const Image& img, Rgb sample, const Quad& start, const LocatorParams& params) {
  const int w = img.width(), h = img.height();
  const int t0 = params.initial_threshold;
  // hist[t] counts pixels in the start region whose distance d satisfies
  // t - 1 <= d < t, i.e. t is the smallest threshold that selects them.
  std::vector<std::int64_t> hist(static_cast<std::size_t>(t0) + 1, 0);
  const int t0_sq = t0 * t0;
  const auto spans = rasterize_quad(start, w, h);
  for (int y = 0; y < h; ++y) {
    const RowSpan s = spans[static_cast<std::size_t>(y)];
    for (int x = s.first; x <= s.last; ++x) {
      const int d2 = raster::color_distance_sq(img.at(x, y), sample);
      if (d2 >= t0_sq) continue;
      int t = static_cast<int>(std::sqrt(static_cast<double>(d2)));
      while (t * t > d2) --t;
      while ((t + 1) * (t + 1) <= d2) ++t;
      hist[static_cast<std::size_t>(t) + 1]++;
    }
  }
  const double limit = params.stop_frac * static_cast<double>(w) * static_cast<double>(h);
  std::vector<std::int64_t> selected(hist.size(), 0);
  for (std::size_t t = 1; t < hist.size(); ++t) selected[t] = selected[t - 1] + hist[t];

  int threshold = t0;
  while (threshold > 0 && static_cast<double>(selected[static_cast<std::size_t>(threshold)]) > limit) --threshold;

  ThresholdResult out{threshold, SelectionMask(w, h)};
  if (threshold == 0) return out;
  const int t_sq = threshold * threshold;
  const auto bytes = img.bytes();
  for (std::size_t i = 0; i < out.mask.bits.size(); ++i) {
    const Rgb c{bytes[3 * i], bytes[3 * i + 1], bytes[3 * i + 2]};
    out.mask.bits[i] = raster::color_distance_sq(c, sample) < t_sq ? 1 : 0;
  }
  return out;
}

SelectionMask build_background_mask(const Image& img, const LocatorParams& params) {
  const Regions regions = init_regions(img.width(), img.height(), params);
  std::vector<std::int32_t> outer;
  outer.reserve(static_cast<std::size_t>(img.width()) * img.height());
  for (int y = 0; y < img.height(); ++y)
    for (int x = 0; x < img.width(); ++x)
      if (!regions.inner_frame.contains(x, y)) outer.push_back(y * img.width() + x);

  Rng rng(params.seed);
  std::uniform_int_distribution<std::size_t> pick(0, outer.size() - 1);
  std::vector<Rgb> colors(static_cast<std::size_t>(params.samples));
  for (auto& c : colors) {
    const std::int32_t idx = outer[pick(rng)];
    c = img.at(idx % img.width(), idx / img.width());
  }

  const unsigned chunks = std::max(1u, std::min<unsigned>(params.threads, static_cast<unsigned>(colors.size())));
  std::vector<SelectionMask> partial(chunks, SelectionMask(img.width(), img.height()));
  parallel_for(chunks, chunks, [&](std::size_t chunk) {
    auto& acc = partial[chunk].bits;
    for (std::size_t k = chunk; k < colors.size(); k += chunks) {
      const auto r = adapt_threshold(img, colors[k], regions.start, params);
      if (r.threshold == 0) continue;
      for (std::size_t i = 0; i < acc.size(); ++i) acc[i] |= r.mask.bits[i];
    }
  });
  SelectionMask mask = std::move(partial[0]);
  for (unsigned c = 1; c < chunks; ++c)
    for (std::size_t i = 0; i < mask.bits.size(); ++i) mask.bits[i] |= partial[c].bits[i];
  return mask;
}

GoodnessEvaluator::GoodnessEvaluator(const SelectionMask& mask, double weight)
    : width_(mask.width), height_(mask.height), weight_(weight),
      sat_(static_cast<std::size_t>(mask.width + 1) * (mask.height + 1), 0) {
  const std::size_t stride = static_cast<std::size_t>(width_) + 1;
  for (int y = 0; y < height_; ++y) {
    std::int64_t row = 0;
    for (int x = 0; x < width_; ++x) {
      row += mask.at(x, y) ? 1 : 0;
      sat_[(y + 1) * stride + x + 1] = sat_[y * stride + x + 1] + row;
    }
  }
  total_ = sat_.back();
}

double GoodnessEvaluator::operator()(const Quad& q) const {
  const std::size_t stride = static_cast<std::size_t>(width_) + 1;
  const auto spans = rasterize_quad(q, width_, height_);
  std::int64_t inside = 0, inside_selected = 0;
  for (int y = 0; y < height_; ++y) {
    const RowSpan s = spans[static_cast<std::size_t>(y)];
    if (s.first > s.last) continue;
    inside += s.last - s.first + 1;
    inside_selected += sat_[(y + 1) * stride + s.last + 1] - sat_[y * stride + s.last + 1] -
                       sat_[(y + 1) * stride + s.first] + sat_[y * stride + s.first];
  }
  // sum(a * !b) = total - inside_selected; sum(!a * b) = inside - inside_selected.
  return static_cast<double>(total_ - inside_selected) + weight_ * static_cast<double>(inside - inside_selected);
}

double goodness(const SelectionMask& mask, const Quad& quad, double weight) {
  return GoodnessEvaluator(mask, weight)(quad);
}

Quad optimize_vertices(const SelectionMask& mask, const Quad& start, const LocatorParams& params,
                       OptimizeTrace* trace) {
  if (!start.valid()) throw Error(ErrorKind::DegenerateQuad, "starting quad is not a valid convex quad");
  const int w = mask.width, h = mask.height;
  const int step = params.effective_step(w, h);
  const GoodnessEvaluator eval(mask, params.weight);

  Quad q = start;
  double best = eval(q);
  if (trace) *trace = OptimizeTrace{0, 0, {best}};

  // Tries each move for vertex i and keeps the best strict improvement.
  auto improve_vertex = [&](int i, std::span<const Point> moves) {
    double best_value = best;
    Quad best_quad = q;
    for (const Point& m : moves) {
      Quad cand = q;
      cand.v[i].x = std::clamp(q.v[i].x + m.x, 0.0, static_cast<double>(w));
      cand.v[i].y = std::clamp(q.v[i].y + m.y, 0.0, static_cast<double>(h));
      if (cand.v[i] == q.v[i] || !cand.valid()) continue;
      const double value = eval(cand);
      if (value > best_value) {
        best_value = value;
        best_quad = cand;
      }
    }
    if (best_value <= best) return false;
    q = best_quad;
    best = best_value;
    return true;
  };

  // Outward phase: diagonal, horizontal and vertical steps away from the
  // centroid. Outward signs per canonical vertex: TL, TR, BR, BL.
  constexpr int kSx[4] = {-1, 1, 1, -1};
  constexpr int kSy[4] = {-1, -1, 1, 1};
  for (;;) {
    bool improved = false;
    for (int i = 0; i < 4; ++i) {
      const double sx = kSx[i] * step, sy = kSy[i] * step;
      const Point moves[3] = {{sx, sy}, {sx, 0.0}, {0.0, sy}};
      improved |= improve_vertex(i, moves);
    }
    if (trace) {
      trace->outward_sweeps++;
      trace->goodness_per_sweep.push_back(best);
    }
    if (!improved) break;
  }

  // Refinement: a vertex that crossed a tilted edge while its neighbours
  // lagged can only come back with inward moves. Eight directions, step
  // halving down to one pixel, strict improvement only.
  for (int s = step; s >= 1; s /= 2) {
    const double d = s;
    const Point moves[8] = {{-d, -d}, {0, -d}, {d, -d}, {-d, 0}, {d, 0}, {-d, d}, {0, d}, {d, d}};
    for (;;) {
      bool improved = false;
      for (int i = 0; i < 4; ++i) improved |= improve_vertex(i, moves);
      if (trace) {
        trace->refine_sweeps++;
        trace->goodness_per_sweep.push_back(best);
      }
      if (!improved) break;
    }
  }
  return q;
}

Quad locate(const Image& img, const LocatorParams& params) {
  const Regions regions = init_regions(img.width(), img.height(), params);
  const SelectionMask mask = build_background_mask(img, params);
  return optimize_vertices(mask, regions.start, params);
}

}  // namespace idread::locator
