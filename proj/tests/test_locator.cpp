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

#include <cmath>
#include <random>

#include "doctest.h"
#include "oracles.hpp"
#include "idread/locator.hpp"

using namespace idread;
using namespace idread::locator;
using idread::raster::Point;

using namespace idread::oracle;

namespace {

constexpr Rgb kA{30, 30, 30};
constexpr Rgb kB{230, 30, 30};  // distance 200 from kA

Image two_tone(int w, int h, const Quad& doc) {
  Image img(w, h, kA);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x)
      if (raster::point_in_quad({x + 0.5, y + 0.5}, doc)) img.set(x, y, kB);
  return img;
}

}  // namespace

TEST_CASE("init_regions") {
  LocatorParams p;
  const Regions r = init_regions(1000, 800, p);
  CHECK(r.inner_frame == PixelRect{70, 56, 930, 744});
  CHECK(r.start == Quad::rect(300, 240, 700, 560));
  CHECK(init_regions(100, 100, p).start == Quad::rect(30, 30, 70, 70));
  try {
    init_regions(10, 10, p);
    FAIL("expected ImageTooSmall");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::ImageTooSmall);
  }
}

TEST_CASE("adapt_threshold") {
  LocatorParams p;
  const Quad doc = Quad::rect(20, 20, 80, 80);
  const Image img = two_tone(100, 100, doc);
  const Quad start = init_regions(100, 100, p).start;

  SUBCASE("two tone keeps the initial threshold and selects the background") {
    const auto r = adapt_threshold(img, kA, start, p);
    CHECK(r.threshold == 25);
    for (int y = 0; y < 100; ++y)
      for (int x = 0; x < 100; ++x) CHECK(r.mask.at(x, y) == (img.at(x, y) == kA));
  }
  SUBCASE("uniform image collapses to zero") {
    const Image flat(100, 100, kA);
    const auto r = adapt_threshold(flat, kA, start, p);
    CHECK(r.threshold == 0);
    CHECK(r.mask.count() == 0);
  }
  SUBCASE("far sample selects nothing at T0") {
    const auto r = adapt_threshold(img, Rgb{255, 255, 255}, start, p);
    CHECK(r.threshold == 25);
    CHECK(r.mask.count() == 0);
  }
  SUBCASE("result is monotone in the threshold") {
    std::mt19937_64 rng(17);
    std::uniform_int_distribution<int> c(0, 255);
    Image noisy(60, 50);
    for (int y = 0; y < 50; ++y)
      for (int x = 0; x < 60; ++x)
        noisy.set(x, y, Rgb{std::uint8_t(100 + c(rng) % 40), std::uint8_t(100 + c(rng) % 40), std::uint8_t(120)});
    const Quad s = init_regions(60, 50, p).start;
    for (int k = 0; k < 20; ++k) {
      const Rgb sample = noisy.at(c(rng) % 60, c(rng) % 50);
      const auto r = adapt_threshold(noisy, sample, s, p);
      const int t1 = r.threshold + 1;
      std::size_t inside = 0;
      for (int y = 0; y < 50; ++y)
        for (int x = 0; x < 60; ++x) {
          const bool at_t1 = raster::color_distance(noisy.at(x, y), sample) < t1;
          if (r.mask.at(x, y)) CHECK(at_t1);
          if (at_t1 && raster::point_in_quad({x + 0.5, y + 0.5}, s)) ++inside;
        }
      // T_k is the largest admissible threshold: T_k + 1 breaks the 0.01% rule.
      if (r.threshold < p.initial_threshold) CHECK(inside > p.stop_frac * 60 * 50);
    }
  }
}

TEST_CASE("build_background_mask") {
  LocatorParams p;
  p.seed = 42;
  const Image img = two_tone(100, 100, Quad::rect(20, 20, 80, 80));
  const SelectionMask m = build_background_mask(img, p);
  for (int y = 0; y < 100; ++y)
    for (int x = 0; x < 100; ++x) CHECK(m.at(x, y) == (img.at(x, y) == kA));

  CHECK(build_background_mask(Image(100, 100, kA), p).count() == 0);
  CHECK(build_background_mask(img, p) == m);

  LocatorParams threaded = p;
  threaded.threads = 4;
  CHECK(build_background_mask(img, threaded) == m);
}

TEST_CASE("goodness") {
  SelectionMask ones(8, 6);
  std::fill(ones.bits.begin(), ones.bits.end(), 1);
  CHECK(goodness(ones, Quad::rect(0, 0, 8, 6), 1.5) == 0.0);
  // A quad whose region covers no pixel center.
  CHECK(goodness(ones, Quad::rect(0.1, 0.1, 0.4, 0.4), 1.5) == 48.0);

  SelectionMask diag(2, 2);
  diag.bits = {1, 0, 0, 1};
  CHECK(goodness(diag, Quad::rect(1, 1, 2, 2), 1.5) == 1.0);

  SUBCASE("accelerated path equals the naive loop") {
    std::mt19937_64 rng(2024);
    for (int n = 0; n < 100; ++n) {
      const SelectionMask m = random_mask(rng, 32, 32, 0.4);
      const Quad q = random_quad_in(rng, 32, 32);
      CHECK(goodness(m, q, 1.5) == naive_goodness(m, q, 1.5));
    }
  }
  SUBCASE("increment rule on region expansion") {
    std::mt19937_64 rng(99);
    std::uniform_real_distribution<double> grow(0.0, 4.0);
    for (int n = 0; n < 100; ++n) {
      const SelectionMask m = random_mask(rng, 32, 32, 0.5);
      Quad inner = random_quad_in(rng, 32, 32);
      // Expand each vertex away from the centroid: the grown quad contains the original.
      const Point c = inner.centroid();
      Quad outer = inner;
      for (auto& v : outer.v) {
        const double s = 1.0 + grow(rng) / 10.0;
        v = {c.x + (v.x - c.x) * s, c.y + (v.y - c.y) * s};
      }
      if (!outer.valid()) continue;
      int new_selected = 0, new_unselected = 0;
      for (int y = 0; y < 32; ++y)
        for (int x = 0; x < 32; ++x) {
          const Point pc{x + 0.5, y + 0.5};
          const bool in_outer = raster::point_in_quad(pc, outer);
          const bool in_inner = raster::point_in_quad(pc, inner);
          if (in_inner) REQUIRE(in_outer);
          if (in_outer && !in_inner) (m.at(x, y) ? new_selected : new_unselected)++;
        }
      const double delta = goodness(m, outer, 1.5) - goodness(m, inner, 1.5);
      CHECK(delta == 1.5 * new_unselected - new_selected);
    }
  }
}

TEST_CASE("rasterize_quad agrees with point_in_quad on integer-vertex quads") {
  std::mt19937_64 rng(5);
  for (int n = 0; n < 200; ++n) {
    const Quad q = random_quad_in(rng, 40, 30);
    const auto spans = rasterize_quad(q, 40, 30);
    for (int y = 0; y < 30; ++y)
      for (int x = 0; x < 40; ++x) {
        const bool in_span = x >= spans[y].first && x <= spans[y].last;
        CHECK(in_span == raster::point_in_quad({x + 0.5, y + 0.5}, q));
      }
  }
}

TEST_CASE("optimize_vertices") {
  LocatorParams p;

  SUBCASE("recovers an axis-aligned document") {
    const Quad doc = Quad::rect(63, 41, 341, 262);
    const Image img = two_tone(400, 300, doc);
    SelectionMask mask(400, 300);
    for (int y = 0; y < 300; ++y)
      for (int x = 0; x < 400; ++x) mask.bits[y * 400 + x] = img.at(x, y) == kA ? 1 : 0;
    const int step = p.effective_step(400, 300);
    CHECK(step == 2);
    OptimizeTrace trace;
    const Quad q = optimize_vertices(mask, init_regions(400, 300, p).start, p, &trace);
    for (int i = 0; i < 4; ++i) {
      CHECK(std::abs(q.v[i].x - doc.v[i].x) <= step);
      CHECK(std::abs(q.v[i].y - doc.v[i].y) <= step);
    }
    CHECK(trace.outward_sweeps <= (400 + 300) / step * 4);
    for (std::size_t s = 1; s < trace.goodness_per_sweep.size(); ++s)
      CHECK(trace.goodness_per_sweep[s] >= trace.goodness_per_sweep[s - 1]);
  }
  SUBCASE("empty mask expands to the image bounds") {
    const SelectionMask empty(120, 90);
    const Quad q = optimize_vertices(empty, init_regions(120, 90, p).start, p);
    CHECK(q == Quad::rect(0, 0, 120, 90));
  }
  SUBCASE("a maximum is a fixed point") {
    const SelectionMask empty(120, 90);
    const Quad full = Quad::rect(0, 0, 120, 90);
    CHECK(optimize_vertices(empty, full, p) == full);
  }
}

TEST_CASE("locate") {
  LocatorParams p;
  p.seed = 7;
  const Quad doc{{Point{140, 95}, Point{505, 110}, Point{490, 380}, Point{128, 360}}};
  const Image img = two_tone(640, 480, doc);
  const Quad q = locate(img, p);
  for (int i = 0; i < 4; ++i) CHECK(std::hypot(q.v[i].x - doc.v[i].x, q.v[i].y - doc.v[i].y) <= 0.01 * 480);
  CHECK(locate(img, p) == q);
  CHECK(locate(Image(200, 150, kA), p) == Quad::rect(0, 0, 200, 150));
}
