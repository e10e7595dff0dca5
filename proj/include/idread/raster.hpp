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

#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "idread/common.hpp"

namespace idread::raster {

struct Rgb {
  std::uint8_t r = 0, g = 0, b = 0;
  friend bool operator==(const Rgb&, const Rgb&) = default;
};

/// Row-major 8-bit RGB raster. Pixel (x, y) covers the unit square
/// [x, x+1) x [y, y+1); its center sits at (x + 0.5, y + 0.5).
class Image {
 public:
  Image() = default;
  Image(int width, int height, Rgb fill = {});

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }
  bool empty() const noexcept { return data_.empty(); }

  Rgb at(int x, int y) const {
    const std::uint8_t* p = &data_[index(x, y)];
    return {p[0], p[1], p[2]};
  }
  void set(int x, int y, Rgb c) {
    std::uint8_t* p = &data_[index(x, y)];
    p[0] = c.r;
    p[1] = c.g;
    p[2] = c.b;
  }
  std::uint8_t* pixel(int x, int y) { return &data_[index(x, y)]; }
  const std::uint8_t* pixel(int x, int y) const { return &data_[index(x, y)]; }

  std::span<std::uint8_t> bytes() noexcept { return data_; }
  std::span<const std::uint8_t> bytes() const noexcept { return data_; }

  friend bool operator==(const Image&, const Image&) = default;

 private:
  std::size_t index(int x, int y) const {
    return (static_cast<std::size_t>(y) * static_cast<std::size_t>(width_) + static_cast<std::size_t>(x)) * 3;
  }

  int width_ = 0;
  int height_ = 0;
  std::vector<std::uint8_t> data_;
};

struct Point {
  double x = 0.0;
  double y = 0.0;
  friend bool operator==(const Point&, const Point&) = default;
};

/// Vertices in canonical order: top-left, top-right, bottom-right, bottom-left.
struct Quad {
  std::array<Point, 4> v;
  friend bool operator==(const Quad&, const Quad&) = default;

  static Quad rect(double x0, double y0, double x1, double y1) {
    return Quad{{Point{x0, y0}, Point{x1, y0}, Point{x1, y1}, Point{x0, y1}}};
  }
  Point centroid() const;
  /// Shoelace area; positive for canonical order with y pointing down.
  double signed_area() const;
  /// Length of the shortest of the four sides.
  double shortest_side() const;
  /// Convex, non-self-intersecting and positively oriented.
  bool valid() const;
};

/// 3x3 projective map, row-major, normalized so m[8] == 1.
struct Homography {
  std::array<double, 9> m{1, 0, 0, 0, 1, 0, 0, 0, 1};

  Point apply(Point p) const;
  Homography inverse() const;
  Homography operator*(const Homography& rhs) const;
};

double color_distance(Rgb p, Rgb q);
/// Squared distance; integer-exact.
inline int color_distance_sq(Rgb p, Rgb q) {
  const int dr = int(p.r) - int(q.r), dg = int(p.g) - int(q.g), db = int(p.b) - int(q.b);
  return dr * dr + dg * dg + db * db;
}

/// Maps src[i] -> dst[i] for the four correspondences. Throws DegenerateQuad
/// when three points of either set are collinear or the system is singular.
Homography solve_homography(const std::array<Point, 4>& src, const std::array<Point, 4>& dst);

/// Homography taking the output rectangle [0,w]x[0,h] back to `src`.
Homography rect_to_quad(const Quad& src, int out_w, int out_h);

/// Bilinear sample at continuous coordinates (pixel centers at +0.5) with
/// edge clamping.
std::array<float, 3> sample_bilinear(const Image& img, double x, double y);

/// Output pixel (x, y) takes the bilinear sample at out_to_src(x+0.5, y+0.5).
Image warp_homography(const Image& img, const Homography& out_to_src, int out_w, int out_h);

/// Rectifies the quadrilateral `src` of `img` into an out_w x out_h raster.
Image warp_perspective(const Image& img, const Quad& src, int out_w, int out_h);

/// Boundary-inclusive containment test for a convex canonical quad.
bool point_in_quad(Point p, const Quad& q);

Image resize(const Image& img, int out_w, int out_h);
Image resize_to_height(const Image& img, int target_h);
Image crop(const Image& img, int x, int y, int w, int h);

/// Luma in [0,255] (ITU-R BT.601 weights).
std::vector<float> to_gray(const Image& img);

// Codecs. JPEG is baseline JFIF; PNG is 8-bit RGB.
std::vector<std::uint8_t> encode_jpeg(const Image& img, int quality);
Image decode_jpeg(std::span<const std::uint8_t> bytes);
std::vector<std::uint8_t> encode_png(const Image& img);
Image decode_png(std::span<const std::uint8_t> bytes);

std::vector<std::uint8_t> read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::span<const std::uint8_t> bytes);
/// Reads a PNG or JPEG file, sniffing the format from its magic bytes.
Image read_image(const std::filesystem::path& path);
/// Writes PNG or JPEG (quality 95) depending on the extension.
void write_image(const std::filesystem::path& path, const Image& img);

}  // namespace idread::raster
