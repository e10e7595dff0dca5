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


// Per-class document layouts: aspect ratio, field rectangles (normalized to
// the document), typeface, color scheme and purely decorative elements.
// The same records drive rendering in synthgen and cropping in extractor.

#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "idread/doctypes.hpp"
#include "idread/font.hpp"
#include "idread/raster.hpp"

namespace idread::layout {

using raster::Rgb;

/// Normalized rectangle: x, y, w, h as fractions of document width/height.
struct NormRect {
  double x = 0, y = 0, w = 0, h = 0;
  friend bool operator==(const NormRect&, const NormRect&) = default;
};

struct FieldSpec {
  std::string name;
  NormRect rect;
  double cell = 3.0;  // font cell size in base-width pixels; cap height is 7 cells
  Rgb color{25, 25, 40};
  friend bool operator==(const FieldSpec&, const FieldSpec&) = default;
};

enum class DecorationKind { Band, Text, Photo, Ellipse };

struct Decoration {
  DecorationKind kind = DecorationKind::Band;
  NormRect rect;      // Text uses x, y as the top-left of the cap height
  Rgb color;
  std::string text;   // Text only
  double cell = 0;    // Text only
  friend bool operator==(const Decoration&, const Decoration&) = default;
};

struct ColorScheme {
  Rgb paper;
  Rgb accent;
  friend bool operator==(const ColorScheme&, const ColorScheme&) = default;
};

struct DocumentLayout {
  DocumentClass cls = DocumentClass::PaperIdFront;
  double aspect_ratio = 1.0;  // width / height
  int base_width = 1000;
  text::Typeface typeface = text::Typeface::Sans;
  ColorScheme scheme;
  std::vector<FieldSpec> fields;
  std::vector<Decoration> decorations;

  int base_height() const;
  const FieldSpec* field(const std::string& name) const;
  /// Throws FormatError unless rectangles lie in [0,1]^2, fields do not
  /// overlap and the aspect ratio is positive.
  void validate() const;
  friend bool operator==(const DocumentLayout&, const DocumentLayout&) = default;
};

using Registry = std::map<DocumentClass, DocumentLayout>;

/// The built-in schematic layouts for all nine classes.
Registry default_registry();

const DocumentLayout& find_layout(const Registry& reg, DocumentClass cls);

std::string registry_to_json(const Registry& reg);
Registry registry_from_json(const std::string& text);
Registry load_registry(const std::filesystem::path& path);
void save_registry(const Registry& reg, const std::filesystem::path& path);

/// Pixel rectangle of a normalized rect on a w x h document: origin and size
/// are each scaled and rounded half-to-even, then clamped to the document.
struct PixelBox {
  int x = 0, y = 0, w = 0, h = 0;
  friend bool operator==(const PixelBox&, const PixelBox&) = default;
};
PixelBox to_pixels(const NormRect& r, int width, int height);

}  // namespace idread::layout
