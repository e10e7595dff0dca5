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


// Field extraction and reading: rectify the located document to its class
// aspect ratio, cut the layout's field rectangles, normalize them to a
// 40-pixel line height and pass them to a recognizer.

#pragma once

#include <map>
#include <memory>
#include <string>
#include <vector>

#include "idread/classifier.hpp"
#include "idread/font.hpp"
#include "idread/layout.hpp"
#include "idread/locator.hpp"
#include "idread/raster.hpp"

namespace idread::extract {

using raster::Image;
using raster::Quad;

inline constexpr int kLineHeight = 40;
inline constexpr int kRectifiedWidth = 1000;

/// Warps the quad to width x round(width / aspect_ratio).
Image rectify(const Image& photo, const Quad& quad, const layout::DocumentLayout& layout,
              int width = kRectifiedWidth);

struct FieldLine {
  std::string name;
  Image line;
};

/// One crop per layout field, resized to `line_height` rows.
std::vector<FieldLine> extract_field_lines(const Image& doc, const layout::DocumentLayout& layout,
                                           int line_height = kLineHeight);

struct Recognition {
  std::string text;
  double confidence = 0;  // in [0, 1]
  friend bool operator==(const Recognition&, const Recognition&) = default;
};

/// A text-line reader. Implementations must accept any non-empty image.
class Recognizer {
 public:
  virtual ~Recognizer() = default;
  virtual Recognition recognize(const Image& line) const = 0;
};

/// Binary-ish glyph rasters at a fixed cap height, for every character of
/// both typefaces.
struct GlyphTemplate {
  char ch;
  text::Typeface face;
  int width;
  std::vector<float> ink;  // row-major, width x height, coverage in [0, 1]
};

struct GlyphTemplates {
  int height = kLineHeight;
  std::vector<GlyphTemplate> glyphs;

  static GlyphTemplates build(int height = kLineHeight);
};

/// Baseline reader for the generator's own typefaces: Otsu binarization,
/// the strongest ink band as the text line, column segmentation (gaps
/// narrower than three columns merge), and normalized cross-correlation
/// against glyph templates.
class TemplateRecognizer : public Recognizer {
 public:
  explicit TemplateRecognizer(GlyphTemplates templates = GlyphTemplates::build());
  Recognition recognize(const Image& line) const override;
  const GlyphTemplates& templates() const { return templates_; }

 private:
  GlyphTemplates templates_;
};

/// Otsu threshold over 8-bit gray levels: pixels <= threshold are ink.
int otsu_threshold(const std::vector<float>& gray);

struct DocumentReadout {
  DocumentClass cls = DocumentClass::PaperIdFront;
  std::vector<float> probabilities;
  Quad quad;
  std::map<std::string, Recognition> fields;
};

struct ReaderConfig {
  locator::LocatorParams locator;
  int rectified_width = kRectifiedWidth;
  unsigned threads = 1;  // per-field recognition
};

/// locate -> preprocess -> classify -> rectify -> extract -> recognize.
DocumentReadout read_document(const Image& photo, const classifier::Model& model, const layout::Registry& layouts,
                              const Recognizer& recognizer, const ReaderConfig& cfg = {});

/// As read_document, with the quad supplied instead of located.
DocumentReadout read_document_at(const Image& photo, const Quad& quad, const classifier::Model& model,
                                 const layout::Registry& layouts, const Recognizer& recognizer,
                                 const ReaderConfig& cfg = {});

/// Reads the fields of an already classified document.
std::map<std::string, Recognition> read_fields(const Image& photo, const Quad& quad,
                                               const layout::DocumentLayout& layout, const Recognizer& recognizer,
                                               const ReaderConfig& cfg = {});

std::string readout_to_json(const DocumentReadout& r);

}  // namespace idread::extract
