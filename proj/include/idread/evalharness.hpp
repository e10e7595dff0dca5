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


// Scoring of the full pipeline over a manifest: vertex detection, then —
// only for correctly located samples — classification and field reading.

#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "idread/classifier.hpp"
#include "idread/extractor.hpp"
#include "idread/layout.hpp"
#include "idread/locator.hpp"
#include "idread/synthgen.hpp"

namespace idread::eval {

using raster::Image;
using raster::Quad;

struct VertexCriterion {
  double tolerance = 0.03;  // fraction of the truth quad's shortest side
};

/// True iff every predicted vertex is strictly closer than tolerance * l to
/// the corresponding truth vertex, l being the truth quad's shortest side.
bool vertex_correct(const Quad& pred, const Quad& truth, const VertexCriterion& criterion = {});

struct EvalParams {
  VertexCriterion criterion;
  locator::LocatorParams locator;  // the same seed is used for every sample
  int rectified_width = extract::kRectifiedWidth;
  unsigned threads = 1;            // samples evaluated in parallel
};

struct SampleResult {
  std::string image;
  DocumentClass cls = DocumentClass::PaperIdFront;
  bool located = false;
  std::optional<Quad> quad;             // absent when the locator failed outright
  std::optional<double> vertex_error;   // max vertex displacement / l
  std::string failure;                  // locator error message, if any
  std::optional<DocumentClass> predicted;
  int fields_total = 0;
  int fields_correct = 0;
  double seconds = 0;                   // wall clock; only written on request
};

struct ClassFieldStats {
  int located = 0;
  int fields_total = 0;
  int fields_wrong = 0;
};

struct EvalReport {
  int n_samples = 0;
  int n_located = 0;
  int n_class_correct = 0;
  int fields_total = 0;
  int fields_correct = 0;
  std::map<DocumentClass, ClassFieldStats> per_class;  // every class, keyed by truth
  std::vector<SampleResult> samples;                   // manifest order

  double vertex_success_rate() const;
  /// Over located samples only; nullopt when nothing was located.
  std::optional<double> classification_accuracy() const;
  std::optional<double> field_accuracy() const;
};

/// Uppercased, surrounding whitespace trimmed.
std::string normalize_field(std::string_view s);

/// Images are resolved relative to `base_dir`. Throws EmptyManifest and
/// MissingLayout (for any manifest class without a layout).
EvalReport evaluate_pipeline(const std::vector<synth::SampleRecord>& manifest, const std::filesystem::path& base_dir,
                             const classifier::Model& model, const layout::Registry& layouts,
                             const extract::Recognizer& recognizer, const EvalParams& params = {});

/// Aggregates already evaluated samples (the report minus any I/O).
EvalReport aggregate(std::vector<SampleResult> samples);

struct BreakdownRow {
  DocumentClass cls;
  int fields_total = 0;
  int fields_wrong = 0;
  std::optional<double> percent;  // null when the class has no located samples
};

/// Per-class field error percentages, in class-code order.
std::vector<BreakdownRow> error_breakdown(const EvalReport& report);

std::string report_to_json(const EvalReport& report);
/// One row per sample; the seconds column only when `timing` is set, so
/// default output is reproducible byte for byte.
void write_samples_csv(const std::filesystem::path& path, const EvalReport& report, bool timing = false);
void write_breakdown_csv(const std::filesystem::path& path, const std::vector<BreakdownRow>& rows);

}  // namespace idread::eval
