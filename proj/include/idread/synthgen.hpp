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


// Synthetic training and evaluation data: dummy identities, schematic
// document renders, procedural backgrounds, compositing, the four-stage
// photo degradation and JSON-Lines dataset manifests.

#pragma once

#include <array>
#include <compare>
#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "idread/doctypes.hpp"
#include "idread/layout.hpp"
#include "idread/raster.hpp"

namespace idread::synth {

using raster::Image;
using raster::Quad;

struct Date {
  int year = 1970, month = 1, day = 1;
  auto operator<=>(const Date&) const = default;
  std::string display() const;  // DD.MM.YYYY
  std::string mrz() const;       // YYMMDD
  Date plus_days(int days) const;
  /// Same day `years` later; 29 February falls back to the 28th.
  Date plus_years(int years) const;
};

/// Dates are generated relative to this fixed day, never the wall clock.
inline constexpr Date kReferenceDate{2019, 7, 1};

struct Place {
  std::string code;  // cadastral code, e.g. H501
  std::string name;
};

struct NameLists {
  std::vector<std::string> surnames, male_names, female_names, streets;
  std::vector<Place> places;

  /// Reads surnames.txt, names_male.txt, names_female.txt, places.txt
  /// ("CODE NAME" per line) and streets.txt from `dir`.
  static NameLists load(const std::filesystem::path& dir);
};

/// The lists shipped in the project's data directory.
const NameLists& default_lists();

struct PersonRecord {
  std::string surname, name;
  char sex = 'M';
  Date birthdate, release_date, expiry_date;
  Place birthplace;
  std::string address;    // street and number
  std::string residence;  // municipality name
  std::string fiscal_code;
  std::string document_number;
};

PersonRecord gen_person(Rng& rng, const NameLists& lists, DocumentClass cls);

/// Italian fiscal code from surname, name, sex (M/F), birth date and
/// cadastral code, including the check character.
std::string fiscal_code(const std::string& surname, const std::string& name, char sex, const Date& birth,
                        const std::string& cadastral);

/// ICAO 9303 check digit (weights 7, 3, 1; '<' counts as 0).
char mrz_check_digit(std::string_view s);
/// Three 30-character lines of an ID-card (TD1) machine-readable zone.
std::array<std::string, 3> mrz_td1(const PersonRecord& p);
/// Two 44-character lines of a passport (TD3) machine-readable zone.
std::array<std::string, 2> mrz_td3(const PersonRecord& p);

using FieldValues = std::map<std::string, std::string>;

/// Field texts for `layout` derived from a person.
FieldValues person_fields(const layout::DocumentLayout& layout, const PersonRecord& p, Rng& rng);

/// Random strings shaped like real values (letters stay letters, digits
/// stay digits, separators are kept), shortened where needed to fit.
FieldValues random_fields(const layout::DocumentLayout& layout, const NameLists& lists, Rng& rng);

/// Pixels available for text inside a field at base size.
double field_capacity(const layout::DocumentLayout& layout, const layout::FieldSpec& field);

struct Rendered {
  Image image;
  FieldValues truth;
};

/// Draws the document at its base size. Throws TextOverflow if a value does
/// not fit its field and InvalidArgument if a field is missing from `values`.
Rendered render_document(const layout::DocumentLayout& layout, const FieldValues& values, Rng& rng);

enum class BackgroundKind { Gradient, Wood, Stripes, Noise, Tiles, Speckle };
inline constexpr int kBackgroundKinds = 6;

Image make_background(BackgroundKind kind, int width, int height, Rng& rng);
/// Random kind, colors and illumination.
Image make_background(int width, int height, Rng& rng);

struct PlacementParams {
  double outer_frac = 0.07;
  double inner_frac = 0.30;
  double min_height_frac = 0.45;  // document height relative to the photo
  double max_height_frac = 0.62;
  double max_rotation_deg = 5.0;
  double max_offset_frac = 0.04;
  double margin_frac = 0.15;      // room for the outward vertex perturbation
  int attempts = 200;
};

struct Composite {
  Image photo;
  Quad quad;
};

/// Scales, rotates and places `doc` on `background` so that, even after a
/// perturbation of margin_frac * l per vertex, the document stays inside the
/// outer_frac frame, its vertices lie outside the inner_frac start rectangle
/// and it covers that rectangle. Pixels outside the quad keep the background.
Composite composite_on_background(const Image& doc, const Image& background, Rng& rng,
                                  const PlacementParams& params = {});

struct DegradationParams {
  double persp_min = 0.05, persp_max = 0.15;  // fractions of the shortest side
  double alpha_min = 0.85, alpha_max = 1.05;
  double beta_min = -30, beta_max = 20;
  double noise_sigma = 4;
  int jpeg_quality = 70;

  void validate() const;
};

/// Moves each vertex outward along its centroid ray by an independent
/// length in [persp_min * l, persp_max * l] and re-warps the photo.
Composite perturb_vertices(const Image& photo, const Quad& quad, const DegradationParams& params, Rng& rng);

/// p' = alpha * p + beta, rounded and clipped per channel.
Image adjust_contrast_brightness(const Image& img, double alpha, double beta);

Image add_gaussian_noise(const Image& img, double sigma, Rng& rng);

struct Degraded {
  Image image;
  Quad quad;
  std::vector<std::uint8_t> jpeg;  // the encoded stream `image` was decoded from
};

/// Perturbation, contrast/brightness, noise and JPEG round trip, in order.
Degraded degrade_pipeline(const Image& photo, const Quad& quad, const DegradationParams& params, Rng& rng);

struct SampleRecord {
  std::string image;  // relative to the manifest's directory
  DocumentClass cls = DocumentClass::PaperIdFront;
  Quad quad;
  FieldValues fields;
};

std::string to_json_line(const SampleRecord& r);
SampleRecord from_json_line(const std::string& line);
void write_manifest(const std::filesystem::path& path, const std::vector<SampleRecord>& records);
std::vector<SampleRecord> read_manifest(const std::filesystem::path& path);

inline constexpr const char* kManifestName = "manifest.jsonl";

enum class DatasetKind { Main, Classifier, Ocr };
DatasetKind dataset_kind_from_name(std::string_view name);

struct SynthConfig {
  NameLists lists = default_lists();
  layout::Registry layouts = layout::default_registry();
  DegradationParams degradation;
  PlacementParams placement;
  int photo_width = 1600;
  int photo_height = 1200;
  double classifier_jitter = 0.02;  // of the shortest side, per vertex coordinate
  int classifier_size = 200;
  int rectified_width = 1000;       // OCR crops are cut from this rectification
  bool debug_png = false;           // also write the undegraded composite
  unsigned threads = 1;
};

/// Writes images plus manifest.jsonl into `out_dir` and returns the records.
/// Sample i draws from derive_rng(seed, i) and has class i mod 9, so output is
/// identical for any thread count. For kind Ocr, `count` documents are
/// rendered and each contributes one record per field line.
std::vector<SampleRecord> gen_dataset(DatasetKind kind, int count, std::uint64_t seed,
                                      const std::filesystem::path& out_dir, const SynthConfig& cfg);

}  // namespace idread::synth
