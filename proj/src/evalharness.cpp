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


#include "idread/evalharness.hpp"

#include <chrono>
#include <cmath>
#include <fstream>

#include "json.hpp"

namespace idread::eval {

bool vertex_correct(const Quad& pred, const Quad& truth, const VertexCriterion& criterion) {
  if (!(criterion.tolerance > 0)) throw Error(ErrorKind::InvalidArgument, "vertex tolerance must be positive");
  const double limit = criterion.tolerance * truth.shortest_side();
  for (int i = 0; i < 4; ++i)
    if (!(std::hypot(pred.v[i].x - truth.v[i].x, pred.v[i].y - truth.v[i].y) < limit)) return false;
  return true;
}

double EvalReport::vertex_success_rate() const {
  return n_samples == 0 ? 0.0 : static_cast<double>(n_located) / n_samples;
}

std::optional<double> EvalReport::classification_accuracy() const {
  if (n_located == 0) return std::nullopt;
  return static_cast<double>(n_class_correct) / n_located;
}

std::optional<double> EvalReport::field_accuracy() const {
  if (fields_total == 0) return std::nullopt;
  return static_cast<double>(fields_correct) / fields_total;
}

std::string normalize_field(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  std::string out(s.substr(b, e - b + 1));
  for (char& c : out)
    if (c >= 'a' && c <= 'z') c = static_cast<char>(c - 'a' + 'A');
  return out;
}

EvalReport aggregate(std::vector<SampleResult> samples) {
  EvalReport r;
  for (DocumentClass c : kAllClasses) r.per_class[c] = {};
  r.n_samples = static_cast<int>(samples.size());
  for (const auto& s : samples) {
    if (!s.located) continue;
    ++r.n_located;
    r.n_class_correct += s.predicted == s.cls;
    r.fields_total += s.fields_total;
    r.fields_correct += s.fields_correct;
    auto& pc = r.per_class[s.cls];
    ++pc.located;
    pc.fields_total += s.fields_total;
    pc.fields_wrong += s.fields_total - s.fields_correct;
  }
  r.samples = std::move(samples);
  return r;
}

EvalReport evaluate_pipeline(const std::vector<synth::SampleRecord>& manifest, const std::filesystem::path& base_dir,
                             const classifier::Model& model, const layout::Registry& layouts,
                             const extract::Recognizer& recognizer, const EvalParams& params) {
  if (manifest.empty()) throw Error(ErrorKind::EmptyManifest, "manifest has no samples");
  for (const auto& rec : manifest) layout::find_layout(layouts, rec.cls);
  params.locator.validate();

  std::vector<SampleResult> results(manifest.size());
  parallel_for(manifest.size(), params.threads, [&](std::size_t i) {
    const auto start = std::chrono::steady_clock::now();
    const synth::SampleRecord& rec = manifest[i];
    SampleResult& s = results[i];
    s.image = rec.image;
    s.cls = rec.cls;
    const Image photo = raster::read_image(base_dir / rec.image);
    try {
      s.quad = locator::locate(photo, params.locator);
    } catch (const Error& e) {
      if (e.kind() == ErrorKind::IoError) throw;
      s.failure = e.what();
    }
    if (s.quad) {
      double worst = 0;
      for (int k = 0; k < 4; ++k)
        worst = std::max(worst, std::hypot(s.quad->v[k].x - rec.quad.v[k].x, s.quad->v[k].y - rec.quad.v[k].y));
      s.vertex_error = worst / rec.quad.shortest_side();
      s.located = vertex_correct(*s.quad, rec.quad, params.criterion);
    }
    // Downstream stages run only after a successful location.
    if (s.located) {
      extract::ReaderConfig rc;
      rc.locator = params.locator;
      rc.rectified_width = params.rectified_width;
      const auto pred = classifier::classify(model, classifier::preprocess(photo, *s.quad, model.input_shape()[0]));
      s.predicted = pred.label;
      const auto read = extract::read_fields(photo, *s.quad, layout::find_layout(layouts, pred.label), recognizer, rc);
      for (const auto& [name, truth] : rec.fields) {
        ++s.fields_total;
        const auto it = read.find(name);
        if (it != read.end() && normalize_field(it->second.text) == normalize_field(truth)) ++s.fields_correct;
      }
    }
    s.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  });
  return aggregate(std::move(results));
}

std::vector<BreakdownRow> error_breakdown(const EvalReport& report) {
  std::vector<BreakdownRow> rows;
  for (DocumentClass c : kAllClasses) {
    const auto it = report.per_class.find(c);
    const ClassFieldStats st = it == report.per_class.end() ? ClassFieldStats{} : it->second;
    BreakdownRow row{c, st.fields_total, st.fields_wrong, std::nullopt};
    if (st.located > 0 && st.fields_total > 0) row.percent = 100.0 * st.fields_wrong / st.fields_total;
    else if (st.located > 0) row.percent = 0.0;
    rows.push_back(row);
  }
  return rows;
}

namespace {

nlohmann::ordered_json opt(const std::optional<double>& v) {
  return v ? nlohmann::ordered_json(*v) : nlohmann::ordered_json(nullptr);
}

std::string fmt(double v) {
  char b[32];
  std::snprintf(b, sizeof b, "%.6f", v);
  return b;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::IoError, "cannot write " + path.string());
  out << text;
  if (!out) throw Error(ErrorKind::IoError, "failed writing " + path.string());
}

}  // namespace

std::string report_to_json(const EvalReport& report) {
  nlohmann::ordered_json j;
  j["n_samples"] = report.n_samples;
  j["n_located"] = report.n_located;
  j["vertex_success_rate"] = report.vertex_success_rate();
  j["classification_accuracy"] = opt(report.classification_accuracy());
  j["field_accuracy"] = opt(report.field_accuracy());
  auto per_class = nlohmann::ordered_json::object();
  for (const auto& row : error_breakdown(report)) per_class[std::string(class_name(row.cls))] = opt(row.percent);
  j["per_class_field_error"] = per_class;
  auto samples = nlohmann::ordered_json::array();
  for (const auto& s : report.samples) {
    nlohmann::ordered_json o;
    o["image"] = s.image;
    o["class"] = code(s.cls);
    o["located"] = s.located;
    o["vertex_error"] = opt(s.vertex_error);
    o["predicted"] = s.predicted ? nlohmann::ordered_json(code(*s.predicted)) : nlohmann::ordered_json(nullptr);
    o["fields_total"] = s.fields_total;
    o["fields_correct"] = s.fields_correct;
    if (!s.failure.empty()) o["failure"] = s.failure;
    samples.push_back(o);
  }
  j["samples"] = samples;
  return j.dump(2) + "\n";
}

void write_samples_csv(const std::filesystem::path& path, const EvalReport& report, bool timing) {
  std::string text = "image,class,located,vertex_error,predicted,fields_total,fields_correct";
  text += timing ? ",seconds\n" : "\n";
  for (const auto& s : report.samples) {
    text += s.image + "," + std::string(class_name(s.cls)) + "," + (s.located ? "1" : "0") + "," +
            (s.vertex_error ? fmt(*s.vertex_error) : "") + "," +
            (s.predicted ? std::string(class_name(*s.predicted)) : "") + "," + std::to_string(s.fields_total) + "," +
            std::to_string(s.fields_correct);
    text += timing ? "," + fmt(s.seconds) + "\n" : "\n";
  }
  write_text(path, text);
}

void write_breakdown_csv(const std::filesystem::path& path, const std::vector<BreakdownRow>& rows) {
  std::string text = "class,fields_total,fields_wrong,percent\n";
  for (const auto& r : rows)
    text += std::string(class_name(r.cls)) + "," + std::to_string(r.fields_total) + "," +
            std::to_string(r.fields_wrong) + "," + (r.percent ? fmt(*r.percent) : "") + "\n";
  write_text(path, text);
}

}  // namespace idread::eval
