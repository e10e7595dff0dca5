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


// idread command-line front end: dataset generation, training, single-image
// operations and evaluation.
//
// Exit codes: 0 success, 2 usage error, 3 I/O error, 4 processing failure.

#include <algorithm>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include "CLI11.hpp"
#include "idread/classifier.hpp"
#include "idread/evalharness.hpp"
#include "idread/extractor.hpp"
#include "idread/layout.hpp"
#include "idread/locator.hpp"
#include "idread/synthgen.hpp"
#include "json.hpp"

namespace {

using namespace idread;
using raster::Image;
using raster::Quad;
using json = nlohmann::json;
using ojson = nlohmann::ordered_json;

constexpr int kExitUsage = 2;
constexpr int kExitIo = 3;
constexpr int kExitFailure = 4;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Everything a command can be configured with. A --config file is applied
// first; explicit flags win over it.
struct CliConfig {
  std::filesystem::path layouts;  // empty: built-in registry
  std::filesystem::path lists;    // empty: bundled lists
  locator::LocatorParams locator;
  synth::DegradationParams degradation;
  int photo_width = 1600, photo_height = 1200;
  classifier::TrainConfig train;
  classifier::ModelConfig model;
  std::uint64_t seed = 0;
  unsigned threads = 1;
};

template <typename T>
void take(const json& obj, const char* key, T& dst) {
  if (obj.contains(key)) dst = obj.at(key).get<T>();
}

void check_keys(const json& obj, std::initializer_list<const char*> keys, const std::string& where) {
  if (!obj.is_object()) throw UsageError("config: " + where + " must be an object");
  for (const auto& [k, v] : obj.items()) {
    if (std::find_if(keys.begin(), keys.end(), [&](const char* s) { return k == s; }) == keys.end())
      throw UsageError("config: unknown key '" + where + k + "'");
  }
}

void apply_config_file(const std::filesystem::path& path, CliConfig& cfg) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::IoError, "cannot read config " + path.string());
  json j;
  try {
    j = json::parse(in);
    check_keys(j, {"layouts", "lists", "locator", "degradation", "photo_width", "photo_height", "train", "model", "seed",
                   "threads"},
               "");
    const auto base = path.parent_path();
    if (j.contains("layouts")) cfg.layouts = base / j.at("layouts").get<std::string>();
    if (j.contains("lists")) cfg.lists = base / j.at("lists").get<std::string>();
    if (j.contains("locator")) {
      const auto& l = j.at("locator");
      check_keys(l, {"samples", "initial_threshold", "weight", "outer_frac", "inner_frac", "stop_frac", "step_px"},
                 "locator.");
      take(l, "samples", cfg.locator.samples);
      take(l, "initial_threshold", cfg.locator.initial_threshold);
      take(l, "weight", cfg.locator.weight);
      take(l, "outer_frac", cfg.locator.outer_frac);
      take(l, "inner_frac", cfg.locator.inner_frac);
      take(l, "stop_frac", cfg.locator.stop_frac);
      take(l, "step_px", cfg.locator.step_px);
    }
    if (j.contains("degradation")) {
      const auto& d = j.at("degradation");
      check_keys(d, {"persp_min", "persp_max", "alpha_min", "alpha_max", "beta_min", "beta_max", "noise_sigma",
                     "jpeg_quality"},
                 "degradation.");
      take(d, "persp_min", cfg.degradation.persp_min);
      take(d, "persp_max", cfg.degradation.persp_max);
      take(d, "alpha_min", cfg.degradation.alpha_min);
      take(d, "alpha_max", cfg.degradation.alpha_max);
      take(d, "beta_min", cfg.degradation.beta_min);
      take(d, "beta_max", cfg.degradation.beta_max);
      take(d, "noise_sigma", cfg.degradation.noise_sigma);
      take(d, "jpeg_quality", cfg.degradation.jpeg_quality);
    }
    take(j, "photo_width", cfg.photo_width);
    take(j, "photo_height", cfg.photo_height);
    if (j.contains("train")) {
      check_keys(j.at("train"), {"epochs", "batch_size"}, "train.");
      take(j.at("train"), "epochs", cfg.train.epochs);
      take(j.at("train"), "batch_size", cfg.train.batch_size);
    }
    if (j.contains("model")) {
      check_keys(j.at("model"), {"blocks", "filters"}, "model.");
      take(j.at("model"), "blocks", cfg.model.blocks);
      take(j.at("model"), "filters", cfg.model.filters);
    }
    take(j, "seed", cfg.seed);
    take(j, "threads", cfg.threads);
  } catch (const json::exception& e) {
    throw UsageError("config " + path.string() + ": " + e.what());
  }
}

layout::Registry registry(const CliConfig& cfg) {
  return cfg.layouts.empty() ? layout::default_registry() : layout::load_registry(cfg.layouts);
}

Quad parse_quad(const std::string& text) {
  std::vector<double> v;
  std::stringstream ss(text);
  for (std::string item; std::getline(ss, item, ',');) {
    try {
      v.push_back(std::stod(item));
    } catch (const std::exception&) {
      throw UsageError("--quad expects 8 comma-separated numbers");
    }
  }
  if (v.size() != 8) throw UsageError("--quad expects 8 comma-separated numbers");
  return Quad{{raster::Point{v[0], v[1]}, {v[2], v[3]}, {v[4], v[5]}, {v[6], v[7]}}};
}

ojson quad_json(const Quad& q) {
  ojson a = ojson::array();
  for (const auto& p : q.v) a.push_back({p.x, p.y});
  return a;
}

std::vector<classifier::LabeledImage> load_labeled(const std::filesystem::path& dir, int size) {
  const auto records = synth::read_manifest(dir / synth::kManifestName);
  if (records.empty()) throw Error(ErrorKind::EmptyDataset, "no samples in " + dir.string());
  std::vector<classifier::LabeledImage> out;
  out.reserve(records.size());
  for (const auto& r : records)
    out.push_back({raster::warp_perspective(raster::read_image(dir / r.image), r.quad, size, size), r.cls});
  return out;
}

int run(int argc, char** argv) {
  CLI::App app{"idread: identity document localization, classification and reading"};
  app.require_subcommand(1);
  CliConfig cfg;
  std::string config_path;
  std::uint64_t seed = 0;
  unsigned threads = 1;
  app.add_option("--config", config_path, "JSON configuration file");
  app.add_option("--seed", seed, "Seed for every random choice");
  app.add_option("--threads", threads, "Worker threads (0 = all cores)");

  // gen
  auto* gen = app.add_subcommand("gen", "Generate a labeled synthetic dataset");
  std::string kind = "main", out_dir;
  int count = 0;
  bool debug_png = false;
  gen->add_option("--kind", kind, "main, classifier or ocr")->check(CLI::IsMember({"main", "classifier", "ocr"}));
  gen->add_option("--count", count, "Number of samples (documents for ocr)")->required()->check(CLI::PositiveNumber);
  gen->add_option("--out", out_dir, "Output directory")->required();
  gen->add_flag("--debug-png", debug_png, "Also write the undegraded composites");

  // train
  auto* trn = app.add_subcommand("train", "Train the document classifier");
  std::string dataset, model_out, history, validation;
  std::optional<int> epochs, batch_size, blocks, filters;
  trn->add_option("--dataset", dataset, "Dataset directory with manifest.jsonl")->required();
  trn->add_option("--epochs", epochs, "Training epochs (default 239)")->check(CLI::PositiveNumber);
  trn->add_option("--batch-size", batch_size, "Minibatch size (default 32)")->check(CLI::PositiveNumber);
  trn->add_option("--blocks", blocks, "Convolutional blocks N_b (default 2)")->check(CLI::PositiveNumber);
  trn->add_option("--filters", filters, "Filters N_f of the first block (default 8)")->check(CLI::PositiveNumber);
  trn->add_option("--out", model_out, "Model file to write")->required();
  trn->add_option("--history", history, "Per-epoch CSV (epoch,mean_ce,accuracy)");
  trn->add_option("--validation", validation, "Held-out dataset directory to score after training");

  // locate / classify / read
  std::string input, model_path, layouts_path, quad_text;
  auto* loc = app.add_subcommand("locate", "Find the document quadrilateral in a photo");
  loc->add_option("--input", input, "Photo")->required();
  auto* cls = app.add_subcommand("classify", "Classify the document in a photo");
  cls->add_option("--input", input, "Photo")->required();
  cls->add_option("--model", model_path, "Model file")->required();
  cls->add_option("--quad", quad_text, "Known quad x0,y0,...,x3,y3 (skips locating)");
  auto* rd = app.add_subcommand("read", "Locate, classify and read a document");
  rd->add_option("--input", input, "Photo")->required();
  rd->add_option("--model", model_path, "Model file")->required();
  rd->add_option("--layouts", layouts_path, "Layout registry JSON");
  rd->add_option("--quad", quad_text, "Known quad x0,y0,...,x3,y3 (skips locating)");

  // eval
  auto* ev = app.add_subcommand("eval", "Score the pipeline over a main dataset");
  std::string report_path;
  bool timing = false;
  ev->add_option("--dataset", dataset, "Dataset directory with manifest.jsonl")->required();
  ev->add_option("--model", model_path, "Model file")->required();
  ev->add_option("--layouts", layouts_path, "Layout registry JSON");
  ev->add_option("--report", report_path, "Report JSON; CSVs are written beside it")->required();
  ev->add_flag("--timing", timing, "Add a wall-clock column to the per-sample CSV");

  for (auto* sub : {gen, trn, loc, cls, rd, ev}) {
    sub->add_option("--seed", seed, "Seed");
    sub->add_option("--threads", threads, "Worker threads (0 = all cores)");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    // One diagnostic line, then the usage text of the command at fault.
    std::cerr << "error: " << e.what() << "\n";
    std::cerr << (app.get_subcommands().empty() ? app.help() : app.get_subcommands().front()->help());
    return kExitUsage;
  }

  if (!config_path.empty()) apply_config_file(config_path, cfg);
  auto given = [&](const char* name) {
    if (app.get_option(name)->count() > 0) return true;
    for (auto* sub : app.get_subcommands())
      if (auto* o = sub->get_option_no_throw(name); o && o->count() > 0) return true;
    return false;
  };
  if (given("--seed")) cfg.seed = seed;
  if (given("--threads")) cfg.threads = threads;
  if (!layouts_path.empty()) cfg.layouts = layouts_path;
  cfg.locator.seed = cfg.seed;
  cfg.locator.threads = cfg.threads;

  if (gen->parsed()) {
    synth::SynthConfig sc;
    if (!cfg.lists.empty()) sc.lists = synth::NameLists::load(cfg.lists);
    sc.layouts = registry(cfg);
    sc.degradation = cfg.degradation;
    sc.photo_width = cfg.photo_width;
    sc.photo_height = cfg.photo_height;
    sc.debug_png = debug_png;
    sc.threads = cfg.threads;
    const auto recs = synth::gen_dataset(synth::dataset_kind_from_name(kind), count, cfg.seed, out_dir, sc);
    std::cout << ojson{{"samples", recs.size()}, {"manifest", (std::filesystem::path(out_dir) / synth::kManifestName).string()}}.dump()
              << "\n";
    return 0;
  }

  if (trn->parsed()) {
    if (epochs) cfg.train.epochs = *epochs;
    if (batch_size) cfg.train.batch_size = *batch_size;
    if (blocks) cfg.model.blocks = *blocks;
    if (filters) cfg.model.filters = *filters;
    cfg.train.seed = cfg.seed;
    cfg.train.threads = cfg.threads;
    const auto data = load_labeled(dataset, cfg.model.input_size);
    const auto result = classifier::train(data, cfg.train, cfg.model, [](const classifier::EpochStats& s) {
      std::cerr << "epoch " << s.epoch << " mean_ce " << s.mean_ce << " accuracy " << s.accuracy << "\n";
    });
    classifier::save_model(result.model, model_out);
    if (!history.empty()) classifier::write_history_csv(history, result.history);
    ojson out{{"model", model_out}, {"epochs", cfg.train.epochs},
              {"train_accuracy", result.history.back().accuracy}, {"train_mean_ce", result.history.back().mean_ce}};
    if (!validation.empty()) {
      const auto held = load_labeled(validation, cfg.model.input_size);
      const auto e = classifier::evaluate_classifier(result.model, held, cfg.threads);
      out["validation_accuracy"] = e.accuracy;
      out["validation_mean_ce"] = e.mean_ce;
    }
    std::cout << out.dump() << "\n";
    return 0;
  }

  if (loc->parsed()) {
    const Image photo = raster::read_image(input);
    std::cout << ojson{{"quad", quad_json(locator::locate(photo, cfg.locator))}}.dump() << "\n";
    return 0;
  }

  if (cls->parsed()) {
    const Image photo = raster::read_image(input);
    const auto model = classifier::load_model(model_path);
    const Quad q = quad_text.empty() ? locator::locate(photo, cfg.locator) : parse_quad(quad_text);
    const auto p = classifier::classify(model, classifier::preprocess(photo, q, model.input_shape()[0]));
    std::cout << ojson{{"class", code(p.label)}, {"class_name", class_name(p.label)}, {"probs", p.probabilities},
                       {"quad", quad_json(q)}}
                     .dump()
              << "\n";
    return 0;
  }

  if (rd->parsed()) {
    const Image photo = raster::read_image(input);
    const auto model = classifier::load_model(model_path);
    const auto layouts = registry(cfg);
    const extract::TemplateRecognizer recognizer;
    extract::ReaderConfig rc;
    rc.locator = cfg.locator;
    rc.threads = cfg.threads;
    const auto readout = quad_text.empty()
                             ? extract::read_document(photo, model, layouts, recognizer, rc)
                             : extract::read_document_at(photo, parse_quad(quad_text), model, layouts, recognizer, rc);
    std::cout << extract::readout_to_json(readout);
    return 0;
  }

  if (ev->parsed()) {
    const auto manifest = synth::read_manifest(std::filesystem::path(dataset) / synth::kManifestName);
    const auto model = classifier::load_model(model_path);
    const extract::TemplateRecognizer recognizer;
    eval::EvalParams ep;
    ep.locator = cfg.locator;
    ep.locator.threads = 1;  // parallelism is across samples
    ep.threads = cfg.threads;
    const auto report = eval::evaluate_pipeline(manifest, dataset, model, registry(cfg), recognizer, ep);
    const std::filesystem::path rp(report_path);
    const std::string json_text = eval::report_to_json(report);
    raster::write_file(rp, std::span(reinterpret_cast<const std::uint8_t*>(json_text.data()), json_text.size()));
    const auto stem = rp.parent_path() / rp.stem();
    eval::write_samples_csv(stem.string() + "_samples.csv", report, timing);
    eval::write_breakdown_csv(stem.string() + "_breakdown.csv", eval::error_breakdown(report));
    auto opt = [](const std::optional<double>& v) { return v ? ojson(*v) : ojson(nullptr); };
    std::cout << ojson{{"n_samples", report.n_samples},
                       {"vertex_success_rate", report.vertex_success_rate()},
                       {"classification_accuracy", opt(report.classification_accuracy())},
                       {"field_accuracy", opt(report.field_accuracy())}}
                     .dump()
              << "\n";
    return 0;
  }
  return kExitUsage;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    switch (e.kind()) {
      case ErrorKind::IoError:
      case ErrorKind::FormatError:
      case ErrorKind::MalformedStream: return kExitIo;
      case ErrorKind::InvalidArgument:
      case ErrorKind::UnsupportedConfig: return kExitUsage;
      default: return kExitFailure;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitFailure;
  }
}
