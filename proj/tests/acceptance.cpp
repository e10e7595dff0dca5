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


// Acceptance run: one PASS/FAIL line per criterion, tolerances fixed below.
// Exit status is 0 only when every binding criterion passes.
//
//   acceptance [--only 1,4,7] [--workdir DIR] [--threads N]

#include <sys/wait.h>

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <thread>

#include "CLI11.hpp"
#include "idread/classifier.hpp"
#include "idread/evalharness.hpp"
#include "idread/extractor.hpp"
#include "idread/locator.hpp"
#include "idread/synthgen.hpp"
#include "idread/tensornet.hpp"
#include "oracles.hpp"

namespace fs = std::filesystem;
using namespace idread;

namespace {

// Tolerances and budgets.
constexpr double kParamCountBudgetS = 1.0;
constexpr double kGradientTolerance = 1e-5;
constexpr double kGradientBudgetS = 30.0;
constexpr double kGoodnessBudgetS = 10.0;
constexpr double kLn9Tolerance = 1e-9;
constexpr double kSoftmaxTolerance = 1e-6;
constexpr int kClassifierTrain = 900;
constexpr int kClassifierHeldOut = 90;
constexpr int kClassifierEpochs = 10;  // fixed; no early stopping
constexpr double kHeldOutFloor = 0.97;
constexpr double kClassifierBudgetS = 30 * 60.0;
constexpr int kPipelineSamples = 180;
constexpr double kVertexLow = 0.55, kVertexHigh = 0.95;
constexpr double kClassificationFloor = 0.98;
constexpr double kFieldFloor = 0.85;
constexpr double kPipelineBudgetS = 15 * 60.0;
constexpr int kFiscalPersons = 50;
constexpr double kLatencyBudgetMs = 100.0;

// Seeds, one per dataset.
constexpr std::uint64_t kTrainSeed = 101, kHeldOutSeed = 202, kModelSeed = 5, kPipelineSeed = 303;

struct Outcome {
  bool pass = false;
  std::string detail;
};

struct Context {
  fs::path work;
  unsigned threads = 1;
  std::optional<classifier::Model> model;  // trained by criterion 5, reused by 6
};

using Clock = std::chrono::steady_clock;
double since(Clock::time_point t) { return std::chrono::duration<double>(Clock::now() - t).count(); }

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

Outcome param_counts(Context&) {
  const auto t0 = Clock::now();
  const struct {
    int blocks, filters;
    const char* paper;
  } rows[] = {{1, 8, "0.72M"}, {1, 16, "1.4M"}, {2, 8, "0.18M"}, {2, 16, "0.37M"}, {3, 8, "49k"}, {3, 16, "0.10M"}};
  int ok = 0;
  std::string misses;
  for (const auto& r : rows) {
    const std::string got = nn::format_param_count(nn::param_count(r.blocks, r.filters));
    if (got == r.paper)
      ++ok;
    else
      misses += " (" + std::to_string(r.blocks) + "," + std::to_string(r.filters) + ")=" + got;
  }
  const double s = since(t0);
  return {ok == 6 && s < kParamCountBudgetS, std::to_string(ok) + "/6 rows match" + misses + ", " + fmt("%.3f s", s)};
}

Outcome gradients(Context&) {
  const auto t0 = Clock::now();
  const double e1 = oracle::max_gradient_error(1, 11), e2 = oracle::max_gradient_error(2, 12);
  const double s = since(t0);
  return {e1 < kGradientTolerance && e2 < kGradientTolerance && s < kGradientBudgetS,
          "max relative error " + fmt("%.2e", e1) + " (N_b=1), " + fmt("%.2e", e2) + " (N_b=2), " + fmt("%.1f s", s)};
}

Outcome goodness_oracle(Context&) {
  const auto t0 = Clock::now();
  constexpr double d = 1.5;
  std::mt19937_64 rng(2024);
  int equal = 0;
  for (int n = 0; n < 100; ++n) {
    const auto m = oracle::random_mask(rng, 32, 32, 0.4);
    const auto q = oracle::random_quad_in(rng, 32, 32);
    const double naive = oracle::naive_goodness(m, q, d);
    equal += locator::goodness(m, q, d) == naive && locator::GoodnessEvaluator(m, d)(q) == naive;
  }
  // Growing the region by a set of pixels changes c by d * (newly covered
  // non-selected) - (newly covered selected).
  int increments = 0, increment_ok = 0;
  std::uniform_real_distribution<double> grow(1.0, 1.4);
  while (increments < 100) {
    const auto m = oracle::random_mask(rng, 32, 32, 0.5);
    const auto inner = oracle::random_quad_in(rng, 32, 32);
    const auto c = inner.centroid();
    raster::Quad outer = inner;
    for (auto& v : outer.v) {
      const double s = grow(rng);
      v = {c.x + (v.x - c.x) * s, c.y + (v.y - c.y) * s};
    }
    if (!outer.valid()) continue;
    int sel = 0, unsel = 0;
    for (int y = 0; y < 32; ++y)
      for (int x = 0; x < 32; ++x) {
        const raster::Point p{x + 0.5, y + 0.5};
        if (raster::point_in_quad(p, outer) && !raster::point_in_quad(p, inner)) (m.at(x, y) ? sel : unsel)++;
      }
    ++increments;
    increment_ok += locator::goodness(m, outer, d) - locator::goodness(m, inner, d) == d * unsel - sel;
  }
  const double s = since(t0);
  return {equal == 100 && increment_ok == increments && s < kGoodnessBudgetS,
          std::to_string(equal) + "/100 exact, increment rule " + std::to_string(increment_ok) + "/" +
              std::to_string(increments) + ", " + fmt("%.2f s", s)};
}

Outcome closed_forms(Context&) {
  double worst_ce = 0;
  const std::vector<double> uniform(9, 1.0 / 9);
  for (int k = 0; k < 9; ++k)
    worst_ce = std::max(worst_ce, std::abs(nn::cross_entropy<double>(uniform, nn::one_hot<double>(k, 9)) - std::log(9.0)));
  std::mt19937_64 rng(8);
  std::normal_distribution<double> n(0, 10);
  double worst_sum = 0;
  for (int k = 0; k < 1000; ++k) {
    std::vector<double> logits(9);
    for (auto& v : logits) v = n(rng);
    double s = 0;
    for (double p : nn::softmax<double>(logits)) s += p;
    worst_sum = std::max(worst_sum, std::abs(s - 1));
  }
  return {worst_ce <= kLn9Tolerance && worst_sum <= kSoftmaxTolerance,
          "|CE - ln 9| = " + fmt("%.1e", worst_ce) + ", max |sum p - 1| = " + fmt("%.1e", worst_sum)};
}

std::vector<classifier::LabeledImage> load_labeled(const fs::path& dir, const std::vector<synth::SampleRecord>& recs) {
  std::vector<classifier::LabeledImage> out;
  out.reserve(recs.size());
  for (const auto& r : recs) out.push_back({raster::read_image(dir / r.image), r.cls});
  return out;
}

Outcome classifier_run(Context& ctx) {
  const auto t0 = Clock::now();
  synth::SynthConfig sc;
  sc.threads = ctx.threads;
  const auto train_dir = ctx.work / "classifier_train", held_dir = ctx.work / "classifier_heldout";
  const auto tr = synth::gen_dataset(synth::DatasetKind::Classifier, kClassifierTrain, kTrainSeed, train_dir, sc);
  const auto ho = synth::gen_dataset(synth::DatasetKind::Classifier, kClassifierHeldOut, kHeldOutSeed, held_dir, sc);
  const double gen_s = since(t0);

  classifier::TrainConfig tc;
  tc.epochs = kClassifierEpochs;
  tc.seed = kModelSeed;
  tc.threads = ctx.threads;
  const classifier::ModelConfig mc{2, 8};
  auto result = classifier::train(load_labeled(train_dir, tr), tc, mc);
  const auto eval = classifier::evaluate_classifier(result.model, load_labeled(held_dir, ho), ctx.threads);
  ctx.model = std::move(result.model);
  const double s = since(t0);
  return {eval.accuracy >= kHeldOutFloor && s <= kClassifierBudgetS,
          "held-out accuracy " + fmt("%.4f", eval.accuracy) + " (mean CE " + fmt("%.2e", eval.mean_ce) + ") after " +
              std::to_string(kClassifierEpochs) + " epochs, final train CE " +
              fmt("%.2e", result.history.back().mean_ce) + ", " + fmt("%.0f s", s) + " (generation " +
              fmt("%.0f s", gen_s) + ")"};
}

Outcome pipeline_run(Context& ctx) {
  if (!ctx.model) return {false, "no classifier model (criterion 5 did not run)"};
  const auto t0 = Clock::now();
  synth::SynthConfig sc;
  sc.threads = ctx.threads;
  const auto dir = ctx.work / "pipeline";
  const auto manifest = synth::gen_dataset(synth::DatasetKind::Main, kPipelineSamples, kPipelineSeed, dir, sc);
  eval::EvalParams ep;
  ep.threads = ctx.threads;
  const auto layouts = layout::default_registry();
  const extract::TemplateRecognizer recognizer;
  const auto report = eval::evaluate_pipeline(manifest, dir, *ctx.model, layouts, recognizer, ep);
  const double s = since(t0);

  // Downstream stages must have run for located samples only.
  bool accounting = report.n_samples == kPipelineSamples;
  int located = 0;
  for (std::size_t i = 0; i < report.samples.size(); ++i) {
    const auto& r = report.samples[i];
    located += r.located;
    if (r.located)
      accounting &= r.predicted.has_value() && r.fields_total == static_cast<int>(manifest[i].fields.size());
    else
      accounting &= !r.predicted && r.fields_total == 0;
  }
  accounting &= located == report.n_located;

  const double vr = report.vertex_success_rate();
  const double ca = report.classification_accuracy().value_or(0.0);
  const double fa = report.field_accuracy().value_or(0.0);
  const bool pass = vr >= kVertexLow && vr <= kVertexHigh && ca >= kClassificationFloor && fa >= kFieldFloor &&
                    accounting && s <= kPipelineBudgetS;
  return {pass, "vertex rate " + fmt("%.4f", vr) + " (" + std::to_string(report.n_located) + "/" +
                    std::to_string(report.n_samples) + "), classification " + fmt("%.4f", ca) + ", fields " +
                    fmt("%.4f", fa) + " (" + std::to_string(report.fields_correct) + "/" +
                    std::to_string(report.fields_total) + "), accounting " + (accounting ? "ok" : "BROKEN") + ", " +
                    fmt("%.0f s", s)};
}

Outcome fiscal_oracle(Context&) {
  Rng rng = derive_rng(77, 0);
  int ok = 0, females = 0, female_rule = 0;
  for (int i = 0; i < kFiscalPersons; ++i) {
    const auto p = synth::gen_person(rng, synth::default_lists(), DocumentClass::HealthCardFront);
    const auto want = oracle::oracle_fiscal_code(p.surname, p.name, p.sex, p.birthdate.year, p.birthdate.month,
                                                 p.birthdate.day, p.birthplace.code);
    ok += p.fiscal_code == want;
    if (p.sex == 'F') {
      ++females;
      female_rule += std::stoi(p.fiscal_code.substr(9, 2)) == p.birthdate.day + 40;
    }
  }
  return {ok == kFiscalPersons && females > 0 && female_rule == females,
          std::to_string(ok) + "/" + std::to_string(kFiscalPersons) + " match, female day rule " +
              std::to_string(female_rule) + "/" + std::to_string(females)};
}

// --- CLI determinism ---

int shell(const std::string& args, std::string* out = nullptr) {
  const std::string cmd = std::string(IDREAD_CLI) + " " + args + " 2>/dev/null";
  FILE* p = popen(cmd.c_str(), "r");
  if (!p) return -1;
  std::string text;
  char buf[4096];
  for (std::size_t n; (n = fread(buf, 1, sizeof buf, p)) > 0;) text.append(buf, n);
  const int status = pclose(p);
  if (out) *out = text;
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Every regular file under `a` has a byte-identical twin under `b` and vice versa.
bool same_tree(const fs::path& a, const fs::path& b) {
  std::vector<fs::path> fa, fb;
  for (const auto& e : fs::recursive_directory_iterator(a))
    if (e.is_regular_file()) fa.push_back(fs::relative(e.path(), a));
  for (const auto& e : fs::recursive_directory_iterator(b))
    if (e.is_regular_file()) fb.push_back(fs::relative(e.path(), b));
  std::sort(fa.begin(), fa.end());
  std::sort(fb.begin(), fb.end());
  if (fa.empty() || fa != fb) return false;
  return std::all_of(fa.begin(), fa.end(), [&](const fs::path& r) { return slurp(a / r) == slurp(b / r); });
}

Outcome cli_determinism(Context& ctx) {
  const auto t0 = Clock::now();
  const auto w = ctx.work / "cli";
  fs::remove_all(w);
  fs::create_directories(w);
  const auto p = [&](const std::string& name) { return (w / name).string(); };
  const std::string par = " --threads 3", ser = " --threads 1";
  std::vector<std::string> failed;
  int checked = 0;
  auto expect = [&](bool ok, const std::string& what) {
    ++checked;
    if (!ok) failed.push_back(what);
  };

  for (const char* kind : {"main", "classifier", "ocr"}) {
    const std::string cmd = std::string("gen --kind ") + kind + " --count 9 --seed 21 --out ";
    const bool ran = shell(cmd + p(std::string(kind) + "1") + ser) == 0 && shell(cmd + p(std::string(kind) + "3") + par) == 0;
    expect(ran && same_tree(w / (std::string(kind) + "1"), w / (std::string(kind) + "3")), std::string("gen ") + kind);
  }

  const std::string train = "train --dataset " + p("classifier1") + " --epochs 2 --batch-size 4 --seed 3";
  const bool trained = shell(train + " --out " + p("m1.idrn") + " --history " + p("h1.csv") + ser) == 0 &&
                       shell(train + " --out " + p("m3.idrn") + " --history " + p("h3.csv") + par) == 0;
  expect(trained && slurp(w / "m1.idrn") == slurp(w / "m3.idrn") && slurp(w / "h1.csv") == slurp(w / "h3.csv"),
         "train");

  const auto first = synth::read_manifest(w / "main1" / synth::kManifestName).at(0);
  const std::string photo = (w / "main1" / first.image).string();
  for (const std::string& cmd :
       {"locate --seed 4 --input " + photo, "classify --seed 4 --input " + photo + " --model " + p("m1.idrn"),
        "read --seed 4 --input " + photo + " --model " + p("m1.idrn")}) {
    std::string a, b;
    const bool ran = shell(cmd + ser, &a) == 0 && shell(cmd + par, &b) == 0;
    expect(ran && !a.empty() && a == b, cmd.substr(0, cmd.find(' ')));
  }

  const std::string ev = "eval --dataset " + p("main1") + " --model " + p("m1.idrn") + " --report ";
  const bool evaluated = shell(ev + p("r1.json") + ser) == 0 && shell(ev + p("r3.json") + par) == 0;
  expect(evaluated && slurp(w / "r1.json") == slurp(w / "r3.json") &&
             slurp(w / "r1_samples.csv") == slurp(w / "r3_samples.csv") &&
             slurp(w / "r1_breakdown.csv") == slurp(w / "r3_breakdown.csv"),
         "eval");

  std::string detail = std::to_string(checked - static_cast<int>(failed.size())) + "/" + std::to_string(checked) +
                       " commands byte-identical serial vs 3 threads";
  for (const auto& f : failed) detail += "; differs: " + f;
  return {failed.empty(), detail + ", " + fmt("%.0f s", since(t0))};
}

Outcome latency(Context& ctx) {
  Rng rng(1);
  const classifier::Model model = ctx.model ? *ctx.model : classifier::make_model({2, 8}, rng);
  nn::Tensor<float> x({200, 200, 3}, 0.5f);
  classifier::classify(model, x);  // warm-up
  std::vector<double> ms;
  for (int i = 0; i < 11; ++i) {
    const auto t0 = Clock::now();
    classifier::classify(model, x);
    ms.push_back(since(t0) * 1000);
  }
  std::nth_element(ms.begin(), ms.begin() + 5, ms.end());
  return {ms[5] <= kLatencyBudgetMs, "median forward pass " + fmt("%.1f ms", ms[5])};
}

struct Criterion {
  int id;
  const char* name;
  bool binding;
  std::function<Outcome(Context&)> run;
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"idread acceptance run"};
  std::vector<int> only;
  std::string workdir = (fs::temp_directory_path() / "idread_acceptance").string();
  unsigned threads = std::max(1u, std::thread::hardware_concurrency());
  app.add_option("--only", only, "Criteria to run (default: all)")->delimiter(',');
  app.add_option("--workdir", workdir, "Scratch directory");
  app.add_option("--threads", threads, "Worker threads");
  CLI11_PARSE(app, argc, argv);

  const std::vector<Criterion> criteria{
      {1, "published parameter counts", true, param_counts},
      {2, "gradient check", true, gradients},
      {3, "goodness oracle equivalence", true, goodness_oracle},
      {4, "closed-form loss checks", true, closed_forms},
      {5, "classifier held-out accuracy", true, classifier_run},
      {6, "end-to-end pipeline", true, pipeline_run},
      {7, "fiscal-code oracle", true, fiscal_oracle},
      {8, "CLI determinism", true, cli_determinism},
      {9, "prediction latency (non-binding)", false, latency},
  };

  Context ctx{workdir, threads, std::nullopt};
  fs::create_directories(ctx.work);
  bool all = true;
  for (const auto& c : criteria) {
    if (!only.empty() && std::find(only.begin(), only.end(), c.id) == only.end()) continue;
    Outcome o;
    try {
      o = c.run(ctx);
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    std::cout << (o.pass ? "PASS" : "FAIL") << "  " << c.id << "  " << c.name << ": " << o.detail << std::endl;
    if (c.binding) all &= o.pass;
  }
  return all ? 0 : 1;
}
