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
#include <fstream>
#include <numeric>

#include "doctest.h"
#include "idread/classifier.hpp"
#include "support.hpp"

using namespace idread;
using namespace idread::classifier;
using idread::testing::expect_error;
using idread::testing::scratch_dir;

namespace {

// One image per class: a class-specific stripe pattern plus mild noise.
std::vector<LabeledImage> toy_dataset(int size, int per_class, std::uint64_t seed) {
  std::vector<LabeledImage> out;
  Rng rng = derive_rng(seed, 0);
  std::uniform_int_distribution<int> noise(-12, 12);
  for (int rep = 0; rep < per_class; ++rep)
    for (DocumentClass cls : kAllClasses) {
      const int c = code(cls);
      Image img(size, size);
      for (int y = 0; y < size; ++y)
        for (int x = 0; x < size; ++x) {
          const bool stripe = ((c < 5 ? x : y) / (1 + c % 5)) % 2 == 0;
          const int base = stripe ? 60 + 15 * c : 200 - 10 * c;
          const auto v = static_cast<std::uint8_t>(std::clamp(base + noise(rng), 0, 255));
          img.set(x, y, {v, static_cast<std::uint8_t>(c < 5 ? v : 255 - v), 128});
        }
      out.push_back({std::move(img), cls});
    }
  return out;
}

Model zero_model(int size) {
  Rng rng = derive_rng(0, 0);
  Model m = make_model({2, 8, size}, rng);
  for (auto& p : m.params()) std::fill(p.data.begin(), p.data.end(), 0.0f);
  return m;
}

}  // namespace

TEST_CASE("to_tensor and preprocess") {
  Image img(200, 200);
  for (int y = 0; y < 200; ++y)
    for (int x = 0; x < 200; ++x) img.set(x, y, {std::uint8_t(x), std::uint8_t(y), std::uint8_t((x + y) % 256)});
  const auto t = preprocess(img, Quad::rect(0, 0, 200, 200));
  CHECK(t.shape == std::vector<int>{200, 200, 3});
  bool exact = true;
  for (int y = 0; y < 200; ++y)
    for (int x = 0; x < 200; ++x)
      for (int k = 0; k < 3; ++k)
        exact = exact && t.data[(static_cast<std::size_t>(y) * 200 + x) * 3 + k] == img.pixel(x, y)[k] / 255.0f;
  CHECK(exact);

  const Image white(640, 480, {255, 255, 255});
  const auto w = preprocess(white, Quad::rect(100, 50, 500, 400));
  CHECK(std::all_of(w.data.begin(), w.data.end(), [](float v) { return v == 1.0f; }));

  // Checker pattern under a scaling quad: every output pixel center maps to
  // a source pixel center, so the warp is a pure 2x subsample.
  Image checker(400, 400);
  for (int y = 0; y < 400; ++y)
    for (int x = 0; x < 400; ++x) checker.set(x, y, ((x / 20 + y / 20) % 2) ? raster::Rgb{255, 255, 255} : raster::Rgb{});
  const auto c = preprocess(checker, Quad::rect(0, 0, 400, 400), 200);
  for (int y = 0; y < 200; y += 7)
    for (int x = 0; x < 200; x += 7) {
      const float expect = ((2 * x / 20 + 2 * y / 20) % 2) ? 1.0f : 0.0f;
      const float got = c.data[(static_cast<std::size_t>(y) * 200 + x) * 3];
      if ((2 * x + 1) % 20 != 19 && (2 * y + 1) % 20 != 19) CHECK(got == doctest::Approx(expect));
    }
}

TEST_CASE("classify") {
  const Model zero = zero_model(200);
  const auto p = classify(zero, preprocess(Image(300, 300, {10, 20, 30}), Quad::rect(0, 0, 300, 300)));
  CHECK(p.label == DocumentClass::PaperIdFront);
  REQUIRE(p.probabilities.size() == 9);
  for (float v : p.probabilities) CHECK(v == doctest::Approx(1.0 / 9).epsilon(1e-6));

  Rng rng = derive_rng(3, 0);
  const Model m = make_model({}, rng);
  const auto data = toy_dataset(200, 1, 4);
  for (const auto& s : data) {
    const auto q = classify(m, to_tensor(s.image));
    const double sum = std::accumulate(q.probabilities.begin(), q.probabilities.end(), 0.0);
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-6));
    const auto best = std::max_element(q.probabilities.begin(), q.probabilities.end()) - q.probabilities.begin();
    CHECK(code(q.label) == best);
  }
  expect_error(ErrorKind::ShapeMismatch, [&] { classify(m, to_tensor(Image(100, 100))); });
}

TEST_CASE("evaluate_classifier") {
  const auto data = toy_dataset(24, 2, 5);
  const auto e = evaluate_classifier(zero_model(24), data);
  CHECK(e.mean_ce == doctest::Approx(std::log(9.0)).epsilon(1e-6));  // float32 probabilities
  CHECK(e.accuracy == doctest::Approx(2.0 / 18));  // code 0 wins every tie
  expect_error(ErrorKind::EmptyDataset, [] { evaluate_classifier(zero_model(24), {}); });
}

TEST_CASE("training is deterministic and thread independent") {
  const auto data = toy_dataset(24, 3, 6);
  TrainConfig cfg;
  cfg.epochs = 4;
  cfg.batch_size = 8;
  cfg.seed = 17;
  const ModelConfig mc{2, 8, 24};
  const auto a = train(data, cfg, mc);
  const auto b = train(data, cfg, mc);
  cfg.threads = 3;
  const auto c = train(data, cfg, mc);
  REQUIRE(a.history.size() == 4);
  for (std::size_t i = 0; i < a.model.params().size(); ++i) {
    CHECK(a.model.params()[i].data == b.model.params()[i].data);
    CHECK(a.model.params()[i].data == c.model.params()[i].data);
  }
  cfg.seed = 18;
  CHECK(train(data, cfg, mc).model.params()[0].data != a.model.params()[0].data);

  expect_error(ErrorKind::EmptyDataset, [&] { train({}, cfg, mc); });
  expect_error(ErrorKind::ShapeMismatch, [&] { train(toy_dataset(20, 1, 1), cfg, mc); });
  cfg.epochs = 0;
  expect_error(ErrorKind::InvalidArgument, [&] { train(data, cfg, mc); });
}

TEST_CASE("a single full batch equals full-batch Adam") {
  const auto data = toy_dataset(16, 1, 7);
  TrainConfig cfg;
  cfg.epochs = 3;
  cfg.batch_size = static_cast<int>(data.size());
  cfg.seed = 9;
  cfg.shuffle = false;
  const ModelConfig mc{1, 4, 16};
  const auto trained = train(data, cfg, mc);

  Rng init = derive_rng(cfg.seed, 0);
  Model m = make_model(mc, init);
  nn::AdamState<float> adam(m.params());
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    std::vector<nn::Tensor<float>> sum;
    for (const auto& p : m.params()) sum.emplace_back(p.shape);
    for (const auto& s : data) {
      const auto g = m.backward(m.forward(to_tensor(s.image)), code(s.label));
      for (std::size_t t = 0; t < sum.size(); ++t)
        for (std::size_t i = 0; i < sum[t].data.size(); ++i) sum[t].data[i] += g[t].data[i];
    }
    for (auto& t : sum)
      for (float& v : t.data) v *= 1.0f / static_cast<float>(data.size());
    nn::adam_step(m.params(), sum, adam);
  }
  for (std::size_t i = 0; i < m.params().size(); ++i) CHECK(m.params()[i].data == trained.model.params()[i].data);
}

TEST_CASE("overfits one sample per class at 200x200") {
  const auto data = toy_dataset(200, 1, 8);
  TrainConfig cfg;
  cfg.seed = 1;
  std::vector<EpochStats> seen;
  const auto r = train(data, cfg, {}, [&](const EpochStats& s) { seen.push_back(s); });
  REQUIRE(r.history.size() == 239);
  CHECK(seen.size() == 239);
  CHECK(r.history[10].mean_ce < r.history[0].mean_ce);
  const bool reached = std::any_of(r.history.begin(), r.history.end(), [](const EpochStats& s) { return s.accuracy == 1.0; });
  CHECK(reached);
  CHECK(evaluate_classifier(r.model, data).accuracy == 1.0);
}

TEST_CASE("model files and history") {
  const auto dir = scratch_dir("classifier_io");
  Rng rng = derive_rng(2, 0);
  const Model m = make_model({1, 4, 32}, rng);
  save_model(m, dir / "m.idrn");
  const Model back = load_model(dir / "m.idrn");
  CHECK(back.input_shape() == m.input_shape());
  REQUIRE(back.params().size() == m.params().size());
  for (std::size_t i = 0; i < m.params().size(); ++i) CHECK(back.params()[i].data == m.params()[i].data);

  const std::vector<EpochStats> h{{0, 2.1972246, 0.125}, {1, 1.5, 0.5}};
  write_history_csv(dir / "h.csv", h);
  std::ifstream in(dir / "h.csv");
  std::string all((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  CHECK(all == "epoch,mean_ce,accuracy\n0,2.197225,0.125000\n1,1.500000,0.500000\n");
  expect_error(ErrorKind::IoError, [&] { write_history_csv(dir / "missing" / "h.csv", h); });
  std::filesystem::remove_all(dir);
}
