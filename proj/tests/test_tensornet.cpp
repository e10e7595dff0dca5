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
#include <filesystem>
#include <random>

#include "doctest.h"
#include "oracles.hpp"
#include "idread/raster.hpp"
#include "idread/tensornet.hpp"

using namespace idread;
using namespace idread::nn;

using namespace idread::oracle;

namespace {

// Textbook six-loop cross-correlation with explicit zero padding.
Tensor<double> naive_conv(const Tensor<double>& in, const Tensor<double>& k, const Tensor<double>& b) {
  const int h = in.shape[0], w = in.shape[1], c = in.shape[2], ks = k.shape[0], f = k.shape[3], pad = ks / 2;
  Tensor<double> out({h, w, f});
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x)
      for (int o = 0; o < f; ++o) {
        double s = b.data[o];
        for (int dy = 0; dy < ks; ++dy)
          for (int dx = 0; dx < ks; ++dx)
            for (int ch = 0; ch < c; ++ch) {
              const int iy = y + dy - pad, ix = x + dx - pad;
              const double v = (iy < 0 || iy >= h || ix < 0 || ix >= w) ? 0.0 : in.data[(iy * w + ix) * c + ch];
              s += v * k.data[((dy * ks + dx) * c + ch) * f + o];
            }
        out.data[(y * w + x) * f + o] = s;
      }
  return out;
}

}  // namespace

TEST_CASE("conv2d_forward") {
  std::mt19937_64 rng(3);
  SUBCASE("delta kernel is the identity") {
    const auto in = random_tensor<float>(rng, {6, 5, 1});
    Tensor<float> k({5, 5, 1, 1});
    k.data[12] = 1;
    CHECK(conv2d_forward(in, k, Tensor<float>({1})) == in);
  }
  SUBCASE("zero kernels give the bias") {
    const auto in = random_tensor<float>(rng, {4, 4, 2});
    const auto out = conv2d_forward(in, Tensor<float>({5, 5, 2, 3}), Tensor<float>({3}, 0.25f));
    for (float v : out.data) CHECK(v == 0.25f);
  }
  SUBCASE("matches the naive loop") {
    const auto in = random_tensor<double>(rng, {7, 7, 2});
    const auto k = random_tensor<double>(rng, {5, 5, 2, 3});
    const auto b = random_tensor<double>(rng, {3});
    const auto fast = conv2d_forward(in, k, b), ref = naive_conv(in, k, b);
    for (std::size_t i = 0; i < ref.size(); ++i) CHECK(std::abs(fast.data[i] - ref.data[i]) <= 1e-5);
  }
  SUBCASE("shape mismatch") {
    CHECK_THROWS_AS(conv2d_forward(Tensor<float>({4, 4, 2}), Tensor<float>({5, 5, 3, 1}), Tensor<float>({1})), Error);
  }
}

TEST_CASE("maxpool2x2") {
  Tensor<float> a({2, 2, 1});
  a.data = {1, 2, 3, 4};
  CHECK(maxpool2x2(a).output.data == std::vector<float>{4});
  a.data = {-1, -2, -3, -4};
  CHECK(maxpool2x2(a).output.data == std::vector<float>{-1});
  CHECK(maxpool2x2(Tensor<float>({5, 5, 3})).output.shape == std::vector<int>{2, 2, 3});
  a.data = {7, 7, 7, 7};
  CHECK(maxpool2x2(a).argmax == std::vector<std::int32_t>{0});  // first occurrence on ties
  CHECK_THROWS_AS(maxpool2x2(Tensor<float>({1, 4, 1})), Error);
}

TEST_CASE("softmax and cross_entropy") {
  const std::vector<double> zeros(9, 0.0);
  for (double p : softmax<double>(zeros)) CHECK(p == doctest::Approx(1.0 / 9).epsilon(1e-12));
  const auto big = softmax<double>(std::vector<double>{1000, 0});
  CHECK(big[0] == 1.0);
  CHECK(big[1] == doctest::Approx(0.0));
  // e^k / (e + e^2 + e^3)
  const double z = std::exp(1.0) + std::exp(2.0) + std::exp(3.0);
  const auto p = softmax<double>(std::vector<double>{1, 2, 3});
  CHECK(p[0] == doctest::Approx(std::exp(1.0) / z));
  CHECK(p[0] == doctest::Approx(0.09003).epsilon(1e-4));
  CHECK(p[1] == doctest::Approx(0.24473).epsilon(1e-4));
  CHECK(p[2] == doctest::Approx(0.66524).epsilon(1e-4));

  std::mt19937_64 rng(8);
  std::normal_distribution<double> n(0, 10);
  for (int k = 0; k < 1000; ++k) {
    std::vector<double> logits(9);
    for (auto& v : logits) v = n(rng);
    const auto q = softmax<double>(logits);
    double s = 0;
    for (double v : q) {
      CHECK(v >= 0);
      s += v;
    }
    CHECK(std::abs(s - 1) <= 1e-6);
  }

  const auto y = one_hot<double>(4, 9);
  CHECK(cross_entropy<double>(y, y) == 0.0);
  CHECK(std::abs(cross_entropy<double>(std::vector<double>(9, 1.0 / 9), y) - std::log(9.0)) <= 1e-9);
  const std::vector<double> half{0.5, 0.5}, first{1, 0};
  CHECK(cross_entropy<double>(half, first) == doctest::Approx(std::log(2.0)));
  const std::vector<double> wrong{0, 1};
  CHECK(cross_entropy<double>(wrong, first) == doctest::Approx(-std::log(1e-12)));
  CHECK_THROWS_AS(cross_entropy<double>(half, y), Error);
}

TEST_CASE("network forward and backward") {
  SUBCASE("gradients match central differences") {
    CHECK(max_gradient_error(1, 11) < 1e-5);
    CHECK(max_gradient_error(2, 12) < 1e-5);
  }
  SUBCASE("zero weights give uniform probabilities") {
    Network<float> net(classifier_layers(2, 8), {16, 16, 3});
    const auto cache = net.forward(Tensor<float>({16, 16, 3}));
    for (float p : cache.probabilities()) CHECK(p == doctest::Approx(1.0 / 9));
  }
  SUBCASE("forward is pure") {
    Rng rng(1);
    Network<float> net(classifier_layers(1, 4), {8, 8, 3});
    net.init_he_uniform(rng);
    std::mt19937_64 r2(2);
    const auto x = random_tensor<float>(r2, {8, 8, 3}, 0, 1);
    CHECK(net.forward(x).activations == net.forward(x).activations);
  }
  SUBCASE("every published configuration yields nine probabilities") {
    for (int b = 1; b <= 3; ++b)
      for (int f : {8, 16}) {
        Network<float> net(classifier_layers(b, f), {200, 200, 3});
        CHECK(net.param_count() == param_count(b, f));
        CHECK(net.forward(Tensor<float>({200, 200, 3}, 0.5f)).probabilities().size() == 9);
      }
  }
  SUBCASE("wrong input shape") {
    Network<float> net(classifier_layers(1, 2), {8, 8, 3});
    CHECK_THROWS_AS(net.forward(Tensor<float>({8, 8, 1})), Error);
  }
}

TEST_CASE("adam_step") {
  SUBCASE("zero gradient leaves parameters unchanged") {
    std::vector<Tensor<double>> p{Tensor<double>({3}, 2.0)};
    AdamState<double> s(p);
    adam_step(p, std::vector<Tensor<double>>{Tensor<double>({3})}, s);
    CHECK(p[0].data == std::vector<double>(3, 2.0));
    CHECK(s.t == 1);
  }
  SUBCASE("first step has magnitude lr") {
    for (double g : {-3.0, 0.02, 50.0}) {
      std::vector<Tensor<double>> p{Tensor<double>({1}, 1.0)};
      AdamState<double> s(p);
      adam_step(p, std::vector<Tensor<double>>{Tensor<double>({1}, g)}, s);
      // m_hat = g, v_hat = g^2, so the step is lr * g / (|g| + eps).
      CHECK(1.0 - p[0].data[0] == doctest::Approx(0.001 * g / (std::abs(g) + 1e-8)).epsilon(1e-9));
    }
  }
  SUBCASE("minimizes x^2") {
    std::vector<Tensor<double>> p{Tensor<double>({1}, 5.0)};
    AdamState<double> s(p);
    s.lr = 0.01;  // 2000 steps at the default 0.001 could travel at most 2.0
    for (int i = 0; i < 2000; ++i) adam_step(p, std::vector<Tensor<double>>{Tensor<double>({1}, 2 * p[0].data[0])}, s);
    CHECK(std::abs(p[0].data[0]) < 0.01);
  }
  SUBCASE("deterministic and shape checked") {
    std::vector<Tensor<float>> a{Tensor<float>({2}, 1.f)}, b = a;
    AdamState<float> sa(a), sb(b);
    const std::vector<Tensor<float>> g{Tensor<float>({2}, 0.3f)};
    adam_step(a, g, sa);
    adam_step(b, g, sb);
    CHECK(a == b);
    CHECK_THROWS_AS(adam_step(a, std::vector<Tensor<float>>{Tensor<float>({3})}, sa), Error);
  }
}

TEST_CASE("param_count") {
  // Conv (k*k*C_in*F + F) per block plus the dense head, computed by hand.
  auto by_hand = [](int b, int f, int k) {
    long long n = 0, c = 3;
    for (int i = 0; i < b; ++i, c = f) n += k * k * c * f + f;
    const long long side = 200 >> b;
    return n + side * side * f * 9 + 9;
  };
  CHECK(param_count(1, 8) == 720617);
  CHECK(param_count(2, 8) == 182225);
  CHECK(param_count(3, 8) == 48833);
  const char* table[3][2] = {{"0.72M", "1.4M"}, {"0.18M", "0.37M"}, {"49k", "0.10M"}};
  for (int b = 1; b <= 3; ++b)
    for (int fi = 0; fi < 2; ++fi) {
      const int f = fi == 0 ? 8 : 16;
      CHECK(param_count(b, f) == by_hand(b, f, 5));
      CHECK(format_param_count(param_count(b, f)) == table[b - 1][fi]);
    }
  // A 3x3 kernel cannot reproduce the (3, 8) row.
  CHECK(format_param_count(param_count(3, 8, 200, 200, 3, 9, 3)) != "49k");
  CHECK_THROWS_AS(param_count(3, 8, 202, 202), Error);
}

TEST_CASE("weights file") {
  const auto dir = std::filesystem::temp_directory_path() / "idread_test_weights";
  std::filesystem::create_directories(dir);
  Rng rng(5);
  Network<float> net(classifier_layers(2, 4), {16, 16, 3});
  net.init_he_uniform(rng);
  const WeightsHeader header{2, 4, 9, {16, 16, 3}};
  const auto path = dir / "m.idrn";
  save_weights(net, header, path);

  WeightsHeader back;
  const auto loaded = load_weights(path, &back);
  CHECK(loaded.params() == net.params());
  CHECK(back.blocks == 2);
  CHECK(back.input == header.input);

  auto bytes = raster::read_file(path);
  CHECK(bytes.size() > 9);
  CHECK(std::string(bytes.begin(), bytes.begin() + 4) == "IDRN");

  auto expect_format_error = [](std::span<const std::uint8_t> b) {
    try {
      deserialize_weights(b);
      FAIL("expected FormatError");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::FormatError);
    }
  };
  expect_format_error(std::span(bytes).first(bytes.size() - 3));
  auto bad_magic = bytes;
  bad_magic[0] = 'X';
  expect_format_error(bad_magic);
  auto bad_version = bytes;
  bad_version[4] = 2;
  expect_format_error(bad_version);

  // Re-advertise conv0.weight as 5x5x3x5 without touching the data.
  std::string text(bytes.begin() + 9, bytes.begin() + 9 + (bytes[5] | bytes[6] << 8));
  const auto pos = text.find("[5,5,3,4]");
  REQUIRE(pos != std::string::npos);
  text.replace(pos, 9, "[5,5,3,5]");
  std::vector<std::uint8_t> tampered(bytes.begin(), bytes.begin() + 9);
  tampered.insert(tampered.end(), text.begin(), text.end());
  tampered.insert(tampered.end(), bytes.begin() + 9 + text.size(), bytes.end());
  expect_format_error(tampered);

  try {
    load_weights(dir / "missing.idrn");
    FAIL("expected IoError");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::IoError);
  }
  std::filesystem::remove_all(dir);
}
