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

// A small feed-forward network engine: 5x5 "same" convolutions with ReLU,
// 2x2 max pooling, a dense layer and a softmax head trained with
// cross-entropy and Adam. Templated on the scalar so gradients can be
// verified in double precision; production models use float.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <numeric>
#include <random>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include <Eigen/Core>

#include "idread/common.hpp"

namespace idread::nn {

template <typename T>
struct Tensor {
  std::vector<int> shape;
  std::vector<T> data;

  Tensor() = default;
  explicit Tensor(std::vector<int> s, T fill = T(0)) : shape(std::move(s)), data(volume(shape), fill) {}

  static std::size_t volume(const std::vector<int>& s) {
    return std::accumulate(s.begin(), s.end(), std::size_t{1},
                           [](std::size_t a, int b) { return a * static_cast<std::size_t>(b); });
  }
  std::size_t size() const noexcept { return data.size(); }
  friend bool operator==(const Tensor&, const Tensor&) = default;
};

struct ConvSpec {
  int kernel = 5;
  int filters = 8;
};
struct MaxPoolSpec {};
struct FlattenSpec {};
struct DenseSpec {
  int units = 9;
};
struct SoftmaxSpec {};

using LayerSpec = std::variant<ConvSpec, MaxPoolSpec, FlattenSpec, DenseSpec, SoftmaxSpec>;

/// N_b x [Conv(5x5, N_f) + MaxPool(2x2)] -> Flatten -> Dense(classes) -> Softmax.
std::vector<LayerSpec> classifier_layers(int blocks, int filters, int classes = 9);

/// Closed-form parameter count of classifier_layers on an H x W x C input.
std::int64_t param_count(int blocks, int filters, int height = 200, int width = 200, int channels = 3,
                         int classes = 9, int kernel = 5);

/// Two significant figures with a k/M suffix ("0.72M", "1.4M", "49k").
std::string format_param_count(std::int64_t count);

// ---------------------------------------------------------------------------
// Primitive operations. Activations are H x W x C, row-major.

template <typename T>
using RowMatrix = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Unfolds every k x k x C zero-padded window into one row of an
/// (H*W) x (k*k*C) matrix, column order (ky, kx, c) to match the kernels.
template <typename T>
RowMatrix<T> im2col(const Tensor<T>& input, int k) {
  const int h = input.shape[0], w = input.shape[1], c = input.shape[2];
  const int pad = (k - 1) / 2;
  RowMatrix<T> cols(static_cast<Eigen::Index>(h) * w, static_cast<Eigen::Index>(k) * k * c);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      T* row = cols.row(static_cast<Eigen::Index>(y) * w + x).data();
      const bool interior = y >= pad && y + pad < h && x >= pad && x + pad < w;
      if (!interior) std::fill_n(row, k * k * c, T(0));
      for (int ky = 0; ky < k; ++ky) {
        const int iy = y + ky - pad;
        if (iy < 0 || iy >= h) continue;
        const int kx0 = std::max(0, pad - x), kx1 = std::min(k, w + pad - x);
        // Consecutive kx cover consecutive input pixels: one contiguous run.
        const T* src = &input.data[(static_cast<std::size_t>(iy) * w + (x + kx0 - pad)) * c];
        T* dst = row + (ky * k + kx0) * c;
        for (int i = 0, n = (kx1 - kx0) * c; i < n; ++i) dst[i] = src[i];
      }
    }
  return cols;
}

/// Cross-correlation with zero "same" padding plus bias, no activation.
/// kernels: k x k x C x F, bias: F.
template <typename T>
Tensor<T> conv2d_forward(const Tensor<T>& input, const Tensor<T>& kernels, const Tensor<T>& bias) {
  if (input.shape.size() != 3 || kernels.shape.size() != 4 || bias.shape.size() != 1)
    throw Error(ErrorKind::ShapeMismatch, "conv2d expects HxWxC input, kxkxCxF kernels, F bias");
  const int h = input.shape[0], w = input.shape[1], c_in = input.shape[2];
  const int k = kernels.shape[0], f_out = kernels.shape[3];
  if (kernels.shape[1] != k || kernels.shape[2] != c_in || bias.shape[0] != f_out || k % 2 == 0)
    throw Error(ErrorKind::ShapeMismatch, "conv2d kernel shape does not match input");
  Tensor<T> out({h, w, f_out});
  const RowMatrix<T> cols = im2col(input, k);
  Eigen::Map<const RowMatrix<T>> kmat(kernels.data.data(), static_cast<Eigen::Index>(k) * k * c_in, f_out);
  Eigen::Map<const Eigen::Matrix<T, 1, Eigen::Dynamic>> b(bias.data.data(), f_out);
  Eigen::Map<RowMatrix<T>> o(out.data.data(), static_cast<Eigen::Index>(h) * w, f_out);
  o.noalias() = cols * kmat;
  o.rowwise() += b;
  return out;
}

template <typename T>
struct PoolResult {
  Tensor<T> output;
  std::vector<std::int32_t> argmax;  // flat input index per output element
};

/// 2x2 window, stride 2; odd trailing rows/columns are dropped. Ties go to
/// the first element in row-major window order.
template <typename T>
PoolResult<T> maxpool2x2(const Tensor<T>& input) {
  if (input.shape.size() != 3 || input.shape[0] < 2 || input.shape[1] < 2)
    throw Error(ErrorKind::ShapeMismatch, "maxpool2x2 expects HxWxC with H, W >= 2");
  const int h = input.shape[0], w = input.shape[1], c = input.shape[2];
  const int oh = h / 2, ow = w / 2;
  PoolResult<T> r{Tensor<T>({oh, ow, c}), std::vector<std::int32_t>(static_cast<std::size_t>(oh) * ow * c)};
  for (int y = 0; y < oh; ++y) {
    for (int x = 0; x < ow; ++x) {
      for (int ch = 0; ch < c; ++ch) {
        std::int32_t best = ((2 * y) * w + 2 * x) * c + ch;
        T best_v = input.data[static_cast<std::size_t>(best)];
        const std::int32_t cand[3] = {((2 * y) * w + 2 * x + 1) * c + ch, ((2 * y + 1) * w + 2 * x) * c + ch,
                                      ((2 * y + 1) * w + 2 * x + 1) * c + ch};
        for (std::int32_t idx : cand) {
          if (input.data[static_cast<std::size_t>(idx)] > best_v) {
            best_v = input.data[static_cast<std::size_t>(idx)];
            best = idx;
          }
        }
        const std::size_t o = (static_cast<std::size_t>(y) * ow + x) * c + ch;
        r.output.data[o] = best_v;
        r.argmax[o] = best;
      }
    }
  }
  return r;
}

template <typename T>
std::vector<T> softmax(std::span<const T> logits) {
  std::vector<T> p(logits.size());
  if (logits.empty()) return p;
  const T mx = *std::max_element(logits.begin(), logits.end());
  T sum = 0;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    p[i] = std::exp(logits[i] - mx);
    sum += p[i];
  }
  for (T& v : p) v /= sum;
  return p;
}

inline constexpr double kProbabilityFloor = 1e-12;

/// sum_i -y_i * log(max(p_i, 1e-12)); y must be one-hot.
template <typename T>
T cross_entropy(std::span<const T> p, std::span<const T> y) {
  if (p.size() != y.size() || p.empty()) throw Error(ErrorKind::ShapeMismatch, "cross_entropy size mismatch");
  T ce = 0;
  for (std::size_t i = 0; i < p.size(); ++i)
    if (y[i] != T(0)) ce -= y[i] * std::log(std::max(p[i], static_cast<T>(kProbabilityFloor)));
  return ce;
}

template <typename T>
std::vector<T> one_hot(int label, int classes) {
  if (label < 0 || label >= classes) throw Error(ErrorKind::ShapeMismatch, "label out of range");
  std::vector<T> y(static_cast<std::size_t>(classes), T(0));
  y[static_cast<std::size_t>(label)] = T(1);
  return y;
}

// ---------------------------------------------------------------------------
// Network

template <typename T>
struct ForwardCache {
  std::vector<Tensor<T>> activations;              // activations[0] is the input
  std::vector<std::vector<std::int32_t>> argmax;   // per layer; empty unless pooling
  std::span<const T> probabilities() const { return activations.back().data; }
};

template <typename T>
class Network {
 public:
  Network() = default;
  Network(std::vector<LayerSpec> layers, std::vector<int> input_shape) : layers_(std::move(layers)), input_(input_shape) {
    if (input_.size() != 3) throw Error(ErrorKind::ShapeMismatch, "input must be HxWxC");
    std::vector<int> shape = input_;
    shapes_.push_back(shape);
    int conv_i = 0, dense_i = 0;
    for (std::size_t l = 0; l < layers_.size(); ++l) {
      param_index_.push_back(-1);
      const LayerSpec& spec = layers_[l];
      if (const auto* conv = std::get_if<ConvSpec>(&spec)) {
        if (shape.size() != 3 || conv->kernel % 2 == 0 || conv->filters < 1)
          throw Error(ErrorKind::ShapeMismatch, "invalid conv layer");
        param_index_.back() = static_cast<int>(params_.size());
        add_param("conv" + std::to_string(conv_i) + ".weight", {conv->kernel, conv->kernel, shape[2], conv->filters});
        add_param("conv" + std::to_string(conv_i) + ".bias", {conv->filters});
        ++conv_i;
        shape = {shape[0], shape[1], conv->filters};
      } else if (std::holds_alternative<MaxPoolSpec>(spec)) {
        if (shape.size() != 3 || shape[0] < 2 || shape[1] < 2) throw Error(ErrorKind::ShapeMismatch, "invalid pool");
        shape = {shape[0] / 2, shape[1] / 2, shape[2]};
      } else if (std::holds_alternative<FlattenSpec>(spec)) {
        shape = {static_cast<int>(Tensor<T>::volume(shape))};
      } else if (const auto* dense = std::get_if<DenseSpec>(&spec)) {
        if (shape.size() != 1 || dense->units < 1) throw Error(ErrorKind::ShapeMismatch, "dense needs flat input");
        param_index_.back() = static_cast<int>(params_.size());
        add_param("dense" + std::to_string(dense_i) + ".weight", {shape[0], dense->units});
        add_param("dense" + std::to_string(dense_i) + ".bias", {dense->units});
        ++dense_i;
        shape = {dense->units};
      } else {
        if (shape.size() != 1 || l + 1 != layers_.size())
          throw Error(ErrorKind::ShapeMismatch, "softmax must be the flat final layer");
      }
      shapes_.push_back(shape);
    }
    if (layers_.empty() || !std::holds_alternative<SoftmaxSpec>(layers_.back()))
      throw Error(ErrorKind::ShapeMismatch, "network must end with softmax");
  }

  const std::vector<LayerSpec>& layers() const { return layers_; }
  const std::vector<int>& input_shape() const { return input_; }
  int classes() const { return shapes_.back()[0]; }
  std::vector<Tensor<T>>& params() { return params_; }
  const std::vector<Tensor<T>>& params() const { return params_; }
  const std::vector<std::string>& param_names() const { return names_; }
  std::int64_t param_count() const {
    std::int64_t n = 0;
    for (const auto& p : params_) n += static_cast<std::int64_t>(p.size());
    return n;
  }

  /// He-uniform weights (limit sqrt(6 / fan_in)), zero biases.
  void init_he_uniform(Rng& rng) {
    for (std::size_t i = 0; i < params_.size(); i += 2) {
      auto& wt = params_[i];
      const std::size_t fan_in = wt.shape.size() == 4
                                     ? static_cast<std::size_t>(wt.shape[0]) * wt.shape[1] * wt.shape[2]
                                     : static_cast<std::size_t>(wt.shape[0]);
      const double limit = std::sqrt(6.0 / static_cast<double>(fan_in));
      std::uniform_real_distribution<double> dist(-limit, limit);
      for (T& v : wt.data) v = static_cast<T>(dist(rng));
      std::fill(params_[i + 1].data.begin(), params_[i + 1].data.end(), T(0));
    }
  }

  ForwardCache<T> forward(const Tensor<T>& input) const {
    if (input.shape != input_) throw Error(ErrorKind::ShapeMismatch, "input shape does not match network");
    ForwardCache<T> cache;
    cache.activations.reserve(layers_.size() + 1);
    cache.activations.push_back(input);
    cache.argmax.resize(layers_.size());
    for (std::size_t l = 0; l < layers_.size(); ++l) {
      const Tensor<T>& x = cache.activations.back();
      const LayerSpec& spec = layers_[l];
      Tensor<T> y;
      if (std::holds_alternative<ConvSpec>(spec)) {
        const int p = param_index_[l];
        y = conv2d_forward(x, params_[p], params_[p + 1]);
        for (T& v : y.data) v = std::max(v, T(0));
      } else if (std::holds_alternative<MaxPoolSpec>(spec)) {
        auto r = maxpool2x2(x);
        y = std::move(r.output);
        cache.argmax[l] = std::move(r.argmax);
      } else if (std::holds_alternative<FlattenSpec>(spec)) {
        y = x;
        y.shape = {static_cast<int>(x.size())};
      } else if (std::holds_alternative<DenseSpec>(spec)) {
        const int p = param_index_[l];
        const auto& wt = params_[p];
        const int n_in = wt.shape[0], n_out = wt.shape[1];
        y = Tensor<T>({n_out});
        std::copy(params_[p + 1].data.begin(), params_[p + 1].data.end(), y.data.begin());
        for (int i = 0; i < n_in; ++i) {
          const T v = x.data[static_cast<std::size_t>(i)];
          if (v == T(0)) continue;
          const T* row = &wt.data[static_cast<std::size_t>(i) * n_out];
          for (int u = 0; u < n_out; ++u) y.data[static_cast<std::size_t>(u)] += v * row[u];
        }
      } else {
        y = Tensor<T>(x.shape);
        y.data = softmax<T>(x.data);
      }
      cache.activations.push_back(std::move(y));
    }
    return cache;
  }

  /// Gradients of cross_entropy(forward(x), one_hot(label)) with respect to
  /// every parameter tensor, in params() order.
  std::vector<Tensor<T>> backward(const ForwardCache<T>& cache, int label) const {
    std::vector<Tensor<T>> grads;
    grads.reserve(params_.size());
    for (const auto& p : params_) grads.emplace_back(p.shape);
    accumulate_backward(cache, label, grads);
    return grads;
  }

  /// As backward(), but adds into an existing gradient set.
  void accumulate_backward(const ForwardCache<T>& cache, int label, std::vector<Tensor<T>>& grads) const {
    const std::size_t n_layers = layers_.size();
    // Softmax + cross-entropy: dL/dlogits = p - y.
    Tensor<T> g = cache.activations.back();
    if (label < 0 || label >= classes()) throw Error(ErrorKind::ShapeMismatch, "label out of range");
    g.data[static_cast<std::size_t>(label)] -= T(1);

    for (std::size_t l = n_layers - 1; l-- > 0;) {
      const LayerSpec& spec = layers_[l];
      const Tensor<T>& x = cache.activations[l];
      const Tensor<T>& y = cache.activations[l + 1];
      const bool need_input_grad = l > 0;
      if (std::holds_alternative<DenseSpec>(spec)) {
        const int p = param_index_[l];
        const auto& wt = params_[p];
        const int n_in = wt.shape[0], n_out = wt.shape[1];
        auto& gw = grads[p].data;
        auto& gb = grads[p + 1].data;
        for (int u = 0; u < n_out; ++u) gb[static_cast<std::size_t>(u)] += g.data[static_cast<std::size_t>(u)];
        Tensor<T> gx(x.shape);
        for (int i = 0; i < n_in; ++i) {
          const T v = x.data[static_cast<std::size_t>(i)];
          const T* row = &wt.data[static_cast<std::size_t>(i) * n_out];
          T* grow = &gw[static_cast<std::size_t>(i) * n_out];
          T s = 0;
          for (int u = 0; u < n_out; ++u) {
            grow[u] += v * g.data[static_cast<std::size_t>(u)];
            s += row[u] * g.data[static_cast<std::size_t>(u)];
          }
          gx.data[static_cast<std::size_t>(i)] = s;
        }
        g = std::move(gx);
      } else if (std::holds_alternative<FlattenSpec>(spec)) {
        g.shape = x.shape;
      } else if (std::holds_alternative<MaxPoolSpec>(spec)) {
        Tensor<T> gx(x.shape);
        const auto& am = cache.argmax[l];
        for (std::size_t o = 0; o < am.size(); ++o) gx.data[static_cast<std::size_t>(am[o])] += g.data[o];
        g = std::move(gx);
      } else if (std::holds_alternative<ConvSpec>(spec)) {
        for (std::size_t i = 0; i < g.size(); ++i)
          if (!(y.data[i] > T(0))) g.data[i] = T(0);
        const int p = param_index_[l];
        g = conv_backward(x, params_[p], g, grads[p], grads[p + 1], need_input_grad);
      }
      if (!need_input_grad) break;
    }
  }

 private:
  void add_param(std::string name, std::vector<int> shape) {
    names_.push_back(std::move(name));
    params_.emplace_back(std::move(shape));
  }

  static Tensor<T> conv_backward(const Tensor<T>& x, const Tensor<T>& kernels, const Tensor<T>& gout,
                                 Tensor<T>& gkernels, Tensor<T>& gbias, bool need_input_grad) {
    const int h = x.shape[0], w = x.shape[1], c_in = x.shape[2];
    const int k = kernels.shape[0], f_out = kernels.shape[3];
    const int pad = (k - 1) / 2;
    const Eigen::Index rows = static_cast<Eigen::Index>(h) * w, kdim = static_cast<Eigen::Index>(k) * k * c_in;
    Eigen::Map<const RowMatrix<T>> g(gout.data.data(), rows, f_out);
    Eigen::Map<Eigen::Matrix<T, 1, Eigen::Dynamic>>(gbias.data.data(), f_out) += g.colwise().sum();
    const RowMatrix<T> cols = im2col(x, k);
    Eigen::Map<RowMatrix<T>>(gkernels.data.data(), kdim, f_out).noalias() += cols.transpose() * g;
    Tensor<T> gx;
    if (!need_input_grad) return gx;
    gx = Tensor<T>(x.shape);
    Eigen::Map<const RowMatrix<T>> kmat(kernels.data.data(), kdim, f_out);
    const RowMatrix<T> dcols = g * kmat.transpose();
    // col2im: scatter each window row back onto the input positions.
    for (int y = 0; y < h; ++y)
      for (int xx = 0; xx < w; ++xx) {
        const T* row = dcols.row(static_cast<Eigen::Index>(y) * w + xx).data();
        for (int ky = 0; ky < k; ++ky) {
          const int iy = y + ky - pad;
          if (iy < 0 || iy >= h) continue;
          for (int kx = 0; kx < k; ++kx) {
            const int ix = xx + kx - pad;
            if (ix < 0 || ix >= w) continue;
            T* dst = &gx.data[(static_cast<std::size_t>(iy) * w + ix) * c_in];
            const T* src = row + (ky * k + kx) * c_in;
            for (int c = 0; c < c_in; ++c) dst[c] += src[c];
          }
        }
      }
    return gx;
  }

  std::vector<LayerSpec> layers_;
  std::vector<int> input_;
  std::vector<std::vector<int>> shapes_;
  std::vector<int> param_index_;
  std::vector<Tensor<T>> params_;
  std::vector<std::string> names_;
};

// ---------------------------------------------------------------------------
// Adam

template <typename T>
struct AdamState {
  std::vector<Tensor<T>> m;
  std::vector<Tensor<T>> v;
  std::int64_t t = 0;
  double lr = 0.001;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;

  AdamState() = default;
  explicit AdamState(const std::vector<Tensor<T>>& params) {
    for (const auto& p : params) {
      m.emplace_back(p.shape);
      v.emplace_back(p.shape);
    }
  }
};

template <typename T>
void adam_step(std::vector<Tensor<T>>& params, const std::vector<Tensor<T>>& grads, AdamState<T>& state) {
  if (params.size() != grads.size() || params.size() != state.m.size())
    throw Error(ErrorKind::ShapeMismatch, "adam: parameter/gradient count mismatch");
  for (std::size_t i = 0; i < params.size(); ++i)
    if (params[i].shape != grads[i].shape || params[i].shape != state.m[i].shape)
      throw Error(ErrorKind::ShapeMismatch, "adam: tensor shape mismatch");
  state.t += 1;
  const double c1 = 1.0 - std::pow(state.beta1, static_cast<double>(state.t));
  const double c2 = 1.0 - std::pow(state.beta2, static_cast<double>(state.t));
  const T b1 = static_cast<T>(state.beta1), b2 = static_cast<T>(state.beta2);
  for (std::size_t i = 0; i < params.size(); ++i) {
    auto& p = params[i].data;
    const auto& g = grads[i].data;
    auto& m = state.m[i].data;
    auto& v = state.v[i].data;
    for (std::size_t j = 0; j < p.size(); ++j) {
      m[j] = b1 * m[j] + (T(1) - b1) * g[j];
      v[j] = b2 * v[j] + (T(1) - b2) * g[j] * g[j];
      const double mhat = m[j] / c1;
      const double vhat = v[j] / c2;
      p[j] -= static_cast<T>(state.lr * mhat / (std::sqrt(vhat) + state.eps));
    }
  }
}

// ---------------------------------------------------------------------------
// Weights file: "IDRN", version 0x01, u32 LE header length, JSON header,
// then float32 LE tensor data in header order.

struct WeightsHeader {
  int blocks = 0;
  int filters = 0;
  int classes = 9;
  std::vector<int> input{200, 200, 3};
};

void save_weights(const Network<float>& net, const WeightsHeader& header, const std::filesystem::path& path);
std::vector<std::uint8_t> serialize_weights(const Network<float>& net, const WeightsHeader& header);
/// Rebuilds classifier_layers(blocks, filters, classes) and fills its weights.
Network<float> load_weights(const std::filesystem::path& path, WeightsHeader* header = nullptr);
Network<float> deserialize_weights(std::span<const std::uint8_t> bytes, WeightsHeader* header = nullptr);

}  // namespace idread::nn
