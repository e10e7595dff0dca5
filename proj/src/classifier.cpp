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


#include "idread/classifier.hpp"

#include <algorithm>
#include <fstream>
#include <numeric>

namespace idread::classifier {

nn::Tensor<float> to_tensor(const Image& img) {
  nn::Tensor<float> t({img.height(), img.width(), 3});
  const auto bytes = img.bytes();
  for (std::size_t i = 0; i < bytes.size(); ++i) t.data[i] = static_cast<float>(bytes[i]) / 255.0f;
  return t;
}

nn::Tensor<float> preprocess(const Image& photo, const Quad& quad, int size) {
  return to_tensor(raster::warp_perspective(photo, quad, size, size));
}

Model make_model(const ModelConfig& cfg, Rng& rng) {
  Model m(nn::classifier_layers(cfg.blocks, cfg.filters, kNumClasses), {cfg.input_size, cfg.input_size, 3});
  m.init_he_uniform(rng);
  return m;
}

namespace {

int argmax_lowest(std::span<const float> p) {
  int best = 0;
  for (int i = 1; i < static_cast<int>(p.size()); ++i)
    if (p[static_cast<std::size_t>(i)] > p[static_cast<std::size_t>(best)]) best = i;
  return best;
}

double sample_ce(std::span<const float> p, int label) {
  return -std::log(std::max(static_cast<double>(p[static_cast<std::size_t>(label)]), nn::kProbabilityFloor));
}

void check_dataset(std::span<const LabeledImage> data, int size) {
  if (data.empty()) throw Error(ErrorKind::EmptyDataset, "dataset is empty");
  for (const auto& s : data) {
    if (s.image.width() != size || s.image.height() != size)
      throw Error(ErrorKind::ShapeMismatch, "training image is not " + std::to_string(size) + "x" + std::to_string(size));
    if (code(s.label) < 0 || code(s.label) >= kNumClasses) throw Error(ErrorKind::ShapeMismatch, "bad class code");
  }
}

}  // namespace

TrainResult train(std::span<const LabeledImage> data, const TrainConfig& cfg, const ModelConfig& model_cfg,
                  const std::function<void(const EpochStats&)>& on_epoch) {
  if (cfg.epochs < 1 || cfg.batch_size < 1) throw Error(ErrorKind::InvalidArgument, "epochs and batch size must be >= 1");
  check_dataset(data, model_cfg.input_size);

  Rng init_rng = derive_rng(cfg.seed, 0);
  Rng shuffle_rng = derive_rng(cfg.seed, 1);
  TrainResult result{make_model(model_cfg, init_rng), {}};
  Model& model = result.model;
  nn::AdamState<float> adam(model.params());

  const std::size_t batch = std::min<std::size_t>(static_cast<std::size_t>(cfg.batch_size), data.size());
  std::vector<std::vector<nn::Tensor<float>>> slots(batch);
  for (auto& s : slots)
    for (const auto& p : model.params()) s.emplace_back(p.shape);
  std::vector<double> slot_ce(batch);
  std::vector<char> slot_hit(batch);
  std::vector<nn::Tensor<float>> total;
  for (const auto& p : model.params()) total.emplace_back(p.shape);

  std::vector<std::size_t> order(data.size());
  std::iota(order.begin(), order.end(), std::size_t{0});

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    if (cfg.shuffle) std::shuffle(order.begin(), order.end(), shuffle_rng);
    double ce_sum = 0;
    std::size_t hits = 0;
    for (std::size_t start = 0; start < order.size(); start += batch) {
      const std::size_t n = std::min(batch, order.size() - start);
      parallel_for(n, cfg.threads, [&](std::size_t k) {
        const LabeledImage& s = data[order[start + k]];
        for (auto& g : slots[k]) std::fill(g.data.begin(), g.data.end(), 0.0f);
        const auto cache = model.forward(to_tensor(s.image));
        slot_ce[k] = sample_ce(cache.probabilities(), code(s.label));
        slot_hit[k] = argmax_lowest(cache.probabilities()) == code(s.label);
        model.accumulate_backward(cache, code(s.label), slots[k]);
      });
      // Fixed summation order keeps the update independent of thread count.
      const float inv = 1.0f / static_cast<float>(n);
      for (std::size_t t = 0; t < total.size(); ++t) {
        auto& acc = total[t].data;
        std::fill(acc.begin(), acc.end(), 0.0f);
        for (std::size_t k = 0; k < n; ++k) {
          const auto& g = slots[k][t].data;
          for (std::size_t i = 0; i < acc.size(); ++i) acc[i] += g[i];
        }
        for (float& v : acc) v *= inv;
      }
      for (std::size_t k = 0; k < n; ++k) {
        ce_sum += slot_ce[k];
        hits += slot_hit[k] ? 1 : 0;
      }
      nn::adam_step(model.params(), total, adam);
    }
    const EpochStats stats{epoch, ce_sum / static_cast<double>(data.size()),
                           static_cast<double>(hits) / static_cast<double>(data.size())};
    result.history.push_back(stats);
    if (on_epoch) on_epoch(stats);
  }
  return result;
}

Prediction classify(const Model& model, const nn::Tensor<float>& input) {
  const auto cache = model.forward(input);
  const auto p = cache.probabilities();
  return {static_cast<DocumentClass>(argmax_lowest(p)), std::vector<float>(p.begin(), p.end())};
}

Evaluation evaluate_classifier(const Model& model, std::span<const LabeledImage> data, unsigned threads) {
  if (data.empty()) throw Error(ErrorKind::EmptyDataset, "dataset is empty");
  std::vector<double> ce(data.size());
  std::vector<char> hit(data.size());
  parallel_for(data.size(), threads, [&](std::size_t i) {
    const Prediction p = classify(model, to_tensor(data[i].image));
    ce[i] = sample_ce(p.probabilities, code(data[i].label));
    hit[i] = p.label == data[i].label;
  });
  Evaluation e;
  for (std::size_t i = 0; i < data.size(); ++i) {
    e.mean_ce += ce[i];
    e.accuracy += hit[i] ? 1 : 0;
  }
  e.mean_ce /= static_cast<double>(data.size());
  e.accuracy /= static_cast<double>(data.size());
  return e;
}

void write_history_csv(const std::filesystem::path& path, std::span<const EpochStats> history) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorKind::IoError, "cannot write " + path.string());
  out << "epoch,mean_ce,accuracy\n";
  char line[96];
  for (const auto& h : history) {
    std::snprintf(line, sizeof line, "%d,%.6f,%.6f\n", h.epoch, h.mean_ce, h.accuracy);
    out << line;
  }
  if (!out) throw Error(ErrorKind::IoError, "failed writing " + path.string());
}

void save_model(const Model& model, const std::filesystem::path& path) {
  int blocks = 0, filters = 0;
  for (const auto& l : model.layers())
    if (const auto* c = std::get_if<nn::ConvSpec>(&l)) {
      ++blocks;
      filters = c->filters;
    }
  nn::save_weights(model, nn::WeightsHeader{blocks, filters, model.classes(), model.input_shape()}, path);
}

Model load_model(const std::filesystem::path& path) { return nn::load_weights(path); }

}  // namespace idread::classifier
