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


// Document-type classifier: the located quad is warped to a 200x200 square,
// scaled to [0, 1] and fed to N_b conv/pool blocks and a 9-way softmax.

#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <span>
#include <vector>

#include "idread/doctypes.hpp"
#include "idread/raster.hpp"
#include "idread/tensornet.hpp"

namespace idread::classifier {

using raster::Image;
using raster::Quad;
using Model = nn::Network<float>;

inline constexpr int kInputSize = 200;

struct ModelConfig {
  int blocks = 2;    // N_b
  int filters = 8;   // N_f
  int input_size = kInputSize;
};

struct TrainConfig {
  int epochs = 239;
  int batch_size = 32;
  std::uint64_t seed = 0;
  bool shuffle = true;
  unsigned threads = 1;  // per-sample gradients within a batch; summed in sample order
};

struct LabeledImage {
  Image image;  // already rectified to input_size x input_size
  DocumentClass label;
};

struct EpochStats {
  int epoch = 0;
  double mean_ce = 0;
  double accuracy = 0;
};

struct TrainResult {
  Model model;
  std::vector<EpochStats> history;
};

/// Channels divided by 255, H x W x 3.
nn::Tensor<float> to_tensor(const Image& img);

/// Warp of the quad to a 200x200 square followed by to_tensor.
nn::Tensor<float> preprocess(const Image& photo, const Quad& quad, int size = kInputSize);

/// Untrained model with He-uniform weights drawn from `rng`.
Model make_model(const ModelConfig& cfg, Rng& rng);

/// Minibatch Adam on mean cross-entropy. Deterministic given cfg.seed,
/// independent of cfg.threads. `on_epoch` (optional) sees each epoch's stats.
TrainResult train(std::span<const LabeledImage> data, const TrainConfig& cfg, const ModelConfig& model_cfg,
                  const std::function<void(const EpochStats&)>& on_epoch = {});

struct Prediction {
  DocumentClass label;
  std::vector<float> probabilities;
};

/// Argmax of the softmax output; ties go to the lowest class code.
Prediction classify(const Model& model, const nn::Tensor<float>& input);

struct Evaluation {
  double accuracy = 0;
  double mean_ce = 0;
};

Evaluation evaluate_classifier(const Model& model, std::span<const LabeledImage> data, unsigned threads = 1);

void write_history_csv(const std::filesystem::path& path, std::span<const EpochStats> history);

void save_model(const Model& model, const std::filesystem::path& path);
Model load_model(const std::filesystem::path& path);

}  // namespace idread::classifier
