/*
 * Copyright 2026 The SeisNet Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */
#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "seisnet/config.hpp"
#include "seisnet/model.hpp"

namespace seisnet {

/// log(1 + exp(-y z)) for y in {-1, +1}, without overflow for any finite z.
double logistic_loss(int y, double z);
/// d/dz log(1 + exp(-y z)) = -y / (1 + exp(y z)).
double logistic_loss_grad(int y, double z);

/// Z-score of one window; all zeros when the standard deviation is below 1e-12.
template <typename T>
std::vector<T> preprocess(std::span<const T> window);

enum class WindowSource { Event, PickedNegative, RandomNegative };

std::string to_string(WindowSource source);

struct LabeledWindow {
  std::vector<float> samples;  // already preprocessed
  int label = -1;              // +1 event, -1 background
  std::string trace_id;
  std::size_t start = 0;
  WindowSource source = WindowSource::RandomNegative;
};

struct AdamConfig {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;

  friend bool operator==(const AdamConfig&, const AdamConfig&) = default;
};

/// First and second moments for every learnable tensor, in for_each_parameter order.
struct AdamState {
  AdamConfig config;
  std::uint64_t t = 0;
  std::uint64_t epochs_completed = 0;
  std::vector<std::vector<float>> m;
  std::vector<std::vector<float>> v;

  static AdamState for_model(const ModelParams<float>& params, const AdamConfig& config);
  friend bool operator==(const AdamState&, const AdamState&) = default;
};

/// One bias-corrected Adam update over a flat tensor; `t` is the 1-based step.
void adam_update(std::span<float> param, std::span<const float> grad, std::span<float> m,
                 std::span<float> v, const AdamConfig& config, std::uint64_t t);

/// Advances state.t and applies adam_update to every learnable tensor.
void adam_step(ModelParams<float>& params, const ModelParams<float>& grads, AdamState& state);

void save_adam_state(const AdamState& state, const std::filesystem::path& path);
AdamState load_adam_state(const std::filesystem::path& path);

struct TrainConfig {
  std::size_t batch_size = 50;
  std::size_t epochs = 50;
  AdamConfig adam;
  std::uint64_t seed = 1;
  /// Write a checkpoint every N epochs (0 disables). Needs checkpoint_dir.
  std::size_t checkpoint_every = 0;
  std::filesystem::path checkpoint_dir;
  /// Repeat positive windows so both classes appear about equally often.
  bool oversample_positives = false;
  /// Replace the running BN statistics of the final model by their average
  /// over one more shuffled pass of the training pool (see recalibrate_batchnorm).
  bool recalibrate_bn = true;
  std::size_t threads = 1;

  void validate() const;
  static TrainConfig from_config(const KeyValueConfig& cfg);
  std::string to_config() const;
};

struct EpochStats {
  std::size_t epoch = 0;
  double mean_loss = 0.0;
  double train_accuracy = 0.0;
};

struct TrainResult {
  ModelParams<float> params;
  AdamState optimizer;
  std::vector<EpochStats> history;
};

using EpochCallback = std::function<void(const EpochStats&)>;

/**
 * Mini-batch Adam on the mean logistic loss. Each epoch visits a fresh
 * seeded permutation of the dataset; scores of the Train-mode forward give
 * the per-epoch accuracy. `resume` continues from a saved optimizer state.
 */
TrainResult train(const std::vector<LabeledWindow>& dataset, ModelParams<float> model,
                  const TrainConfig& cfg, const AdamState* resume = nullptr,
                  const EpochCallback& on_epoch = {});

/**
 * Recomputes every BN layer's running mean and variance with the weights held
 * fixed: Train-mode passes over windows[order[0]], windows[order[1]], ... (all
 * windows in index order when `order` is empty) in batches of `batch_size`,
 * averaged with weights proportional to batch size. Learnable parameters are
 * not touched.
 */
void recalibrate_batchnorm(ModelParams<float>& model, const std::vector<LabeledWindow>& windows,
                           std::size_t batch_size, std::size_t threads = 1,
                           std::span<const std::size_t> order = {});

/// Scores every window in Infer mode.
std::vector<float> score_windows(const std::vector<LabeledWindow>& windows,
                                 const ModelParams<float>& model, std::size_t threads = 1);

/// "epoch,mean_loss,train_accuracy" with one row per epoch.
std::string history_csv(const std::vector<EpochStats>& history);

}  // namespace seisnet
