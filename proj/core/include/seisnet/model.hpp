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
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "seisnet/arch.hpp"
#include "seisnet/gradcheck.hpp"
#include "seisnet/layers.hpp"

namespace seisnet {

template <typename T>
struct DenseLayerParams {
  BatchNormParams<T> norm;
  ConvParams<T> conv;

  friend bool operator==(const DenseLayerParams&, const DenseLayerParams&) = default;
};

template <typename T>
using DenseBlockParams = std::vector<DenseLayerParams<T>>;

/**
 * All weights of a network built from an ArchSpec. The same type doubles as
 * a gradient buffer (see zeros_like); running BN statistics are not
 * learnable and stay zero there.
 */
template <typename T>
struct ModelParams {
  ArchSpec spec;
  ConvParams<T> stem;
  std::vector<DenseBlockParams<T>> blocks;
  LinearParams<T> head;
  std::uint64_t step = 0;

  ModelParams zeros_like() const;

  /// Visits learnable tensors in declaration order: stem kernel/bias, then for
  /// each block layer BN gamma/beta and conv kernel/bias, then head weight/bias.
  template <typename F>
  void for_each_parameter(F&& fn);
  template <typename F>
  void for_each_parameter(F&& fn) const;

  template <typename U>
  ModelParams<U> cast() const;

  friend bool operator==(const ModelParams&, const ModelParams&) = default;
};

enum class InitRule {
  /// Zero-mean normal weights with std sqrt(2 / fan_in); zero biases; gamma 1, beta 0.
  He,
  /// Everything zero except BN gamma and running variance (1), with running
  /// statistics marked as set. Gives a constant-score network usable in Infer mode.
  Zeros,
};

template <typename T>
ModelParams<T> build_model(const ArchSpec& spec, InitRule init, std::uint64_t seed);

/// Number of learnable scalars (BN running statistics excluded).
template <typename T>
std::size_t count_parameters(const ModelParams<T>& params);

// ---------------------------------------------------------------------------
// Dense blocks

template <typename T>
struct DenseLayerCache {
  BatchNormCache<T> norm;
  Batch<T> activated;  // ReLU output, i.e. the conv input
};

template <typename T>
struct DenseBlockCache {
  std::size_t input_channels = 0;
  std::vector<DenseLayerCache<T>> layers;
};

/**
 * Batched dense block. Layer l sees the concatenation of the block input and
 * the outputs of layers 0..l-1 and applies BN -> ReLU -> conv; the block
 * returns the concatenation of everything. Train mode uses batch statistics
 * and fills `cache` when given.
 */
template <typename T>
Batch<T> dense_block_forward(const Batch<T>& x, DenseBlockParams<T>& block, Mode mode,
                             DenseBlockCache<T>* cache = nullptr, std::size_t threads = 1);

/// Infer-mode dense block on a single map.
template <typename T>
FeatureMap<T> dense_block_forward(const FeatureMap<T>& x, const DenseBlockParams<T>& block);

/// Returns dL/d(block input) per sample and accumulates parameter gradients.
template <typename T>
Batch<T> dense_block_backward(const Batch<T>& grad_out, const DenseBlockCache<T>& cache,
                              const DenseBlockParams<T>& block, DenseBlockParams<T>& grads,
                              std::size_t threads = 1);

// ---------------------------------------------------------------------------
// Whole network

template <typename T>
struct ForwardCache {
  Batch<T> inputs;
  std::size_t stem_length = 0;
  std::vector<std::size_t> block_lengths;
  std::vector<DenseBlockCache<T>> blocks;
  Batch<T> features;  // 1 x feature_dim head inputs
};

/**
 * Infer-mode score of one window. When `shapes` is given, the shape of every
 * stage (same rows as ArchSpec::ladder) is appended as it is computed.
 */
template <typename T>
T forward(const FeatureMap<T>& x, const ModelParams<T>& params,
          std::vector<StageShape>* shapes = nullptr);

/// Batched scores; Train mode updates BN running statistics and fills `cache`.
template <typename T>
std::vector<T> forward_batch(const Batch<T>& inputs, ModelParams<T>& params, Mode mode,
                             ForwardCache<T>* cache = nullptr, std::size_t threads = 1);

/// Gradients of sum_i grad_z[i] * z_i with respect to every learnable tensor.
template <typename T>
ModelParams<T> backward(std::span<const T> grad_z, const ForwardCache<T>& cache,
                        const ModelParams<T>& params, std::size_t threads = 1);

/**
 * Finite-difference check of the whole network in double precision: random
 * parameters (including BN affine terms), a batch of random inputs, and the
 * loss sum(r_i * z_i) in Train mode.
 *
 * With `directions` = 0 every scalar is perturbed on its own. Otherwise each
 * tensor is checked along that many random directions, which keeps the cost
 * independent of the tensor size.
 */
GradCheckReport check_model_gradients(const ArchSpec& spec, std::uint64_t seed,
                                      double tolerance, std::size_t batch = 2,
                                      std::size_t directions = 0);

// ---------------------------------------------------------------------------
// Weight files
//
// Layout (all integers and floats little-endian):
//   "SEISNETW"                      8-byte magic
//   u32 version                     = 1
//   u32 n, n bytes                  ArchSpec as key = value text
//   u64 ArchSpec hash               FNV-1a of that text
//   u64 training step
//   u32 tensor count
//   per tensor: u64 count, count x f32
//       order: learnable tensors (for_each_parameter), then per BN layer
//       running_mean and running_var
//   u32 BN layer count, one byte per layer: running statistics present
//   u64 FNV-1a checksum of every preceding byte

void save_weights(const ModelParams<float>& params, std::ostream& out);
void save_weights(const ModelParams<float>& params, const std::string& path);

/// Throws FormatError on corrupt or truncated input and ConfigError when
/// `expected` is given and its hash differs from the file's.
ModelParams<float> load_weights(std::istream& in, const ArchSpec* expected = nullptr);
ModelParams<float> load_weights(const std::string& path, const ArchSpec* expected = nullptr);

// ---------------------------------------------------------------------------

template <typename T>
template <typename F>
void ModelParams<T>::for_each_parameter(F&& fn) {
  fn(std::string("stem.kernel"), std::span<T>(stem.kernel));
  fn(std::string("stem.bias"), std::span<T>(stem.bias));
  for (std::size_t b = 0; b < blocks.size(); ++b) {
    for (std::size_t l = 0; l < blocks[b].size(); ++l) {
      const std::string prefix = "block" + std::to_string(b + 1) + ".layer" + std::to_string(l + 1);
      auto& layer = blocks[b][l];
      fn(prefix + ".norm.gamma", std::span<T>(layer.norm.gamma));
      fn(prefix + ".norm.beta", std::span<T>(layer.norm.beta));
      fn(prefix + ".conv.kernel", std::span<T>(layer.conv.kernel));
      fn(prefix + ".conv.bias", std::span<T>(layer.conv.bias));
    }
  }
  fn(std::string("head.weight"), std::span<T>(head.weight));
  fn(std::string("head.bias"), std::span<T>(head.bias));
}

template <typename T>
template <typename F>
void ModelParams<T>::for_each_parameter(F&& fn) const {
  const_cast<ModelParams<T>*>(this)->for_each_parameter(
      [&](const std::string& name, std::span<T> values) {
        fn(name, std::span<const T>(values.data(), values.size()));
      });
}

template <typename T>
template <typename U>
ModelParams<U> ModelParams<T>::cast() const {
  auto cast_vec = [](const std::vector<T>& v) { return std::vector<U>(v.begin(), v.end()); };
  auto cast_conv = [&](const ConvParams<T>& c) {
    ConvParams<U> out(c.kernel_size, c.in_channels, c.out_channels, c.stride);
    out.kernel = cast_vec(c.kernel);
    out.bias = cast_vec(c.bias);
    return out;
  };
  ModelParams<U> out;
  out.spec = spec;
  out.step = step;
  out.stem = cast_conv(stem);
  for (const auto& block : blocks) {
    DenseBlockParams<U> ob;
    for (const auto& layer : block) {
      DenseLayerParams<U> ol;
      ol.norm.gamma = cast_vec(layer.norm.gamma);
      ol.norm.beta = cast_vec(layer.norm.beta);
      ol.norm.running_mean = cast_vec(layer.norm.running_mean);
      ol.norm.running_var = cast_vec(layer.norm.running_var);
      ol.norm.epsilon = static_cast<U>(layer.norm.epsilon);
      ol.norm.momentum = static_cast<U>(layer.norm.momentum);
      ol.norm.has_running_stats = layer.norm.has_running_stats;
      ol.conv = cast_conv(layer.conv);
      ob.push_back(std::move(ol));
    }
    out.blocks.push_back(std::move(ob));
  }
  out.head = LinearParams<U>(head.in_dim, head.out_dim);
  out.head.weight = cast_vec(head.weight);
  out.head.bias = cast_vec(head.bias);
  return out;
}

}  // namespace seisnet
