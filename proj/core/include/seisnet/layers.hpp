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

#include <cstddef>
#include <span>
#include <vector>

#include "seisnet/tensor.hpp"

namespace seisnet {

/**
 * SAME-ceil padding: out = ceil(in / stride), with the zero padding needed to
 * cover the last window split evenly and the odd sample going to the right.
 * Pools use the same geometry but average only the valid samples.
 */
struct Padding {
  std::size_t out_length = 0;
  std::size_t left = 0;
};

Padding same_ceil(std::size_t in_length, std::size_t window, std::size_t stride);

enum class Mode { Train, Infer };

// ---------------------------------------------------------------------------
// Convolution

/// Kernel is stored [k][in_channel][out_channel]; cross-correlation, no flip.
template <typename T>
struct ConvParams {
  std::size_t kernel_size = 1;
  std::size_t in_channels = 1;
  std::size_t out_channels = 1;
  std::size_t stride = 1;
  std::vector<T> kernel;
  std::vector<T> bias;

  ConvParams() = default;
  ConvParams(std::size_t kernel_size, std::size_t in_channels, std::size_t out_channels,
             std::size_t stride);

  T& weight(std::size_t k, std::size_t ci, std::size_t co) {
    return kernel[(k * in_channels + ci) * out_channels + co];
  }
  const T& weight(std::size_t k, std::size_t ci, std::size_t co) const {
    return kernel[(k * in_channels + ci) * out_channels + co];
  }
  std::size_t parameter_count() const { return kernel.size() + bias.size(); }
  /// Zero-valued parameters of the same geometry, used as a gradient buffer.
  ConvParams zeros_like() const { return ConvParams(kernel_size, in_channels, out_channels, stride); }
  void check() const;

  friend bool operator==(const ConvParams&, const ConvParams&) = default;
};

template <typename T>
FeatureMap<T> conv1d_forward(const FeatureMap<T>& x, const ConvParams<T>& p);

/**
 * Backward pass of conv1d_forward. Parameter gradients are accumulated into
 * `grads` (which must have p's geometry). Returns dL/dx, or an empty map when
 * `need_input_grad` is false.
 */
template <typename T>
FeatureMap<T> conv1d_backward(const FeatureMap<T>& grad_out, const FeatureMap<T>& saved_input,
                              const ConvParams<T>& p, ConvParams<T>& grads,
                              bool need_input_grad = true);

// ---------------------------------------------------------------------------
// Average pooling

template <typename T>
FeatureMap<T> avgpool1d(const FeatureMap<T>& x, std::size_t window, std::size_t stride);

template <typename T>
FeatureMap<T> avgpool1d_backward(const FeatureMap<T>& grad_out, std::size_t input_length,
                                 std::size_t window, std::size_t stride);

/// Mean over all timestamps: length x C -> 1 x C.
template <typename T>
FeatureMap<T> global_avgpool(const FeatureMap<T>& x) {
  return avgpool1d(x, x.length(), x.length());
}

// ---------------------------------------------------------------------------
// Batch normalization

template <typename T>
struct BatchNormParams {
  std::vector<T> gamma;
  std::vector<T> beta;
  std::vector<T> running_mean;
  std::vector<T> running_var;
  T epsilon = T(1e-5);
  T momentum = T(0.99);
  /// Running statistics hold real values (from a Train update or a load).
  bool has_running_stats = false;

  BatchNormParams() = default;
  explicit BatchNormParams(std::size_t channels);

  std::size_t channels() const { return gamma.size(); }
  BatchNormParams zeros_like() const;
  void check() const;

  friend bool operator==(const BatchNormParams&, const BatchNormParams&) = default;
};

/// What the backward pass needs from a Train-mode forward.
template <typename T>
struct BatchNormCache {
  Batch<T> normalized;
  std::vector<T> inv_std;
};

/**
 * Normalizes each channel over (batch x length). Train mode uses the batch
 * statistics and folds them into the running statistics (the first update
 * copies them); Infer mode uses the running statistics.
 */
template <typename T>
Batch<T> batchnorm_forward(const Batch<T>& x, BatchNormParams<T>& p, Mode mode,
                           BatchNormCache<T>* cache = nullptr);

/// Infer-mode normalization of a single map with the running statistics.
template <typename T>
FeatureMap<T> batchnorm_infer(const FeatureMap<T>& x, const BatchNormParams<T>& p);

/// Returns dL/dx; accumulates dL/dgamma and dL/dbeta into grads.gamma/grads.beta.
template <typename T>
Batch<T> batchnorm_backward(const Batch<T>& grad_out, const BatchNormCache<T>& cache,
                            const BatchNormParams<T>& p, BatchNormParams<T>& grads);

// ---------------------------------------------------------------------------
// ReLU

template <typename T>
FeatureMap<T> relu(const FeatureMap<T>& x);

/// `saved` may be either the ReLU input or its output; both give the same mask.
template <typename T>
FeatureMap<T> relu_backward(const FeatureMap<T>& grad_out, const FeatureMap<T>& saved);

// ---------------------------------------------------------------------------
// Channel concatenation

template <typename T>
FeatureMap<T> concat_channels(std::span<const FeatureMap<T>> xs);

/// Copies channels [offset, offset + out.channels()) of `x` into a new map.
template <typename T>
FeatureMap<T> slice_channels(const FeatureMap<T>& x, std::size_t offset, std::size_t count);

/// dst[:, offset + c] += src[:, c]
template <typename T>
void add_into_channels(FeatureMap<T>& dst, const FeatureMap<T>& src, std::size_t offset);

// ---------------------------------------------------------------------------
// Fully connected

template <typename T>
struct LinearParams {
  std::size_t in_dim = 0;
  std::size_t out_dim = 0;
  std::vector<T> weight;  // out_dim x in_dim, row-major
  std::vector<T> bias;

  LinearParams() = default;
  LinearParams(std::size_t in_dim, std::size_t out_dim)
      : in_dim(in_dim), out_dim(out_dim), weight(in_dim * out_dim, T(0)), bias(out_dim, T(0)) {}

  std::size_t parameter_count() const { return weight.size() + bias.size(); }
  LinearParams zeros_like() const { return LinearParams(in_dim, out_dim); }
  void check() const;

  friend bool operator==(const LinearParams&, const LinearParams&) = default;
};

template <typename T>
std::vector<T> linear_forward(std::span<const T> x, const LinearParams<T>& p);

template <typename T>
std::vector<T> linear_backward(std::span<const T> grad_out, std::span<const T> saved_input,
                               const LinearParams<T>& p, LinearParams<T>& grads);

}  // namespace seisnet
