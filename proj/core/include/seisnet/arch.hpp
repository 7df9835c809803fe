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
#include <cstdint>
#include <string>
#include <vector>

#include "seisnet/config.hpp"

namespace seisnet {

/// One row of the shape ladder: a named stage and the map it produces.
struct StageShape {
  std::string stage;
  std::string layers;
  std::size_t length = 0;
  std::size_t channels = 0;

  friend bool operator==(const StageShape&, const StageShape&) = default;
};

/**
 * Declarative network description:
 *
 *   input -> stem conv -> pool -> D_1 -> pool -> ... -> D_B -> global mean -> linear
 *
 * Every dense block has `layers_per_block` pre-activation layers
 * (BN -> ReLU -> conv, `growth_rate` filters each), so block b maps
 * d_0 channels to d_0 + growth_rate * layers_per_block.
 */
struct ArchSpec {
  std::size_t input_length = 18000;
  std::size_t input_channels = 1;
  std::size_t stem_kernel = 7;
  std::size_t stem_filters = 24;
  std::size_t stem_stride = 2;
  std::size_t block_count = 10;
  std::size_t layers_per_block = 6;
  std::size_t growth_rate = 12;
  std::size_t block_kernel = 3;
  std::size_t pool_window = 2;
  std::size_t pool_stride = 2;
  /// Declared window of the final pool; 0 means "whatever length remains".
  /// A non-zero value must equal the length reaching the final pool.
  std::size_t final_pool_window = 0;

  /// The 18,000-sample, 10 x 6 layer, k = 12 network.
  static ArchSpec canonical();
  /// Desk-scale variant: 4,500 samples, 5 blocks x 4 layers, k = 12.
  static ArchSpec mini();

  void validate() const;

  /// Channels entering layer `layer` of block `block` (both 0-based).
  std::size_t layer_input_channels(std::size_t block, std::size_t layer) const;
  std::size_t block_input_channels(std::size_t block) const;
  std::size_t block_output_channels(std::size_t block) const;
  /// Width of the pooled feature vector fed to the linear head.
  std::size_t feature_dim() const;
  /// Timestamps entering dense block `block`.
  std::size_t block_length(std::size_t block) const;

  std::vector<StageShape> ladder() const;

  std::string to_config() const;
  static ArchSpec from_config(const KeyValueConfig& cfg);
  std::uint64_t hash() const;

  friend bool operator==(const ArchSpec&, const ArchSpec&) = default;
};

/// 64-bit FNV-1a.
std::uint64_t fnv1a64(const void* data, std::size_t size, std::uint64_t seed = 0xcbf29ce484222325ULL);

}  // namespace seisnet
