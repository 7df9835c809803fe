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
#include "seisnet/arch.hpp"

#include <sstream>

#include "seisnet/layers.hpp"
#include "seisnet/tensor.hpp"

namespace seisnet {

std::uint64_t fnv1a64(const void* data, std::size_t size, std::uint64_t seed) {
  const auto* bytes = static_cast<const unsigned char*>(data);
  std::uint64_t h = seed;
  for (std::size_t i = 0; i < size; ++i) {
    h ^= bytes[i];
    h *= 0x100000001b3ULL;
  }
  return h;
}

ArchSpec ArchSpec::canonical() {
  ArchSpec s;
  s.final_pool_window = 9;
  return s;
}

ArchSpec ArchSpec::mini() {
  ArchSpec s;
  s.input_length = 4500;
  s.block_count = 5;
  s.layers_per_block = 4;
  return s;
}

void ArchSpec::validate() const {
  auto require = [](bool ok, const std::string& what) {
    if (!ok) throw ConfigError("invalid ArchSpec: " + what);
  };
  require(input_length >= 1, "input_length must be >= 1");
  require(input_channels >= 1, "input_channels must be >= 1");
  require(stem_kernel >= 1 && stem_filters >= 1 && stem_stride >= 1,
          "stem kernel, filters and stride must be >= 1");
  require(block_count == 0 || (layers_per_block >= 1 && growth_rate >= 1 && block_kernel >= 1),
          "dense blocks need layers_per_block, growth_rate and block_kernel >= 1");
  require(pool_window >= 1 && pool_stride >= 1, "pool window and stride must be >= 1");
  if (final_pool_window != 0) {
    const std::size_t final_len = ladder()[ladder().size() - 2].length;
    require(final_pool_window == final_len,
            "final pool window " + std::to_string(final_pool_window) +
                " does not match the final feature length " + std::to_string(final_len));
  }
}

std::size_t ArchSpec::block_input_channels(std::size_t block) const {
  return stem_filters + block * layers_per_block * growth_rate;
}

std::size_t ArchSpec::layer_input_channels(std::size_t block, std::size_t layer) const {
  return block_input_channels(block) + layer * growth_rate;
}

std::size_t ArchSpec::block_output_channels(std::size_t block) const {
  return block_input_channels(block + 1);
}

std::size_t ArchSpec::feature_dim() const { return block_input_channels(block_count); }

std::size_t ArchSpec::block_length(std::size_t block) const {
  std::size_t len = same_ceil(input_length, stem_kernel, stem_stride).out_length;
  for (std::size_t b = 0; b <= block; ++b) len = same_ceil(len, pool_window, pool_stride).out_length;
  return len;
}

std::vector<StageShape> ArchSpec::ladder() const {
  std::vector<StageShape> rows;
  const std::string pool_desc =
      "avg-pool" + std::to_string(pool_window) + ", /" + std::to_string(pool_stride);
  rows.push_back({"Input", "-", input_length, input_channels});
  std::size_t len = same_ceil(input_length, stem_kernel, stem_stride).out_length;
  rows.push_back({"Convolution",
                  "conv" + std::to_string(stem_kernel) + ", " + std::to_string(stem_filters) +
                      ", /" + std::to_string(stem_stride),
                  len, stem_filters});
  len = same_ceil(len, pool_window, pool_stride).out_length;
  rows.push_back({"Pool", pool_desc, len, stem_filters});
  for (std::size_t b = 0; b < block_count; ++b) {
    rows.push_back({"D_" + std::to_string(b + 1),
                    "[conv" + std::to_string(block_kernel) + ", " + std::to_string(growth_rate) +
                        "] x " + std::to_string(layers_per_block),
                    len, block_output_channels(b)});
    if (b + 1 < block_count) {
      len = same_ceil(len, pool_window, pool_stride).out_length;
      rows.push_back({"Pool", pool_desc, len, block_output_channels(b)});
    }
  }
  rows.push_back({"Pool", "avg-pool" + std::to_string(len) + ", " + std::to_string(len), 1,
                  feature_dim()});
  return rows;
}

std::string ArchSpec::to_config() const {
  std::ostringstream out;
  out << "input_length = " << input_length << "\n"
      << "input_channels = " << input_channels << "\n"
      << "stem_kernel = " << stem_kernel << "\n"
      << "stem_filters = " << stem_filters << "\n"
      << "stem_stride = " << stem_stride << "\n"
      << "block_count = " << block_count << "\n"
      << "layers_per_block = " << layers_per_block << "\n"
      << "growth_rate = " << growth_rate << "\n"
      << "block_kernel = " << block_kernel << "\n"
      << "pool_window = " << pool_window << "\n"
      << "pool_stride = " << pool_stride << "\n"
      << "final_pool_window = " << final_pool_window << "\n";
  return out.str();
}

ArchSpec ArchSpec::from_config(const KeyValueConfig& cfg) {
  ArchSpec d;
  if (cfg.get_string("preset", "") == "canonical") d = canonical();
  else if (cfg.get_string("preset", "") == "mini") d = mini();
  else if (cfg.has("preset")) throw ConfigError("unknown ArchSpec preset '" + cfg.get_string("preset", "") + "'");
  ArchSpec s;
  s.input_length = cfg.get_size("input_length", d.input_length);
  s.input_channels = cfg.get_size("input_channels", d.input_channels);
  s.stem_kernel = cfg.get_size("stem_kernel", d.stem_kernel);
  s.stem_filters = cfg.get_size("stem_filters", d.stem_filters);
  s.stem_stride = cfg.get_size("stem_stride", d.stem_stride);
  s.block_count = cfg.get_size("block_count", d.block_count);
  s.layers_per_block = cfg.get_size("layers_per_block", d.layers_per_block);
  s.growth_rate = cfg.get_size("growth_rate", d.growth_rate);
  s.block_kernel = cfg.get_size("block_kernel", d.block_kernel);
  s.pool_window = cfg.get_size("pool_window", d.pool_window);
  s.pool_stride = cfg.get_size("pool_stride", d.pool_stride);
  s.final_pool_window = cfg.get_size("final_pool_window", d.final_pool_window);
  s.validate();
  return s;
}

std::uint64_t ArchSpec::hash() const {
  const std::string text = to_config();
  return fnv1a64(text.data(), text.size());
}

}  // namespace seisnet
