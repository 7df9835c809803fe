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
#include <fstream>
#include <istream>
#include <ostream>

#include "seisnet/io.hpp"
#include "seisnet/model.hpp"

namespace seisnet {

namespace {

constexpr std::string_view kWeightMagic = "SEISNETW";
constexpr std::uint32_t kWeightVersion = 1;

template <typename Params, typename F>
void for_each_state_tensor(Params& params, F&& fn) {
  params.for_each_parameter([&](const std::string&, auto values) { fn(values); });
  for (auto& block : params.blocks)
    for (auto& layer : block) {
      fn(std::span(layer.norm.running_mean));
      fn(std::span(layer.norm.running_var));
    }
}

std::string encode(const ModelParams<float>& params) {
  ByteWriter w;
  w.bytes(kWeightMagic);
  w.u32(kWeightVersion);
  const std::string spec_text = params.spec.to_config();
  w.u32(static_cast<std::uint32_t>(spec_text.size()));
  w.bytes(spec_text);
  w.u64(params.spec.hash());
  w.u64(params.step);

  std::uint32_t tensors = 0;
  for_each_state_tensor(params, [&](auto) { ++tensors; });
  w.u32(tensors);
  for_each_state_tensor(params, [&](auto values) {
    w.u64(values.size());
    w.f32s(values);
  });

  std::uint32_t bn_layers = 0;
  for (const auto& block : params.blocks) bn_layers += static_cast<std::uint32_t>(block.size());
  w.u32(bn_layers);
  for (const auto& block : params.blocks)
    for (const auto& layer : block) w.u8(layer.norm.has_running_stats ? 1 : 0);

  const std::uint64_t checksum = fnv1a64(w.buffer().data(), w.size());
  w.u64(checksum);
  return w.buffer();
}

}  // namespace

void save_weights(const ModelParams<float>& params, std::ostream& out) {
  const std::string bytes = encode(params);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw std::runtime_error("save_weights: stream write failed");
}

void save_weights(const ModelParams<float>& params, const std::string& path) {
  atomic_write_file(path, encode(params));
}

ModelParams<float> load_weights(std::istream& in, const ArchSpec* expected) {
  const std::string data = read_all(in);
  ByteReader r(data, "weight file");
  if (r.bytes(kWeightMagic.size()) != kWeightMagic) r.fail("bad magic, not a weight file");
  const std::uint32_t version = r.u32();
  if (version != kWeightVersion) r.fail("unsupported weight file version " + std::to_string(version));
  const std::uint32_t spec_len = r.u32();
  const std::string spec_text(r.bytes(spec_len));
  const std::uint64_t stored_hash = r.u64();

  ArchSpec spec;
  try {
    spec = ArchSpec::from_config(KeyValueConfig::parse(spec_text, "weight file ArchSpec"));
  } catch (const ConfigError& e) {
    r.fail(std::string("invalid embedded ArchSpec (") + e.what() + ")");
  }
  if (spec.hash() != stored_hash) r.fail("ArchSpec hash does not match embedded ArchSpec");
  if (expected && expected->hash() != stored_hash) {
    throw ConfigError("weight file was trained for a different ArchSpec (hash " +
                      std::to_string(stored_hash) + ", expected " +
                      std::to_string(expected->hash()) + ")");
  }

  ModelParams<float> params = build_model<float>(spec, InitRule::Zeros, 0);
  params.step = r.u64();
  std::uint32_t tensors = 0;
  for_each_state_tensor(params, [&](auto) { ++tensors; });
  const std::uint32_t stored_tensors = r.u32();
  if (stored_tensors != tensors) {
    r.fail("expected " + std::to_string(tensors) + " tensors, found " + std::to_string(stored_tensors));
  }
  for_each_state_tensor(params, [&](auto values) {
    const std::uint64_t count = r.u64();
    if (count != values.size()) {
      r.fail("tensor of " + std::to_string(values.size()) + " values stored with count " +
             std::to_string(count));
    }
    r.f32s(values);
  });
  std::uint32_t bn_layers = 0;
  for (const auto& block : params.blocks) bn_layers += static_cast<std::uint32_t>(block.size());
  if (r.u32() != bn_layers) r.fail("batch-norm layer count mismatch");
  for (auto& block : params.blocks)
    for (auto& layer : block) layer.norm.has_running_stats = r.u8() != 0;

  const std::size_t body = r.offset();
  const std::uint64_t checksum = r.u64();
  if (checksum != fnv1a64(data.data(), body)) r.fail("checksum mismatch");
  if (r.remaining() != 0) r.fail("trailing bytes after checksum");
  return params;
}

ModelParams<float> load_weights(const std::string& path, const ArchSpec* expected) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open weight file " + path);
  return load_weights(in, expected);
}

}  // namespace seisnet
