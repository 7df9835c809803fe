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
#include "seisnet/model.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "seisnet/parallel.hpp"

namespace seisnet {

namespace {

template <typename T>
void fill_he(std::vector<T>& values, std::size_t fan_in, std::mt19937_64& rng) {
  std::normal_distribution<double> dist(0.0, std::sqrt(2.0 / static_cast<double>(fan_in)));
  for (T& v : values) v = static_cast<T>(dist(rng));
}

// dst[:, c] += src[:, offset + c]
template <typename T>
void add_from_channels(FeatureMap<T>& dst, const FeatureMap<T>& src, std::size_t offset) {
  const std::size_t cd = dst.channels();
  const std::size_t cs = src.channels();
  for (std::size_t t = 0; t < dst.length(); ++t) {
    T* o = dst.data() + t * cd;
    const T* r = src.data() + t * cs + offset;
    for (std::size_t c = 0; c < cd; ++c) o[c] += r[c];
  }
}

void check_layer_width(std::size_t block_input, std::size_t layer, std::size_t growth,
                       std::size_t actual) {
  const std::size_t expected = block_input + growth * layer;
  if (actual != expected) {
    throw ShapeError("dense layer " + std::to_string(layer) + " expects " +
                     std::to_string(expected) + " input channels (d0 + k*l), got " +
                     std::to_string(actual));
  }
}

template <typename T>
void add_into(std::vector<T>& dst, const std::vector<T>& src) {
  for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += src[i];
}

template <typename T>
void reduce_conv_grads(ConvParams<T>& dst, const std::vector<ConvParams<T>>& parts) {
  for (const auto& p : parts) {
    add_into(dst.kernel, p.kernel);
    add_into(dst.bias, p.bias);
  }
}

template <typename T>
FeatureMap<T> bn_relu_infer(const FeatureMap<T>& x, const BatchNormParams<T>& p) {
  FeatureMap<T> y = batchnorm_infer(x, p);
  for (T& v : y.values()) v = v > T(0) ? v : T(0);
  return y;
}

}  // namespace

template <typename T>
ModelParams<T> ModelParams<T>::zeros_like() const {
  ModelParams<T> z;
  z.spec = spec;
  z.stem = stem.zeros_like();
  for (const auto& block : blocks) {
    DenseBlockParams<T> zb;
    for (const auto& layer : block) zb.push_back({layer.norm.zeros_like(), layer.conv.zeros_like()});
    z.blocks.push_back(std::move(zb));
  }
  z.head = head.zeros_like();
  return z;
}

template <typename T>
ModelParams<T> build_model(const ArchSpec& spec, InitRule init, std::uint64_t seed) {
  spec.validate();
  ModelParams<T> m;
  m.spec = spec;
  std::mt19937_64 rng(seed);
  m.stem = ConvParams<T>(spec.stem_kernel, spec.input_channels, spec.stem_filters, spec.stem_stride);
  if (init == InitRule::He) fill_he(m.stem.kernel, spec.stem_kernel * spec.input_channels, rng);
  for (std::size_t b = 0; b < spec.block_count; ++b) {
    DenseBlockParams<T> block;
    for (std::size_t l = 0; l < spec.layers_per_block; ++l) {
      const std::size_t c = spec.layer_input_channels(b, l);
      DenseLayerParams<T> layer{BatchNormParams<T>(c),
                                ConvParams<T>(spec.block_kernel, c, spec.growth_rate, 1)};
      if (init == InitRule::He) {
        fill_he(layer.conv.kernel, spec.block_kernel * c, rng);
      } else {
        std::fill(layer.norm.running_var.begin(), layer.norm.running_var.end(), T(1));
        layer.norm.has_running_stats = true;
      }
      block.push_back(std::move(layer));
    }
    m.blocks.push_back(std::move(block));
  }
  m.head = LinearParams<T>(spec.feature_dim(), 1);
  if (init == InitRule::He) fill_he(m.head.weight, spec.feature_dim(), rng);
  return m;
}

template <typename T>
std::size_t count_parameters(const ModelParams<T>& params) {
  std::size_t n = 0;
  params.for_each_parameter([&](const std::string&, std::span<const T> v) { n += v.size(); });
  return n;
}

// ---------------------------------------------------------------------------
// Dense blocks

template <typename T>
Batch<T> dense_block_forward(const Batch<T>& x, DenseBlockParams<T>& block, Mode mode,
                             DenseBlockCache<T>* cache, std::size_t threads) {
  if (x.empty()) throw ShapeError("dense_block_forward: empty batch");
  const std::size_t n = x.size();
  const std::size_t d0 = x.front().channels();
  const std::size_t growth = block.empty() ? 0 : block.front().conv.out_channels;
  if (cache) {
    cache->input_channels = d0;
    cache->layers.assign(block.size(), {});
  }
  std::vector<std::vector<FeatureMap<T>>> pieces(n);
  for (std::size_t s = 0; s < n; ++s) pieces[s].push_back(x[s]);

  for (std::size_t l = 0; l < block.size(); ++l) {
    auto& layer = block[l];
    check_layer_width(d0, l, growth, layer.norm.channels());
    Batch<T> joined(n);
    parallel_for(n, threads, [&](std::size_t s) {
      joined[s] = concat_channels<T>(pieces[s]);
    });
    check_layer_width(d0, l, growth, joined.front().channels());
    Batch<T> normed =
        batchnorm_forward(joined, layer.norm, mode, cache ? &cache->layers[l].norm : nullptr);
    joined.clear();
    if (cache) cache->layers[l].activated.resize(n);
    parallel_for(n, threads, [&](std::size_t s) {
      FeatureMap<T> a = relu(normed[s]);
      normed[s] = FeatureMap<T>();
      pieces[s].push_back(conv1d_forward(a, layer.conv));
      if (cache) cache->layers[l].activated[s] = std::move(a);
    });
  }
  Batch<T> out(n);
  parallel_for(n, threads, [&](std::size_t s) { out[s] = concat_channels<T>(pieces[s]); });
  return out;
}

template <typename T>
FeatureMap<T> dense_block_forward(const FeatureMap<T>& x, const DenseBlockParams<T>& block) {
  const std::size_t d0 = x.channels();
  const std::size_t growth = block.empty() ? 0 : block.front().conv.out_channels;
  std::vector<FeatureMap<T>> pieces{x};
  for (std::size_t l = 0; l < block.size(); ++l) {
    FeatureMap<T> joined = concat_channels<T>(pieces);
    check_layer_width(d0, l, growth, joined.channels());
    pieces.push_back(conv1d_forward(bn_relu_infer(joined, block[l].norm), block[l].conv));
  }
  return concat_channels<T>(pieces);
}

template <typename T>
Batch<T> dense_block_backward(const Batch<T>& grad_out, const DenseBlockCache<T>& cache,
                              const DenseBlockParams<T>& block, DenseBlockParams<T>& grads,
                              std::size_t threads) {
  const std::size_t n = grad_out.size();
  const std::size_t layers = block.size();
  if (cache.layers.size() != layers) {
    throw std::logic_error("dense_block_backward: cache does not match block");
  }
  std::vector<std::size_t> widths{cache.input_channels};
  for (const auto& layer : block) widths.push_back(layer.conv.out_channels);

  std::vector<std::vector<FeatureMap<T>>> grad_pieces(n);
  parallel_for(n, threads, [&](std::size_t s) {
    std::size_t offset = 0;
    for (std::size_t w : widths) {
      grad_pieces[s].push_back(slice_channels(grad_out[s], offset, w));
      offset += w;
    }
  });

  for (std::size_t li = layers; li-- > 0;) {
    const auto& layer = block[li];
    const auto& lc = cache.layers[li];
    std::vector<ConvParams<T>> conv_grads(n, layer.conv.zeros_like());
    Batch<T> grad_normed(n);
    parallel_for(n, threads, [&](std::size_t s) {
      FeatureMap<T> ga =
          conv1d_backward(grad_pieces[s][li + 1], lc.activated[s], layer.conv, conv_grads[s]);
      grad_pieces[s][li + 1] = FeatureMap<T>();
      grad_normed[s] = relu_backward(ga, lc.activated[s]);
    });
    reduce_conv_grads(grads[li].conv, conv_grads);
    Batch<T> grad_joined = batchnorm_backward(grad_normed, lc.norm, layer.norm, grads[li].norm);
    parallel_for(n, threads, [&](std::size_t s) {
      std::size_t offset = 0;
      for (std::size_t j = 0; j <= li; ++j) {
        add_from_channels(grad_pieces[s][j], grad_joined[s], offset);
        offset += widths[j];
      }
    });
  }
  Batch<T> grad_in(n);
  for (std::size_t s = 0; s < n; ++s) grad_in[s] = std::move(grad_pieces[s][0]);
  return grad_in;
}

// ---------------------------------------------------------------------------
// Whole network

namespace {

template <typename T>
void check_input(const FeatureMap<T>& x, const ArchSpec& spec) {
  if (x.length() != spec.input_length || x.channels() != spec.input_channels) {
    throw ShapeError("model expects input " +
                     FeatureMap<T>::shape_string(spec.input_length, spec.input_channels) +
                     " (input_length " + std::to_string(spec.input_length) + "), got " +
                     x.shape());
  }
}

}  // namespace

template <typename T>
T forward(const FeatureMap<T>& x, const ModelParams<T>& params, std::vector<StageShape>* shapes) {
  const ArchSpec& spec = params.spec;
  check_input(x, spec);
  const std::vector<StageShape> ladder = shapes ? spec.ladder() : std::vector<StageShape>{};
  std::size_t row = 0;
  auto record = [&](const FeatureMap<T>& m) {
    if (!shapes) return;
    const StageShape& expected = ladder.at(row++);
    shapes->push_back({expected.stage, expected.layers, m.length(), m.channels()});
  };
  record(x);
  FeatureMap<T> h = conv1d_forward(x, params.stem);
  record(h);
  h = avgpool1d(h, spec.pool_window, spec.pool_stride);
  record(h);
  for (std::size_t b = 0; b < params.blocks.size(); ++b) {
    h = dense_block_forward(h, params.blocks[b]);
    record(h);
    if (b + 1 < params.blocks.size()) {
      h = avgpool1d(h, spec.pool_window, spec.pool_stride);
      record(h);
    }
  }
  h = global_avgpool(h);
  record(h);
  return linear_forward<T>(h.values(), params.head)[0];
}

template <typename T>
std::vector<T> forward_batch(const Batch<T>& inputs, ModelParams<T>& params, Mode mode,
                             ForwardCache<T>* cache, std::size_t threads) {
  const ArchSpec& spec = params.spec;
  if (inputs.empty()) throw ShapeError("forward_batch: empty batch");
  for (const auto& x : inputs) check_input(x, spec);
  const std::size_t n = inputs.size();

  Batch<T> h(n);
  std::size_t stem_length = 0;
  parallel_for(n, threads, [&](std::size_t s) {
    FeatureMap<T> stem_out = conv1d_forward(inputs[s], params.stem);
    h[s] = avgpool1d(stem_out, spec.pool_window, spec.pool_stride);
    if (s == 0) stem_length = stem_out.length();
  });
  if (cache) {
    cache->inputs = inputs;
    cache->stem_length = stem_length;
    cache->blocks.assign(params.blocks.size(), {});
    cache->block_lengths.assign(params.blocks.size(), 0);
  }
  for (std::size_t b = 0; b < params.blocks.size(); ++b) {
    h = dense_block_forward(h, params.blocks[b], mode, cache ? &cache->blocks[b] : nullptr, threads);
    if (cache) cache->block_lengths[b] = h.front().length();
    if (b + 1 < params.blocks.size()) {
      parallel_for(n, threads, [&](std::size_t s) {
        h[s] = avgpool1d(h[s], spec.pool_window, spec.pool_stride);
      });
    }
  }
  std::vector<T> scores(n);
  Batch<T> features(n);
  parallel_for(n, threads, [&](std::size_t s) {
    features[s] = global_avgpool(h[s]);
    scores[s] = linear_forward<T>(features[s].values(), params.head)[0];
  });
  if (cache) cache->features = std::move(features);
  return scores;
}

template <typename T>
ModelParams<T> backward(std::span<const T> grad_z, const ForwardCache<T>& cache,
                        const ModelParams<T>& params, std::size_t threads) {
  const ArchSpec& spec = params.spec;
  const std::size_t n = grad_z.size();
  if (cache.features.size() != n || cache.inputs.size() != n) {
    throw std::logic_error("backward: cache holds " + std::to_string(cache.features.size()) +
                           " samples but " + std::to_string(n) + " score gradients were given");
  }
  ModelParams<T> grads = params.zeros_like();

  const std::size_t blocks = params.blocks.size();
  const std::size_t stem_pooled = same_ceil(cache.stem_length, spec.pool_window, spec.pool_stride).out_length;
  const std::size_t final_length = blocks > 0 ? cache.block_lengths.back() : stem_pooled;

  Batch<T> g(n);
  for (std::size_t s = 0; s < n; ++s) {
    const T gz = grad_z[s];
    std::vector<T> gf = linear_backward<T>(std::span<const T>(&gz, 1), cache.features[s].values(),
                                           params.head, grads.head);
    const std::size_t dim = gf.size();
    g[s] = avgpool1d_backward(FeatureMap<T>(1, dim, std::move(gf)), final_length,
                              final_length, final_length);
  }
  for (std::size_t b = blocks; b-- > 0;) {
    g = dense_block_backward(g, cache.blocks[b], params.blocks[b], grads.blocks[b], threads);
    const std::size_t pool_in = b > 0 ? cache.block_lengths[b - 1] : cache.stem_length;
    if (b > 0) {
      parallel_for(n, threads, [&](std::size_t s) {
        g[s] = avgpool1d_backward(g[s], pool_in, spec.pool_window, spec.pool_stride);
      });
    }
  }
  std::vector<ConvParams<T>> stem_grads(n, params.stem.zeros_like());
  parallel_for(n, threads, [&](std::size_t s) {
    FeatureMap<T> gs = avgpool1d_backward(g[s], cache.stem_length, spec.pool_window, spec.pool_stride);
    conv1d_backward(gs, cache.inputs[s], params.stem, stem_grads[s], false);
  });
  reduce_conv_grads(grads.stem, stem_grads);
  return grads;
}

GradCheckReport check_model_gradients(const ArchSpec& spec, std::uint64_t seed, double tolerance,
                                      std::size_t batch, std::size_t directions) {
  ModelParams<double> params = build_model<double>(spec, InitRule::He, seed);
  std::mt19937_64 rng(seed ^ 0x9e3779b97f4a7c15ULL);
  std::uniform_real_distribution<double> uni(-0.5, 0.5);
  std::normal_distribution<double> normal(0.0, 1.0);
  for (auto& block : params.blocks)
    for (auto& layer : block) {
      for (double& v : layer.norm.gamma) v = 1.0 + uni(rng);
      for (double& v : layer.norm.beta) v = uni(rng);
      for (double& v : layer.conv.bias) v = 0.2 * uni(rng);
    }
  for (double& v : params.stem.bias) v = 0.2 * uni(rng);
  for (double& v : params.head.bias) v = uni(rng);

  Batch<double> inputs;
  std::vector<double> r(batch);
  for (std::size_t s = 0; s < batch; ++s) {
    FeatureMap<double> x(spec.input_length, spec.input_channels);
    for (double& v : x.values()) v = normal(rng);
    inputs.push_back(std::move(x));
    r[s] = uni(rng) + (s % 2 == 0 ? 1.0 : -1.0);
  }

  ForwardCache<double> cache;
  forward_batch(inputs, params, Mode::Train, &cache);
  ModelParams<double> grads = backward<double>(r, cache, params);

  // Sign pattern of every ReLU input, taken from the cached ReLU outputs.
  std::uint64_t last_pattern = 0;
  auto loss = [&] {
    ForwardCache<double> probe;
    std::vector<double> z = forward_batch(inputs, params, Mode::Train, &probe);
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (const auto& block : probe.blocks)
      for (const auto& layer : block.layers)
        for (const auto& map : layer.activated)
          for (double v : map.values()) h = (h ^ (v > 0.0 ? 1u : 0u)) * 0x100000001b3ULL;
    last_pattern = h;
    double total = 0.0;
    for (std::size_t s = 0; s < batch; ++s) total += r[s] * z[s];
    return total;
  };
  const PatternProbe pattern = [&] { return last_pattern; };

  std::vector<std::pair<std::string, std::span<const double>>> analytic;
  grads.for_each_parameter(
      [&](const std::string& name, std::span<const double> v) { analytic.emplace_back(name, v); });

  GradCheckReport report;
  report.layer = "model";
  report.tolerance = tolerance;
  report.trials = 1;
  std::size_t index = 0;
  params.for_each_parameter([&](const std::string& name, std::span<double> values) {
    const auto grad = analytic[index++].second;
    if (directions == 0) {
      report.groups.push_back(
          finite_difference_check(name, loss, values, grad, kFiniteDifferenceStep, pattern));
    } else {
      report.groups.push_back(
          directional_derivative_check(name, loss, values, grad, directions, rng(),
                                       kFiniteDifferenceStep, pattern));
    }
  });
  return report;
}

#define SEISNET_INSTANTIATE_MODEL(T)                                                          \
  template struct ModelParams<T>;                                                             \
  template ModelParams<T> build_model<T>(const ArchSpec&, InitRule, std::uint64_t);           \
  template std::size_t count_parameters<T>(const ModelParams<T>&);                            \
  template Batch<T> dense_block_forward<T>(const Batch<T>&, DenseBlockParams<T>&, Mode,        \
                                           DenseBlockCache<T>*, std::size_t);                 \
  template FeatureMap<T> dense_block_forward<T>(const FeatureMap<T>&,                         \
                                                const DenseBlockParams<T>&);                  \
  template Batch<T> dense_block_backward<T>(const Batch<T>&, const DenseBlockCache<T>&,        \
                                            const DenseBlockParams<T>&, DenseBlockParams<T>&,  \
                                            std::size_t);                                     \
  template T forward<T>(const FeatureMap<T>&, const ModelParams<T>&, std::vector<StageShape>*); \
  template std::vector<T> forward_batch<T>(const Batch<T>&, ModelParams<T>&, Mode,            \
                                           ForwardCache<T>*, std::size_t);                    \
  template ModelParams<T> backward<T>(std::span<const T>, const ForwardCache<T>&,              \
                                      const ModelParams<T>&, std::size_t);

SEISNET_INSTANTIATE_MODEL(float)
SEISNET_INSTANTIATE_MODEL(double)

#undef SEISNET_INSTANTIATE_MODEL

}  // namespace seisnet
