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
#include "seisnet/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <random>
#include <vector>

#include "seisnet/layers.hpp"

namespace seisnet {

double relative_error(double analytic, double numeric) {
  const double denom = std::max({std::abs(analytic), std::abs(numeric), kRelativeErrorFloor});
  return std::abs(analytic - numeric) / denom;
}

double GradCheckReport::max_relative_error() const {
  double worst = 0.0;
  for (const auto& g : groups) worst = std::max(worst, g.max_relative_error);
  return worst;
}

std::string GradCheckReport::summary() const {
  std::string out;
  char line[256];
  for (const auto& g : groups) {
    std::snprintf(line, sizeof(line), "%s/%s max_rel=%.3e (n=%zu)\n", layer.c_str(),
                  g.name.c_str(), g.max_relative_error, g.checked);
    out += line;
  }
  return out;
}

namespace {

// `place(h)` puts the parameters at offset h along the probed direction. Over
// a short step every ReLU input moves linearly, so equal patterns at both ends
// mean no sign change in between.
double central_difference(const std::function<double()>& loss,
                          const std::function<void(double)>& place, double step,
                          const PatternProbe& pattern) {
  double h = step;
  for (int reductions = 0;; ++reductions) {
    place(h);
    const double up = loss();
    const std::uint64_t up_pattern = pattern ? pattern() : 0;
    place(-h);
    const double down = loss();
    const bool smooth = !pattern || pattern() == up_pattern;
    place(0.0);
    if (smooth || reductions == kMaxStepReductions) return (up - down) / (2.0 * h);
    h /= 10.0;
  }
}

}  // namespace

GradGroupResult finite_difference_check(const std::string& name,
                                        const std::function<double()>& loss,
                                        std::span<double> values,
                                        std::span<const double> analytic, double step,
                                        const PatternProbe& pattern) {
  GradGroupResult result{name, 0.0, values.size()};
  for (std::size_t i = 0; i < values.size(); ++i) {
    const double original = values[i];
    const double numeric = central_difference(
        loss, [&](double h) { values[i] = original + h; }, step, pattern);
    values[i] = original;
    result.max_relative_error =
        std::max(result.max_relative_error, relative_error(analytic[i], numeric));
  }
  return result;
}

GradGroupResult directional_derivative_check(const std::string& name,
                                             const std::function<double()>& loss,
                                             std::span<double> values,
                                             std::span<const double> analytic,
                                             std::size_t directions, std::uint64_t seed,
                                             double step, const PatternProbe& pattern) {
  GradGroupResult result{name, 0.0, directions};
  if (values.empty()) {
    result.checked = 0;
    return result;
  }
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  const std::vector<double> original(values.begin(), values.end());
  std::vector<double> dir(values.size());
  for (std::size_t d = 0; d < directions; ++d) {
    double norm = 0.0;
    for (double& v : dir) {
      v = normal(rng);
      norm += v * v;
    }
    norm = std::sqrt(norm);
    double expected = 0.0;
    for (std::size_t i = 0; i < dir.size(); ++i) {
      dir[i] /= norm;
      expected += analytic[i] * dir[i];
    }
    const double numeric = central_difference(
        loss,
        [&](double h) {
          for (std::size_t i = 0; i < dir.size(); ++i) values[i] = original[i] + h * dir[i];
        },
        step, pattern);
    std::copy(original.begin(), original.end(), values.begin());
    result.max_relative_error =
        std::max(result.max_relative_error, relative_error(expected, numeric));
  }
  return result;
}

void merge_group(GradCheckReport& report, const GradGroupResult& result) {
  for (auto& g : report.groups) {
    if (g.name == result.name) {
      g.max_relative_error = std::max(g.max_relative_error, result.max_relative_error);
      g.checked += result.checked;
      return;
    }
  }
  report.groups.push_back(result);
}

std::string to_string(LayerKind kind) {
  switch (kind) {
    case LayerKind::Conv1d: return "conv1d";
    case LayerKind::AvgPool1d: return "avgpool1d";
    case LayerKind::BatchNorm: return "batchnorm";
    case LayerKind::Relu: return "relu";
    case LayerKind::Linear: return "linear";
    case LayerKind::Concat: return "concat";
  }
  return "unknown";
}

std::optional<LayerKind> parse_layer_kind(const std::string& name) {
  for (LayerKind k : all_layer_kinds())
    if (to_string(k) == name) return k;
  return std::nullopt;
}

std::vector<LayerKind> all_layer_kinds() {
  return {LayerKind::Conv1d, LayerKind::AvgPool1d, LayerKind::BatchNorm,
          LayerKind::Relu,   LayerKind::Linear,    LayerKind::Concat};
}

namespace {

using Rng = std::mt19937_64;

std::size_t pick(Rng& rng, std::size_t lo, std::size_t hi) {
  return std::uniform_int_distribution<std::size_t>(lo, hi)(rng);
}

void fill_uniform(std::span<double> v, Rng& rng, double lo = -1.0, double hi = 1.0) {
  std::uniform_real_distribution<double> dist(lo, hi);
  for (double& x : v) x = dist(rng);
}

FeatureMap<double> random_map(Rng& rng, std::size_t len, std::size_t ch) {
  FeatureMap<double> m(len, ch);
  fill_uniform(m.values(), rng);
  return m;
}

double weighted_sum(const FeatureMap<double>& y, const FeatureMap<double>& r) {
  double s = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) s += y.values()[i] * r.values()[i];
  return s;
}

void conv_trial(GradCheckReport& report, Rng& rng, bool canonical) {
  const std::size_t len = canonical ? 11 : pick(rng, 3, 16);
  const std::size_t k = canonical ? 3 : pick(rng, 1, 5);
  const std::size_t ci = canonical ? 2 : pick(rng, 1, 4);
  const std::size_t co = canonical ? 3 : pick(rng, 1, 4);
  const std::size_t stride = canonical ? 1 : pick(rng, 1, 3);
  ConvParams<double> p(k, ci, co, stride);
  fill_uniform(p.kernel, rng);
  fill_uniform(p.bias, rng);
  FeatureMap<double> x = random_map(rng, len, ci);
  const FeatureMap<double> r = random_map(rng, same_ceil(len, k, stride).out_length, co);

  ConvParams<double> grads = p.zeros_like();
  FeatureMap<double> gx = conv1d_backward(r, x, p, grads);
  auto loss = [&] { return weighted_sum(conv1d_forward(x, p), r); };
  merge_group(report, finite_difference_check("input", loss, x.values(), gx.values()));
  merge_group(report, finite_difference_check("kernel", loss, p.kernel, grads.kernel));
  merge_group(report, finite_difference_check("bias", loss, p.bias, grads.bias));
}

void pool_trial(GradCheckReport& report, Rng& rng) {
  const std::size_t len = pick(rng, 1, 16);
  const std::size_t window = pick(rng, 1, 5);
  const std::size_t stride = pick(rng, 1, 4);
  const std::size_t ch = pick(rng, 1, 3);
  FeatureMap<double> x = random_map(rng, len, ch);
  const FeatureMap<double> r = random_map(rng, same_ceil(len, window, stride).out_length, ch);
  FeatureMap<double> gx = avgpool1d_backward(r, len, window, stride);
  auto loss = [&] { return weighted_sum(avgpool1d(x, window, stride), r); };
  merge_group(report, finite_difference_check("input", loss, x.values(), gx.values()));
}

void batchnorm_trial(GradCheckReport& report, Rng& rng) {
  const std::size_t batch = pick(rng, 2, 4);
  const std::size_t len = pick(rng, 2, 8);
  const std::size_t ch = pick(rng, 1, 3);
  BatchNormParams<double> p(ch);
  fill_uniform(p.gamma, rng, 0.5, 1.5);
  fill_uniform(p.beta, rng);
  Batch<double> x;
  Batch<double> r;
  for (std::size_t b = 0; b < batch; ++b) {
    x.push_back(random_map(rng, len, ch));
    r.push_back(random_map(rng, len, ch));
  }
  BatchNormCache<double> cache;
  BatchNormParams<double> scratch = p;
  batchnorm_forward(x, scratch, Mode::Train, &cache);
  BatchNormParams<double> grads = p.zeros_like();
  Batch<double> gx = batchnorm_backward(r, cache, p, grads);

  auto loss = [&] {
    BatchNormParams<double> local = p;
    Batch<double> y = batchnorm_forward(x, local, Mode::Train);
    double s = 0.0;
    for (std::size_t b = 0; b < batch; ++b) s += weighted_sum(y[b], r[b]);
    return s;
  };
  for (std::size_t b = 0; b < batch; ++b) {
    merge_group(report, finite_difference_check("input", loss, x[b].values(), gx[b].values()));
  }
  merge_group(report, finite_difference_check("gamma", loss, p.gamma, grads.gamma));
  merge_group(report, finite_difference_check("beta", loss, p.beta, grads.beta));
}

void relu_trial(GradCheckReport& report, Rng& rng) {
  const std::size_t len = pick(rng, 1, 16);
  const std::size_t ch = pick(rng, 1, 3);
  FeatureMap<double> x = random_map(rng, len, ch);
  // Keep every sample at least 1e-3 away from the kink.
  for (double& v : x.values())
    if (std::abs(v) < 1e-3) v = v < 0 ? -1e-3 - std::abs(v) : 1e-3 + v;
  const FeatureMap<double> r = random_map(rng, len, ch);
  FeatureMap<double> gx = relu_backward(r, x);
  auto loss = [&] { return weighted_sum(relu(x), r); };
  merge_group(report, finite_difference_check("input", loss, x.values(), gx.values()));
}

void linear_trial(GradCheckReport& report, Rng& rng) {
  const std::size_t in = pick(rng, 1, 12);
  const std::size_t out = pick(rng, 1, 4);
  LinearParams<double> p(in, out);
  fill_uniform(p.weight, rng);
  fill_uniform(p.bias, rng);
  std::vector<double> x(in), r(out);
  fill_uniform(x, rng);
  fill_uniform(r, rng);
  LinearParams<double> grads = p.zeros_like();
  std::vector<double> gx = linear_backward<double>(r, x, p, grads);
  auto loss = [&] {
    std::vector<double> y = linear_forward<double>(x, p);
    double s = 0.0;
    for (std::size_t i = 0; i < out; ++i) s += y[i] * r[i];
    return s;
  };
  merge_group(report, finite_difference_check("input", loss, x, gx));
  merge_group(report, finite_difference_check("weight", loss, p.weight, grads.weight));
  merge_group(report, finite_difference_check("bias", loss, p.bias, grads.bias));
}

void concat_trial(GradCheckReport& report, Rng& rng) {
  const std::size_t len = pick(rng, 1, 10);
  const std::size_t parts = pick(rng, 1, 3);
  std::vector<FeatureMap<double>> xs;
  std::size_t total = 0;
  for (std::size_t i = 0; i < parts; ++i) {
    xs.push_back(random_map(rng, len, pick(rng, 1, 3)));
    total += xs.back().channels();
  }
  const FeatureMap<double> r = random_map(rng, len, total);
  auto loss = [&] { return weighted_sum(concat_channels<double>(xs), r); };
  std::size_t offset = 0;
  for (auto& x : xs) {
    FeatureMap<double> gx = slice_channels(r, offset, x.channels());
    offset += x.channels();
    merge_group(report, finite_difference_check("input", loss, x.values(), gx.values()));
  }
}

}  // namespace

GradCheckReport check_gradients(LayerKind layer, std::size_t trial_count, double tolerance,
                                std::uint64_t seed) {
  GradCheckReport report;
  report.layer = to_string(layer);
  report.tolerance = tolerance;
  report.trials = trial_count;
  Rng rng(seed);
  for (std::size_t trial = 0; trial < trial_count; ++trial) {
    switch (layer) {
      case LayerKind::Conv1d: conv_trial(report, rng, trial == 0); break;
      case LayerKind::AvgPool1d: pool_trial(report, rng); break;
      case LayerKind::BatchNorm: batchnorm_trial(report, rng); break;
      case LayerKind::Relu: relu_trial(report, rng); break;
      case LayerKind::Linear: linear_trial(report, rng); break;
      case LayerKind::Concat: concat_trial(report, rng); break;
    }
  }
  return report;
}

}  // namespace seisnet
