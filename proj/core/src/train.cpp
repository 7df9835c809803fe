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
#include "seisnet/train.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <random>
#include <sstream>

#include "seisnet/io.hpp"
#include "seisnet/parallel.hpp"

namespace seisnet {

namespace {

void check_label(int y) {
  if (y != 1 && y != -1) {
    throw std::invalid_argument("label must be -1 or +1, got " + std::to_string(y));
  }
}

}  // namespace

double logistic_loss(int y, double z) {
  check_label(y);
  const double m = y * z;
  // log(1 + e^{-m}) = max(-m, 0) + log1p(e^{-|m|})
  return std::max(-m, 0.0) + std::log1p(std::exp(-std::abs(m)));
}

double logistic_loss_grad(int y, double z) {
  check_label(y);
  const double m = y * z;
  // sigmoid(-m), evaluated on the side where exp cannot overflow
  const double s = m >= 0 ? std::exp(-m) / (1.0 + std::exp(-m)) : 1.0 / (1.0 + std::exp(m));
  return -y * s;
}

template <typename T>
std::vector<T> preprocess(std::span<const T> window) {
  if (window.size() < 2) throw ShapeError("preprocess: window needs at least 2 samples");
  double mean = 0.0;
  for (T v : window) mean += v;
  mean /= static_cast<double>(window.size());
  double var = 0.0;
  for (T v : window) var += (v - mean) * (v - mean);
  const double sd = std::sqrt(var / static_cast<double>(window.size()));
  std::vector<T> out(window.size(), T(0));
  if (sd < 1e-12) return out;
  for (std::size_t i = 0; i < window.size(); ++i)
    out[i] = static_cast<T>((window[i] - mean) / sd);
  return out;
}

template std::vector<float> preprocess<float>(std::span<const float>);
template std::vector<double> preprocess<double>(std::span<const double>);

std::string to_string(WindowSource source) {
  switch (source) {
    case WindowSource::Event: return "event";
    case WindowSource::PickedNegative: return "picked-negative";
    case WindowSource::RandomNegative: return "random-negative";
  }
  return "unknown";
}

// ---------------------------------------------------------------------------
// Adam

AdamState AdamState::for_model(const ModelParams<float>& params, const AdamConfig& config) {
  AdamState s;
  s.config = config;
  params.for_each_parameter([&](const std::string&, std::span<const float> values) {
    s.m.emplace_back(values.size(), 0.0f);
    s.v.emplace_back(values.size(), 0.0f);
  });
  return s;
}

void adam_update(std::span<float> param, std::span<const float> grad, std::span<float> m,
                 std::span<float> v, const AdamConfig& config, std::uint64_t t) {
  if (grad.size() != param.size() || m.size() != param.size() || v.size() != param.size()) {
    throw ShapeError("adam_update: parameter of " + std::to_string(param.size()) +
                     " values but gradient/moments of " + std::to_string(grad.size()) + "/" +
                     std::to_string(m.size()) + "/" + std::to_string(v.size()));
  }
  if (t == 0) throw std::invalid_argument("adam_update: step counter starts at 1");
  const double c1 = 1.0 - std::pow(config.beta1, static_cast<double>(t));
  const double c2 = 1.0 - std::pow(config.beta2, static_cast<double>(t));
  for (std::size_t i = 0; i < param.size(); ++i) {
    const double g = grad[i];
    const double mi = config.beta1 * m[i] + (1.0 - config.beta1) * g;
    const double vi = config.beta2 * v[i] + (1.0 - config.beta2) * g * g;
    m[i] = static_cast<float>(mi);
    v[i] = static_cast<float>(vi);
    const double step = config.lr * (mi / c1) / (std::sqrt(vi / c2) + config.eps);
    param[i] = static_cast<float>(param[i] - step);
  }
}

void adam_step(ModelParams<float>& params, const ModelParams<float>& grads, AdamState& state) {
  std::vector<std::span<const float>> g;
  grads.for_each_parameter([&](const std::string&, std::span<const float> v) { g.push_back(v); });
  std::size_t tensors = 0;
  params.for_each_parameter([&](const std::string&, std::span<float>) { ++tensors; });
  if (g.size() != tensors || state.m.size() != tensors || state.v.size() != tensors) {
    throw ShapeError("adam_step: gradient or optimizer state does not mirror the model");
  }
  ++state.t;
  std::size_t i = 0;
  params.for_each_parameter([&](const std::string&, std::span<float> p) {
    adam_update(p, g[i], state.m[i], state.v[i], state.config, state.t);
    ++i;
  });
}

namespace {
constexpr std::string_view kAdamMagic = "SEISADAM";
}

void save_adam_state(const AdamState& state, const std::filesystem::path& path) {
  ByteWriter w;
  w.bytes(kAdamMagic);
  w.u32(1);
  w.f64(state.config.lr);
  w.f64(state.config.beta1);
  w.f64(state.config.beta2);
  w.f64(state.config.eps);
  w.u64(state.t);
  w.u64(state.epochs_completed);
  w.u32(static_cast<std::uint32_t>(state.m.size()));
  for (std::size_t i = 0; i < state.m.size(); ++i) {
    w.u64(state.m[i].size());
    w.f32s(state.m[i]);
    w.f32s(state.v[i]);
  }
  w.u64(fnv1a64(w.buffer().data(), w.size()));
  atomic_write_file(path, w.buffer());
}

AdamState load_adam_state(const std::filesystem::path& path) {
  const std::string data = read_file(path);
  ByteReader r(data, "optimizer state " + path.string());
  if (r.bytes(kAdamMagic.size()) != kAdamMagic) r.fail("bad magic");
  if (r.u32() != 1) r.fail("unsupported version");
  AdamState s;
  s.config.lr = r.f64();
  s.config.beta1 = r.f64();
  s.config.beta2 = r.f64();
  s.config.eps = r.f64();
  s.t = r.u64();
  s.epochs_completed = r.u64();
  const std::uint32_t n = r.u32();
  for (std::uint32_t i = 0; i < n; ++i) {
    const std::uint64_t count = r.u64();
    if (count > r.remaining() / 8) r.fail("tensor count exceeds file size");
    s.m.emplace_back(count);
    s.v.emplace_back(count);
    r.f32s(s.m.back());
    r.f32s(s.v.back());
  }
  const std::size_t body = r.offset();
  if (r.u64() != fnv1a64(data.data(), body)) r.fail("checksum mismatch");
  return s;
}

// ---------------------------------------------------------------------------
// Configuration

void TrainConfig::validate() const {
  if (batch_size == 0) throw ConfigError("batch_size must be >= 1");
  if (!(adam.lr >= 0.0)) throw ConfigError("learning rate must be >= 0");
  if (!(adam.beta1 >= 0.0 && adam.beta1 < 1.0 && adam.beta2 >= 0.0 && adam.beta2 < 1.0)) {
    throw ConfigError("Adam betas must lie in [0, 1)");
  }
  if (!(adam.eps > 0.0)) throw ConfigError("Adam eps must be > 0");
  if (checkpoint_every > 0 && checkpoint_dir.empty()) {
    throw ConfigError("checkpoint_every needs checkpoint_dir");
  }
  if (threads == 0) throw ConfigError("threads must be >= 1");
}

TrainConfig TrainConfig::from_config(const KeyValueConfig& cfg) {
  TrainConfig c;
  c.batch_size = cfg.get_size("batch_size", c.batch_size);
  c.epochs = cfg.get_size("epochs", c.epochs);
  c.adam.lr = cfg.get_double("lr", c.adam.lr);
  c.adam.beta1 = cfg.get_double("beta1", c.adam.beta1);
  c.adam.beta2 = cfg.get_double("beta2", c.adam.beta2);
  c.adam.eps = cfg.get_double("eps", c.adam.eps);
  c.seed = cfg.get_u64("seed", c.seed);
  c.checkpoint_every = cfg.get_size("checkpoint_every", c.checkpoint_every);
  c.checkpoint_dir = cfg.get_string("checkpoint_dir", c.checkpoint_dir.string());
  c.oversample_positives = cfg.get_bool("oversample_positives", c.oversample_positives);
  c.recalibrate_bn = cfg.get_bool("recalibrate_bn", c.recalibrate_bn);
  c.threads = cfg.get_size("threads", c.threads);
  c.validate();
  return c;
}

std::string TrainConfig::to_config() const {
  std::ostringstream out;
  out.precision(17);
  out << "batch_size = " << batch_size << "\n"
      << "epochs = " << epochs << "\n"
      << "lr = " << adam.lr << "\n"
      << "beta1 = " << adam.beta1 << "\n"
      << "beta2 = " << adam.beta2 << "\n"
      << "eps = " << adam.eps << "\n"
      << "seed = " << seed << "\n"
      << "checkpoint_every = " << checkpoint_every << "\n"
      << "checkpoint_dir = " << checkpoint_dir.string() << "\n"
      << "oversample_positives = " << (oversample_positives ? "true" : "false") << "\n"
      << "recalibrate_bn = " << (recalibrate_bn ? "true" : "false") << "\n"
      << "threads = " << threads << "\n";
  return out.str();
}

// ---------------------------------------------------------------------------
// Training loop

namespace {

std::vector<std::size_t> epoch_pool(const std::vector<LabeledWindow>& dataset, bool oversample) {
  std::vector<std::size_t> pool(dataset.size());
  std::iota(pool.begin(), pool.end(), 0);
  if (!oversample) return pool;
  std::size_t pos = 0;
  for (const auto& w : dataset) pos += w.label == 1 ? 1 : 0;
  const std::size_t neg = dataset.size() - pos;
  const std::size_t repeats = pos > 0 ? std::max<std::size_t>(1, neg / pos) : 1;
  for (std::size_t i = 0; i < dataset.size(); ++i)
    if (dataset[i].label == 1)
      for (std::size_t r = 1; r < repeats; ++r) pool.push_back(i);
  return pool;
}

void shuffle(std::vector<std::size_t>& v, std::mt19937_64& rng) {
  for (std::size_t i = v.size(); i > 1; --i) {
    const std::size_t j = static_cast<std::size_t>(rng() % i);
    std::swap(v[i - 1], v[j]);
  }
}

std::filesystem::path checkpoint_stem(const TrainConfig& cfg, std::size_t epoch) {
  char name[64];
  std::snprintf(name, sizeof(name), "checkpoint_epoch%04zu", epoch);
  return cfg.checkpoint_dir / name;
}

}  // namespace

TrainResult train(const std::vector<LabeledWindow>& dataset, ModelParams<float> model,
                  const TrainConfig& cfg, const AdamState* resume, const EpochCallback& on_epoch) {
  cfg.validate();
  bool has_pos = false;
  bool has_neg = false;
  for (const auto& w : dataset) {
    check_label(w.label);
    if (w.samples.size() != model.spec.input_length) {
      throw ShapeError("training window from " + w.trace_id + "@" + std::to_string(w.start) +
                       " has " + std::to_string(w.samples.size()) + " samples, model expects " +
                       std::to_string(model.spec.input_length));
    }
    has_pos |= w.label == 1;
    has_neg |= w.label == -1;
  }
  if (!has_pos || !has_neg) {
    throw ConfigError("training set must contain both positive and negative windows");
  }

  TrainResult result;
  result.optimizer = resume ? *resume : AdamState::for_model(model, cfg.adam);
  if (resume) result.optimizer.config = cfg.adam;

  const std::vector<std::size_t> pool = epoch_pool(dataset, cfg.oversample_positives);

  for (std::size_t epoch = 1; epoch <= cfg.epochs; ++epoch) {
    // Permutation depends only on (seed, absolute epoch) so resumed runs line up.
    const std::uint64_t absolute_epoch = result.optimizer.epochs_completed + 1;
    std::mt19937_64 rng(cfg.seed ^ (absolute_epoch * 0x9e3779b97f4a7c15ULL));
    std::vector<std::size_t> order = pool;
    shuffle(order, rng);
    double loss_sum = 0.0;
    std::size_t correct = 0;
    for (std::size_t begin = 0; begin < order.size(); begin += cfg.batch_size) {
      const std::size_t end = std::min(order.size(), begin + cfg.batch_size);
      const std::size_t n = end - begin;
      Batch<float> inputs;
      inputs.reserve(n);
      for (std::size_t i = begin; i < end; ++i) {
        const auto& w = dataset[order[i]];
        inputs.emplace_back(w.samples.size(), 1, w.samples);
      }
      ForwardCache<float> cache;
      const std::vector<float> z = forward_batch(inputs, model, Mode::Train, &cache, cfg.threads);
      inputs.clear();
      std::vector<float> grad_z(n);
      for (std::size_t s = 0; s < n; ++s) {
        const int y = dataset[order[begin + s]].label;
        loss_sum += logistic_loss(y, z[s]);
        correct += (z[s] > 0.0f ? 1 : -1) == y ? 1 : 0;
        grad_z[s] = static_cast<float>(logistic_loss_grad(y, z[s]) / static_cast<double>(n));
      }
      ModelParams<float> grads = backward<float>(grad_z, cache, model, cfg.threads);
      adam_step(model, grads, result.optimizer);
      ++model.step;
    }
    result.optimizer.epochs_completed = absolute_epoch;
    EpochStats stats{static_cast<std::size_t>(absolute_epoch), loss_sum / static_cast<double>(order.size()),
                     static_cast<double>(correct) / static_cast<double>(order.size())};
    result.history.push_back(stats);
    if (on_epoch) on_epoch(stats);
    if (cfg.checkpoint_every > 0 && epoch % cfg.checkpoint_every == 0) {
      std::filesystem::create_directories(cfg.checkpoint_dir);
      const auto stem = checkpoint_stem(cfg, absolute_epoch);
      save_weights(model, stem.string() + ".weights");
      save_adam_state(result.optimizer, stem.string() + ".adam");
    }
  }
  if (cfg.recalibrate_bn && cfg.epochs > 0) {
    // Batches drawn like those of the next epoch, so the averaged statistics
    // match the class mix the weights were trained under.
    std::mt19937_64 rng(cfg.seed ^ ((result.optimizer.epochs_completed + 1) * 0x9e3779b97f4a7c15ULL));
    std::vector<std::size_t> order = pool;
    shuffle(order, rng);
    recalibrate_batchnorm(model, dataset, cfg.batch_size, cfg.threads, order);
  }
  result.params = std::move(model);
  return result;
}

void recalibrate_batchnorm(ModelParams<float>& model, const std::vector<LabeledWindow>& windows,
                           std::size_t batch_size, std::size_t threads,
                           std::span<const std::size_t> order) {
  std::vector<std::size_t> all;
  if (order.empty()) {
    all.resize(windows.size());
    std::iota(all.begin(), all.end(), 0);
    order = all;
  }
  if (order.empty() || batch_size == 0) return;
  std::vector<float> saved;
  for (auto& block : model.blocks)
    for (auto& layer : block) {
      saved.push_back(layer.norm.momentum);
      layer.norm.has_running_stats = false;
    }
  std::size_t seen = 0;
  for (std::size_t begin = 0; begin < order.size(); begin += batch_size) {
    const std::size_t end = std::min(order.size(), begin + batch_size);
    // Running average: the new batch gets weight n / (seen + n).
    const float keep =
        static_cast<float>(static_cast<double>(seen) / static_cast<double>(seen + end - begin));
    for (auto& block : model.blocks)
      for (auto& layer : block) layer.norm.momentum = keep;
    Batch<float> inputs;
    for (std::size_t i = begin; i < end; ++i) {
      const auto& w = windows.at(order[i]);
      inputs.emplace_back(w.samples.size(), 1, w.samples);
    }
    forward_batch<float>(inputs, model, Mode::Train, nullptr, threads);
    seen += end - begin;
  }
  std::size_t k = 0;
  for (auto& block : model.blocks)
    for (auto& layer : block) layer.norm.momentum = saved[k++];
}

std::vector<float> score_windows(const std::vector<LabeledWindow>& windows,
                                 const ModelParams<float>& model, std::size_t threads) {
  std::vector<float> scores(windows.size());
  parallel_for(windows.size(), threads, [&](std::size_t i) {
    FeatureMap<float> x(windows[i].samples.size(), 1, windows[i].samples);
    scores[i] = forward(x, model);
  });
  return scores;
}

std::string history_csv(const std::vector<EpochStats>& history) {
  std::string out = "epoch,mean_loss,train_accuracy\n";
  char line[128];
  for (const auto& h : history) {
    std::snprintf(line, sizeof(line), "%zu,%.9g,%.6f\n", h.epoch, h.mean_loss, h.train_accuracy);
    out += line;
  }
  return out;
}

}  // namespace seisnet
