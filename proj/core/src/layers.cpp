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
#include "seisnet/layers.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>

#include <Eigen/Core>

namespace seisnet {

template <typename T>
bool all_finite(std::span<const T> values) {
  return std::all_of(values.begin(), values.end(), [](T v) { return std::isfinite(v); });
}

Padding same_ceil(std::size_t in_length, std::size_t window, std::size_t stride) {
  if (in_length == 0 || window == 0 || stride == 0) {
    throw ShapeError("same_ceil requires positive length, window and stride (got " +
                     std::to_string(in_length) + ", " + std::to_string(window) + ", " +
                     std::to_string(stride) + ")");
  }
  Padding pad;
  pad.out_length = (in_length + stride - 1) / stride;
  std::size_t covered = (pad.out_length - 1) * stride + window;
  std::size_t total = covered > in_length ? covered - in_length : 0;
  pad.left = total / 2;
  return pad;
}

// ---------------------------------------------------------------------------
// Convolution

template <typename T>
ConvParams<T>::ConvParams(std::size_t kernel_size, std::size_t in_channels,
                          std::size_t out_channels, std::size_t stride)
    : kernel_size(kernel_size),
      in_channels(in_channels),
      out_channels(out_channels),
      stride(stride),
      kernel(kernel_size * in_channels * out_channels, T(0)),
      bias(out_channels, T(0)) {
  check();
}

template <typename T>
void ConvParams<T>::check() const {
  if (kernel_size == 0 || stride == 0 || in_channels == 0 || out_channels == 0) {
    throw ShapeError("conv params need kernel_size, stride and channel counts >= 1");
  }
  if (kernel.size() != kernel_size * in_channels * out_channels || bias.size() != out_channels) {
    throw ShapeError("conv params storage does not match geometry k=" +
                     std::to_string(kernel_size) + " " + std::to_string(in_channels) + "->" +
                     std::to_string(out_channels));
  }
}

namespace {

template <typename T>
using RowMat = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
template <typename T>
using StridedRows = Eigen::Map<RowMat<T>, 0, Eigen::OuterStride<>>;
template <typename T>
using ConstStridedRows = Eigen::Map<const RowMat<T>, 0, Eigen::OuterStride<>>;

// Output rows [begin, end) whose input row t*stride + k - pad is in bounds.
struct TapRange {
  std::size_t begin = 0;
  std::size_t end = 0;
  std::size_t first_input = 0;
};

TapRange tap_range(std::size_t k, const Padding& pad, std::size_t in_len, std::size_t stride) {
  TapRange r;
  const auto offset = static_cast<std::int64_t>(k) - static_cast<std::int64_t>(pad.left);
  const auto s = static_cast<std::int64_t>(stride);
  const std::int64_t lo = offset >= 0 ? 0 : (-offset + s - 1) / s;
  const std::int64_t last_input = static_cast<std::int64_t>(in_len) - 1 - offset;
  if (last_input < 0) return r;
  const std::int64_t hi = std::min<std::int64_t>(static_cast<std::int64_t>(pad.out_length),
                                                 last_input / s + 1);
  if (hi <= lo) return r;
  r.begin = static_cast<std::size_t>(lo);
  r.end = static_cast<std::size_t>(hi);
  r.first_input = static_cast<std::size_t>(lo * s + offset);
  return r;
}

}  // namespace

// Each kernel tap k is one strided GEMM: out[t] += x[t*s + k - pad] * W_k.
template <typename T>
FeatureMap<T> conv1d_forward(const FeatureMap<T>& x, const ConvParams<T>& p) {
  if (x.empty() || x.channels() != p.in_channels) {
    throw ShapeError("conv1d_forward: input " + x.shape() + " does not match kernel " +
                     std::to_string(p.kernel_size) + "x" + std::to_string(p.in_channels) + "x" +
                     std::to_string(p.out_channels));
  }
  const std::size_t in_len = x.length();
  const std::size_t ci_n = p.in_channels;
  const std::size_t co_n = p.out_channels;
  const Padding pad = same_ceil(in_len, p.kernel_size, p.stride);
  FeatureMap<T> out(pad.out_length, co_n);
  for (std::size_t t = 0; t < pad.out_length; ++t)
    std::copy(p.bias.begin(), p.bias.end(), out.data() + t * co_n);

  const auto stride = static_cast<Eigen::Index>(p.stride * ci_n);
  for (std::size_t k = 0; k < p.kernel_size; ++k) {
    const TapRange r = tap_range(k, pad, in_len, p.stride);
    if (r.end == r.begin) continue;
    const auto rows = static_cast<Eigen::Index>(r.end - r.begin);
    ConstStridedRows<T> xs(x.data() + r.first_input * ci_n, rows, static_cast<Eigen::Index>(ci_n),
                           Eigen::OuterStride<>(stride));
    Eigen::Map<const RowMat<T>> w(p.kernel.data() + k * ci_n * co_n,
                                  static_cast<Eigen::Index>(ci_n), static_cast<Eigen::Index>(co_n));
    Eigen::Map<RowMat<T>> o(out.data() + r.begin * co_n, rows, static_cast<Eigen::Index>(co_n));
    o.noalias() += xs * w;
  }
  return out;
}

template <typename T>
FeatureMap<T> conv1d_backward(const FeatureMap<T>& grad_out, const FeatureMap<T>& saved_input,
                              const ConvParams<T>& p, ConvParams<T>& grads,
                              bool need_input_grad) {
  if (saved_input.empty()) {
    throw std::logic_error("conv1d_backward: missing saved input activation");
  }
  if (saved_input.channels() != p.in_channels) {
    throw ShapeError("conv1d_backward: saved input " + saved_input.shape() +
                     " does not match kernel input channels " + std::to_string(p.in_channels));
  }
  const std::size_t in_len = saved_input.length();
  const std::size_t ci_n = p.in_channels;
  const std::size_t co_n = p.out_channels;
  const Padding pad = same_ceil(in_len, p.kernel_size, p.stride);
  if (grad_out.length() != pad.out_length || grad_out.channels() != co_n) {
    throw ShapeError("conv1d_backward: grad_out " + grad_out.shape() + " but forward output was " +
                     FeatureMap<T>::shape_string(pad.out_length, co_n));
  }
  if (grads.kernel.size() != p.kernel.size() || grads.bias.size() != p.bias.size()) {
    throw ShapeError("conv1d_backward: gradient buffer geometry differs from parameters");
  }

  for (std::size_t t = 0; t < pad.out_length; ++t) {
    const T* g = grad_out.data() + t * co_n;
    for (std::size_t co = 0; co < co_n; ++co) grads.bias[co] += g[co];
  }
  FeatureMap<T> grad_x;
  if (need_input_grad) grad_x = FeatureMap<T>(in_len, ci_n);

  const auto stride = static_cast<Eigen::Index>(p.stride * ci_n);
  const auto ci = static_cast<Eigen::Index>(ci_n);
  const auto co = static_cast<Eigen::Index>(co_n);
  for (std::size_t k = 0; k < p.kernel_size; ++k) {
    const TapRange r = tap_range(k, pad, in_len, p.stride);
    if (r.end == r.begin) continue;
    const auto rows = static_cast<Eigen::Index>(r.end - r.begin);
    Eigen::Map<const RowMat<T>> g(grad_out.data() + r.begin * co_n, rows, co);
    ConstStridedRows<T> xs(saved_input.data() + r.first_input * ci_n, rows, ci,
                           Eigen::OuterStride<>(stride));
    Eigen::Map<RowMat<T>> gw(grads.kernel.data() + k * ci_n * co_n, ci, co);
    gw.noalias() += xs.transpose() * g;
    if (need_input_grad) {
      Eigen::Map<const RowMat<T>> w(p.kernel.data() + k * ci_n * co_n, ci, co);
      StridedRows<T> gx(grad_x.data() + r.first_input * ci_n, rows, ci,
                        Eigen::OuterStride<>(stride));
      gx.noalias() += g * w.transpose();
    }
  }
  return grad_x;
}

// ---------------------------------------------------------------------------
// Average pooling

namespace {

struct PoolWindow {
  std::size_t begin;
  std::size_t end;
};

PoolWindow pool_window(std::size_t t, const Padding& pad, std::size_t window, std::size_t stride,
                       std::size_t in_len) {
  const std::int64_t lo =
      static_cast<std::int64_t>(t * stride) - static_cast<std::int64_t>(pad.left);
  const std::int64_t hi = lo + static_cast<std::int64_t>(window);
  PoolWindow w;
  w.begin = static_cast<std::size_t>(std::max<std::int64_t>(lo, 0));
  w.end = static_cast<std::size_t>(std::min<std::int64_t>(hi, static_cast<std::int64_t>(in_len)));
  return w;
}

}  // namespace

template <typename T>
FeatureMap<T> avgpool1d(const FeatureMap<T>& x, std::size_t window, std::size_t stride) {
  if (x.empty()) throw ShapeError("avgpool1d: empty input");
  const Padding pad = same_ceil(x.length(), window, stride);
  const std::size_t c_n = x.channels();
  FeatureMap<T> out(pad.out_length, c_n);
  for (std::size_t t = 0; t < pad.out_length; ++t) {
    const PoolWindow w = pool_window(t, pad, window, stride, x.length());
    T* o = out.data() + t * c_n;
    for (std::size_t i = w.begin; i < w.end; ++i) {
      const T* xr = x.data() + i * c_n;
      for (std::size_t c = 0; c < c_n; ++c) o[c] += xr[c];
    }
    const T count = static_cast<T>(w.end - w.begin);
    for (std::size_t c = 0; c < c_n; ++c) o[c] /= count;
  }
  return out;
}

template <typename T>
FeatureMap<T> avgpool1d_backward(const FeatureMap<T>& grad_out, std::size_t input_length,
                                 std::size_t window, std::size_t stride) {
  const Padding pad = same_ceil(input_length, window, stride);
  if (grad_out.length() != pad.out_length) {
    throw ShapeError("avgpool1d_backward: grad_out " + grad_out.shape() +
                     " but forward output length was " + std::to_string(pad.out_length));
  }
  const std::size_t c_n = grad_out.channels();
  FeatureMap<T> grad_x(input_length, c_n);
  for (std::size_t t = 0; t < pad.out_length; ++t) {
    const PoolWindow w = pool_window(t, pad, window, stride, input_length);
    const T scale = T(1) / static_cast<T>(w.end - w.begin);
    const T* g = grad_out.data() + t * c_n;
    for (std::size_t i = w.begin; i < w.end; ++i) {
      T* gx = grad_x.data() + i * c_n;
      for (std::size_t c = 0; c < c_n; ++c) gx[c] += g[c] * scale;
    }
  }
  return grad_x;
}

// ---------------------------------------------------------------------------
// Batch normalization

template <typename T>
BatchNormParams<T>::BatchNormParams(std::size_t channels)
    : gamma(channels, T(1)),
      beta(channels, T(0)),
      running_mean(channels, T(0)),
      running_var(channels, T(1)) {}

template <typename T>
BatchNormParams<T> BatchNormParams<T>::zeros_like() const {
  BatchNormParams z(channels());
  std::fill(z.gamma.begin(), z.gamma.end(), T(0));
  std::fill(z.running_var.begin(), z.running_var.end(), T(0));
  z.epsilon = epsilon;
  z.momentum = momentum;
  return z;
}

template <typename T>
void BatchNormParams<T>::check() const {
  const std::size_t c = gamma.size();
  if (c == 0 || beta.size() != c || running_mean.size() != c || running_var.size() != c) {
    throw ShapeError("batchnorm params have inconsistent channel counts");
  }
  if (!(epsilon > T(0)) || !(momentum > T(0) && momentum < T(1))) {
    throw ConfigError("batchnorm needs epsilon > 0 and momentum in (0,1)");
  }
  for (T v : running_var) {
    if (v < T(0)) throw ConfigError("batchnorm running variance must be >= 0");
  }
}

namespace {

template <typename T>
void check_batch(const Batch<T>& x, std::size_t channels, const char* op) {
  if (x.empty()) throw ShapeError(std::string(op) + ": empty batch");
  for (const auto& item : x) {
    if (item.empty() || item.channels() != channels || item.length() != x.front().length()) {
      throw ShapeError(std::string(op) + ": batch item " + item.shape() +
                       " does not match expected " +
                       FeatureMap<T>::shape_string(x.front().length(), channels));
    }
  }
}

}  // namespace

template <typename T>
Batch<T> batchnorm_forward(const Batch<T>& x, BatchNormParams<T>& p, Mode mode,
                           BatchNormCache<T>* cache) {
  const std::size_t c_n = p.channels();
  check_batch(x, c_n, "batchnorm_forward");
  const std::size_t len = x.front().length();
  const std::size_t count = x.size() * len;

  std::vector<T> mean(c_n);
  std::vector<T> inv_std(c_n);
  if (mode == Mode::Train) {
    if (count < 2) {
      throw ShapeError("batchnorm_forward: Train mode needs at least 2 values per channel");
    }
    std::vector<double> sum(c_n, 0.0);
    for (const auto& item : x)
      for (std::size_t t = 0; t < len; ++t) {
        const T* r = item.data() + t * c_n;
        for (std::size_t c = 0; c < c_n; ++c) sum[c] += r[c];
      }
    std::vector<double> dmean(c_n);
    for (std::size_t c = 0; c < c_n; ++c) dmean[c] = sum[c] / static_cast<double>(count);
    std::vector<double> sq(c_n, 0.0);
    for (const auto& item : x)
      for (std::size_t t = 0; t < len; ++t) {
        const T* r = item.data() + t * c_n;
        for (std::size_t c = 0; c < c_n; ++c) {
          const double d = r[c] - dmean[c];
          sq[c] += d * d;
        }
      }
    for (std::size_t c = 0; c < c_n; ++c) {
      const double var = sq[c] / static_cast<double>(count);
      mean[c] = static_cast<T>(dmean[c]);
      inv_std[c] = static_cast<T>(1.0 / std::sqrt(var + static_cast<double>(p.epsilon)));
      if (p.has_running_stats) {
        p.running_mean[c] = p.momentum * p.running_mean[c] + (T(1) - p.momentum) * mean[c];
        p.running_var[c] =
            p.momentum * p.running_var[c] + (T(1) - p.momentum) * static_cast<T>(var);
      } else {
        p.running_mean[c] = mean[c];
        p.running_var[c] = static_cast<T>(var);
      }
    }
    p.has_running_stats = true;
  } else {
    if (!p.has_running_stats) {
      throw std::logic_error(
          "batchnorm_forward: Infer mode requested before running statistics were set");
    }
    for (std::size_t c = 0; c < c_n; ++c) {
      mean[c] = p.running_mean[c];
      inv_std[c] = T(1) / std::sqrt(p.running_var[c] + p.epsilon);
    }
  }

  Batch<T> out;
  out.reserve(x.size());
  if (cache) {
    cache->normalized.clear();
    cache->normalized.reserve(x.size());
    cache->inv_std = inv_std;
  }
  for (const auto& item : x) {
    FeatureMap<T> y(len, c_n);
    FeatureMap<T> xhat;
    if (cache) xhat = FeatureMap<T>(len, c_n);
    for (std::size_t t = 0; t < len; ++t) {
      const T* r = item.data() + t * c_n;
      T* o = y.data() + t * c_n;
      for (std::size_t c = 0; c < c_n; ++c) {
        const T h = (r[c] - mean[c]) * inv_std[c];
        o[c] = p.gamma[c] * h + p.beta[c];
        if (cache) xhat.data()[t * c_n + c] = h;
      }
    }
    out.push_back(std::move(y));
    if (cache) cache->normalized.push_back(std::move(xhat));
  }
  return out;
}

template <typename T>
FeatureMap<T> batchnorm_infer(const FeatureMap<T>& x, const BatchNormParams<T>& p) {
  const std::size_t c_n = p.channels();
  if (x.empty() || x.channels() != c_n) {
    throw ShapeError("batchnorm_infer: input " + x.shape() + " but params have " +
                     std::to_string(c_n) + " channels");
  }
  if (!p.has_running_stats) {
    throw std::logic_error(
        "batchnorm_infer: running statistics were never set by training or loading");
  }
  // Same arithmetic as the Infer branch of batchnorm_forward, so both paths agree bit for bit.
  std::vector<T> inv_std(c_n);
  for (std::size_t c = 0; c < c_n; ++c) inv_std[c] = T(1) / std::sqrt(p.running_var[c] + p.epsilon);
  FeatureMap<T> y(x.length(), c_n);
  const T* r = x.data();
  T* o = y.data();
  for (std::size_t i = 0; i < x.size(); i += c_n)
    for (std::size_t c = 0; c < c_n; ++c)
      o[i + c] = p.gamma[c] * ((r[i + c] - p.running_mean[c]) * inv_std[c]) + p.beta[c];
  return y;
}

template <typename T>
Batch<T> batchnorm_backward(const Batch<T>& grad_out, const BatchNormCache<T>& cache,
                            const BatchNormParams<T>& p, BatchNormParams<T>& grads) {
  const std::size_t c_n = p.channels();
  if (cache.normalized.empty() || cache.inv_std.size() != c_n) {
    throw std::logic_error("batchnorm_backward: missing Train-mode cache");
  }
  check_batch(grad_out, c_n, "batchnorm_backward");
  if (grad_out.size() != cache.normalized.size() ||
      !grad_out.front().same_shape(cache.normalized.front())) {
    throw ShapeError("batchnorm_backward: grad_out batch does not match forward batch");
  }
  const std::size_t len = grad_out.front().length();
  const double count = static_cast<double>(grad_out.size() * len);

  // sum_g = dL/dbeta, sum_gh = dL/dgamma
  std::vector<double> sum_g(c_n, 0.0), sum_gh(c_n, 0.0);
  for (std::size_t b = 0; b < grad_out.size(); ++b) {
    const T* g = grad_out[b].data();
    const T* h = cache.normalized[b].data();
    for (std::size_t i = 0; i < len * c_n; i += c_n)
      for (std::size_t c = 0; c < c_n; ++c) {
        sum_g[c] += g[i + c];
        sum_gh[c] += static_cast<double>(g[i + c]) * h[i + c];
      }
  }
  for (std::size_t c = 0; c < c_n; ++c) {
    grads.beta[c] += static_cast<T>(sum_g[c]);
    grads.gamma[c] += static_cast<T>(sum_gh[c]);
  }

  std::vector<T> scale(c_n), mean_g(c_n), mean_gh(c_n);
  for (std::size_t c = 0; c < c_n; ++c) {
    scale[c] = p.gamma[c] * cache.inv_std[c];
    mean_g[c] = static_cast<T>(sum_g[c] / count);
    mean_gh[c] = static_cast<T>(sum_gh[c] / count);
  }
  Batch<T> grad_x;
  grad_x.reserve(grad_out.size());
  for (std::size_t b = 0; b < grad_out.size(); ++b) {
    FeatureMap<T> gx(len, c_n);
    const T* g = grad_out[b].data();
    const T* h = cache.normalized[b].data();
    T* o = gx.data();
    for (std::size_t i = 0; i < len * c_n; i += c_n)
      for (std::size_t c = 0; c < c_n; ++c)
        o[i + c] = scale[c] * (g[i + c] - mean_g[c] - h[i + c] * mean_gh[c]);
    grad_x.push_back(std::move(gx));
  }
  return grad_x;
}

// ---------------------------------------------------------------------------
// ReLU

template <typename T>
FeatureMap<T> relu(const FeatureMap<T>& x) {
  FeatureMap<T> y = x;
  for (T& v : y.values()) v = v > T(0) ? v : T(0);
  return y;
}

template <typename T>
FeatureMap<T> relu_backward(const FeatureMap<T>& grad_out, const FeatureMap<T>& saved) {
  if (!grad_out.same_shape(saved)) {
    throw ShapeError("relu_backward: grad_out " + grad_out.shape() + " vs saved " +
                     saved.shape());
  }
  FeatureMap<T> gx = grad_out;
  auto g = gx.values();
  auto s = saved.values();
  for (std::size_t i = 0; i < g.size(); ++i)
    if (!(s[i] > T(0))) g[i] = T(0);
  return gx;
}

// ---------------------------------------------------------------------------
// Channel concatenation

template <typename T>
FeatureMap<T> concat_channels(std::span<const FeatureMap<T>> xs) {
  if (xs.empty()) throw ShapeError("concat_channels: no inputs");
  const std::size_t len = xs.front().length();
  std::size_t total = 0;
  for (const auto& x : xs) {
    if (x.empty() || x.length() != len) {
      throw ShapeError("concat_channels: length mismatch, " + x.shape() + " vs " +
                       xs.front().shape());
    }
    total += x.channels();
  }
  FeatureMap<T> out(len, total);
  for (std::size_t t = 0; t < len; ++t) {
    T* o = out.data() + t * total;
    for (const auto& x : xs) {
      const T* r = x.data() + t * x.channels();
      std::copy(r, r + x.channels(), o);
      o += x.channels();
    }
  }
  return out;
}

template <typename T>
FeatureMap<T> slice_channels(const FeatureMap<T>& x, std::size_t offset, std::size_t count) {
  if (offset + count > x.channels()) {
    throw ShapeError("slice_channels: [" + std::to_string(offset) + ", " +
                     std::to_string(offset + count) + ") exceeds " + x.shape());
  }
  FeatureMap<T> out(x.length(), count);
  for (std::size_t t = 0; t < x.length(); ++t) {
    const T* r = x.data() + t * x.channels() + offset;
    std::copy(r, r + count, out.data() + t * count);
  }
  return out;
}

template <typename T>
void add_into_channels(FeatureMap<T>& dst, const FeatureMap<T>& src, std::size_t offset) {
  if (dst.length() != src.length() || offset + src.channels() > dst.channels()) {
    throw ShapeError("add_into_channels: " + src.shape() + " at channel " +
                     std::to_string(offset) + " does not fit " + dst.shape());
  }
  const std::size_t cs = src.channels();
  for (std::size_t t = 0; t < dst.length(); ++t) {
    T* o = dst.data() + t * dst.channels() + offset;
    const T* r = src.data() + t * cs;
    for (std::size_t c = 0; c < cs; ++c) o[c] += r[c];
  }
}

// ---------------------------------------------------------------------------
// Fully connected

template <typename T>
void LinearParams<T>::check() const {
  if (in_dim == 0 || out_dim == 0 || weight.size() != in_dim * out_dim || bias.size() != out_dim) {
    throw ShapeError("linear params storage does not match " + std::to_string(out_dim) + "x" +
                     std::to_string(in_dim));
  }
}

template <typename T>
std::vector<T> linear_forward(std::span<const T> x, const LinearParams<T>& p) {
  if (x.size() != p.in_dim) {
    throw ShapeError("linear_forward: input dim " + std::to_string(x.size()) +
                     " but layer expects " + std::to_string(p.in_dim));
  }
  std::vector<T> out(p.bias);
  for (std::size_t o = 0; o < p.out_dim; ++o) {
    const T* w = p.weight.data() + o * p.in_dim;
    T acc = T(0);
    for (std::size_t i = 0; i < p.in_dim; ++i) acc += w[i] * x[i];
    out[o] += acc;
  }
  return out;
}

template <typename T>
std::vector<T> linear_backward(std::span<const T> grad_out, std::span<const T> saved_input,
                               const LinearParams<T>& p, LinearParams<T>& grads) {
  if (grad_out.size() != p.out_dim || saved_input.size() != p.in_dim) {
    throw ShapeError("linear_backward: got grad " + std::to_string(grad_out.size()) +
                     " / input " + std::to_string(saved_input.size()) + " for layer " +
                     std::to_string(p.out_dim) + "x" + std::to_string(p.in_dim));
  }
  std::vector<T> gx(p.in_dim, T(0));
  for (std::size_t o = 0; o < p.out_dim; ++o) {
    const T g = grad_out[o];
    grads.bias[o] += g;
    const T* w = p.weight.data() + o * p.in_dim;
    T* gw = grads.weight.data() + o * p.in_dim;
    for (std::size_t i = 0; i < p.in_dim; ++i) {
      gw[i] += g * saved_input[i];
      gx[i] += g * w[i];
    }
  }
  return gx;
}

#define SEISNET_INSTANTIATE_LAYERS(T)                                                         \
  template bool all_finite<T>(std::span<const T>);                                            \
  template struct ConvParams<T>;                                                              \
  template FeatureMap<T> conv1d_forward<T>(const FeatureMap<T>&, const ConvParams<T>&);       \
  template FeatureMap<T> conv1d_backward<T>(const FeatureMap<T>&, const FeatureMap<T>&,       \
                                            const ConvParams<T>&, ConvParams<T>&, bool);      \
  template FeatureMap<T> avgpool1d<T>(const FeatureMap<T>&, std::size_t, std::size_t);       \
  template FeatureMap<T> avgpool1d_backward<T>(const FeatureMap<T>&, std::size_t,            \
                                               std::size_t, std::size_t);                     \
  template struct BatchNormParams<T>;                                                         \
  template Batch<T> batchnorm_forward<T>(const Batch<T>&, BatchNormParams<T>&, Mode,          \
                                         BatchNormCache<T>*);                                 \
  template FeatureMap<T> batchnorm_infer<T>(const FeatureMap<T>&, const BatchNormParams<T>&);   \
  template Batch<T> batchnorm_backward<T>(const Batch<T>&, const BatchNormCache<T>&,          \
                                          const BatchNormParams<T>&, BatchNormParams<T>&);    \
  template FeatureMap<T> relu<T>(const FeatureMap<T>&);                                       \
  template FeatureMap<T> relu_backward<T>(const FeatureMap<T>&, const FeatureMap<T>&);        \
  template FeatureMap<T> concat_channels<T>(std::span<const FeatureMap<T>>);                  \
  template FeatureMap<T> slice_channels<T>(const FeatureMap<T>&, std::size_t, std::size_t);   \
  template void add_into_channels<T>(FeatureMap<T>&, const FeatureMap<T>&, std::size_t);     \
  template struct LinearParams<T>;                                                            \
  template std::vector<T> linear_forward<T>(std::span<const T>, const LinearParams<T>&);      \
  template std::vector<T> linear_backward<T>(std::span<const T>, std::span<const T>,          \
                                             const LinearParams<T>&, LinearParams<T>&);

SEISNET_INSTANTIATE_LAYERS(float)
SEISNET_INSTANTIATE_LAYERS(double)

#undef SEISNET_INSTANTIATE_LAYERS

}  // namespace seisnet
