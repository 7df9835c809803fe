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

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include <unistd.h>

#include "seisnet/layers.hpp"

namespace seisnet::testing {

template <typename T>
FeatureMap<T> random_map(std::size_t len, std::size_t ch, std::mt19937_64& rng, double scale = 1.0) {
  std::normal_distribution<double> g(0.0, scale);
  FeatureMap<T> m(len, ch);
  for (auto& v : m.values()) v = static_cast<T>(g(rng));
  return m;
}

// Independent SAME-ceil geometry.
inline std::size_t oracle_out_len(std::size_t len, std::size_t stride) {
  return static_cast<std::size_t>(std::ceil(static_cast<double>(len) / static_cast<double>(stride)));
}

inline std::size_t oracle_left_pad(std::size_t len, std::size_t window, std::size_t stride) {
  const long out = static_cast<long>(oracle_out_len(len, stride));
  const long total = std::max(0L, (out - 1) * static_cast<long>(stride) +
                                      static_cast<long>(window) - static_cast<long>(len));
  return static_cast<std::size_t>(total / 2);
}

// Direct sum over taps; out-of-range taps read zero.
inline FeatureMap<double> conv_oracle(const FeatureMap<double>& x, const ConvParams<double>& p) {
  const std::size_t out_len = oracle_out_len(x.length(), p.stride);
  const long left = static_cast<long>(oracle_left_pad(x.length(), p.kernel_size, p.stride));
  FeatureMap<double> y(out_len, p.out_channels);
  for (std::size_t t = 0; t < out_len; ++t)
    for (std::size_t co = 0; co < p.out_channels; ++co) {
      double acc = p.bias[co];
      for (std::size_t k = 0; k < p.kernel_size; ++k) {
        const long i = static_cast<long>(t * p.stride + k) - left;
        if (i < 0 || i >= static_cast<long>(x.length())) continue;
        for (std::size_t ci = 0; ci < p.in_channels; ++ci)
          acc += x(static_cast<std::size_t>(i), ci) * p.weight(k, ci, co);
      }
      y(t, co) = acc;
    }
  return y;
}

// Windowed mean over valid samples only.
inline FeatureMap<double> pool_oracle(const FeatureMap<double>& x, std::size_t window, std::size_t stride) {
  const std::size_t out_len = oracle_out_len(x.length(), stride);
  const long left = static_cast<long>(oracle_left_pad(x.length(), window, stride));
  FeatureMap<double> y(out_len, x.channels());
  for (std::size_t t = 0; t < out_len; ++t)
    for (std::size_t c = 0; c < x.channels(); ++c) {
      double sum = 0.0;
      std::size_t n = 0;
      for (std::size_t k = 0; k < window; ++k) {
        const long i = static_cast<long>(t * stride + k) - left;
        if (i < 0 || i >= static_cast<long>(x.length())) continue;
        sum += x(static_cast<std::size_t>(i), c);
        ++n;
      }
      y(t, c) = sum / static_cast<double>(n);
    }
  return y;
}

/// Fresh empty directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    static std::uint64_t counter = 0;
    path_ = std::filesystem::temp_directory_path() /
            ("seisnet_" + tag + "_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

/// Frequency (Hz) of the largest DFT magnitude bin above `min_hz`, by direct summation.
inline double dft_peak_hz(const std::vector<double>& x, double sample_rate, double min_hz = 0.5) {
  const std::size_t n = x.size();
  double best_mag = -1.0, best_hz = 0.0;
  const double pi2 = 2.0 * 3.14159265358979323846;
  for (std::size_t k = 1; k <= n / 2; ++k) {
    const double hz = static_cast<double>(k) * sample_rate / static_cast<double>(n);
    if (hz < min_hz) continue;
    std::complex<double> acc = 0.0;
    const double w = -pi2 * static_cast<double>(k) / static_cast<double>(n);
    for (std::size_t i = 0; i < n; ++i) acc += x[i] * std::polar(1.0, w * static_cast<double>(i));
    if (std::abs(acc) > best_mag) {
      best_mag = std::abs(acc);
      best_hz = hz;
    }
  }
  return best_hz;
}

}  // namespace seisnet::testing
