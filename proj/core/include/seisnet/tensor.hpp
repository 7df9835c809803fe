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
#include <stdexcept>
#include <string>
#include <vector>

namespace seisnet {

/// Raised when an operation receives tensors whose shapes break its contract.
class ShapeError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Raised for malformed files or streams; the message carries the byte offset.
class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Raised for inconsistent configuration (architecture, training, synthesis).
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/**
 * A (length x channels) signal, stored row-major: all channels of timestamp 0,
 * then timestamp 1, and so on. A default-constructed map is empty and is used
 * to mark "no saved activation".
 */
template <typename T>
class FeatureMap {
 public:
  using value_type = T;

  FeatureMap() = default;
  FeatureMap(std::size_t length, std::size_t channels, T fill = T(0))
      : length_(length), channels_(channels), data_(length * channels, fill) {
    if (length == 0 || channels == 0) {
      throw ShapeError("FeatureMap requires length >= 1 and channels >= 1, got " +
                       shape_string(length, channels));
    }
  }
  FeatureMap(std::size_t length, std::size_t channels, std::vector<T> data)
      : length_(length), channels_(channels), data_(std::move(data)) {
    if (length == 0 || channels == 0 || data_.size() != length * channels) {
      throw ShapeError("FeatureMap data of size " + std::to_string(data_.size()) +
                       " does not match shape " + shape_string(length, channels));
    }
  }

  std::size_t length() const { return length_; }
  std::size_t channels() const { return channels_; }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  T& operator()(std::size_t t, std::size_t c) { return data_[t * channels_ + c]; }
  const T& operator()(std::size_t t, std::size_t c) const { return data_[t * channels_ + c]; }

  std::span<T> row(std::size_t t) { return {data_.data() + t * channels_, channels_}; }
  std::span<const T> row(std::size_t t) const { return {data_.data() + t * channels_, channels_}; }

  std::span<T> values() { return data_; }
  std::span<const T> values() const { return data_; }
  T* data() { return data_.data(); }
  const T* data() const { return data_.data(); }

  bool same_shape(const FeatureMap& other) const {
    return length_ == other.length_ && channels_ == other.channels_;
  }
  std::string shape() const { return shape_string(length_, channels_); }

  static std::string shape_string(std::size_t length, std::size_t channels) {
    return std::to_string(length) + "x" + std::to_string(channels);
  }

  friend bool operator==(const FeatureMap&, const FeatureMap&) = default;

 private:
  std::size_t length_ = 0;
  std::size_t channels_ = 0;
  std::vector<T> data_;
};

template <typename T>
using Batch = std::vector<FeatureMap<T>>;

/// True when every value is finite.
template <typename T>
bool all_finite(std::span<const T> values);

}  // namespace seisnet
