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
#include <random>
#include <string>
#include <vector>

#include "seisnet/config.hpp"
#include "seisnet/data.hpp"

namespace seisnet {

/// Longest event the generator will place.
inline constexpr std::size_t kMaxEventSpan = 12'000;

struct SynthConfig {
  std::size_t days = 1;
  std::size_t samples_per_day = kDaySamples;
  double sample_rate = kSampleRate;
  double start_time = 0.0;

  std::size_t events_min = 0;
  std::size_t events_max = 2;
  std::size_t event_span_min = 4'000;
  std::size_t event_span_max = kMaxEventSpan;
  double emergence_hz = 30.0;
  double impulsive_hz = 60.0;
  std::size_t peaks_min = 1;
  std::size_t peaks_max = 4;
  double snr_min = 2.0;
  double snr_max = 6.0;

  /// RMS of the band-limited component relative to the white component.
  double colored_ratio = 1.0;
  double colored_low_hz = 1.0;
  double colored_high_hz = 10.0;

  bool confounders = true;
  /// Mean confounders per day (Poisson).
  double confounder_rate = 2.0;
  std::size_t confounder_span_min = 2'000;
  std::size_t confounder_span_max = 12'000;
  double confounder_low_hz = 5.0;
  double confounder_high_hz = 80.0;

  /// Minimum gap between any two placed events or confounders.
  std::size_t min_separation = 24'000;
  std::uint64_t seed = 1;
  std::string station_prefix = "SYN";

  /// Full 200 Hz day of 17,280,001 samples.
  static SynthConfig day();
  /// 1,728,000-sample day with events scaled to fit a 4,500-sample window.
  static SynthConfig mini_day();

  void validate() const;
  /// Starts from `preset = day|mini_day` (default day) and applies the other keys.
  static SynthConfig from_config(const KeyValueConfig& cfg);
  std::string to_config() const;
};

struct SynthEvent {
  Interval span;
  std::size_t impulsive_start = 0;  // first sample of the impulsive phase
  std::size_t peaks = 0;
  double snr = 0.0;
};

struct SynthDay {
  Trace trace;
  LabelSet labels;
  std::vector<SynthEvent> events;
  std::vector<Interval> confounders;  // not labeled
};

/// Noise-free two-phase event of `span` samples: a ramped emergence followed
/// by `peaks` impulsive bursts. `impulsive_start` receives the phase boundary.
std::vector<double> render_event(std::size_t span, std::size_t peaks, double sample_rate,
                                 double emergence_hz, double impulsive_hz, std::mt19937_64& rng,
                                 std::size_t* impulsive_start);

/// Noise-free linear chirp from f0 to f1 under a Hann envelope.
std::vector<double> render_chirp(std::size_t span, double f0, double f1, double sample_rate,
                                 std::mt19937_64& rng);

/// One day; day i of generate_synthetic(cfg) equals generate_day(cfg, i).
SynthDay generate_day(const SynthConfig& cfg, std::size_t day_index);

std::vector<SynthDay> generate_synthetic(const SynthConfig& cfg, std::size_t threads = 1);

}  // namespace seisnet
