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
#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "seisnet/train.hpp"

namespace seisnet {

/// Samples in one field day at 200 Hz, both end points included.
inline constexpr std::size_t kDaySamples = 17'280'001;
inline constexpr double kSampleRate = 200.0;

struct Trace {
  std::vector<float> samples;
  double sample_rate = kSampleRate;
  double start_time = 0.0;  // epoch seconds
  std::string station_id;

  std::size_t size() const { return samples.size(); }
  friend bool operator==(const Trace&, const Trace&) = default;
};

/// Half-open sample range [start, end).
struct Interval {
  std::size_t start = 0;
  std::size_t end = 0;

  std::size_t length() const { return end - start; }
  bool intersects(const Interval& o) const { return start < o.end && o.start < end; }
  std::size_t overlap(const Interval& o) const;

  friend auto operator<=>(const Interval&, const Interval&) = default;
};

/// Sorted, disjoint event intervals inside a trace of known length.
class LabelSet {
 public:
  LabelSet() = default;
  /// Sorts `events` and throws ConfigError if any interval is empty, out of
  /// bounds, or overlaps another.
  LabelSet(std::vector<Interval> events, std::size_t trace_length);

  const std::vector<Interval>& events() const { return events_; }
  std::size_t size() const { return events_.size(); }
  bool empty() const { return events_.empty(); }
  std::size_t trace_length() const { return trace_length_; }

  bool intersects_any(const Interval& window) const;

 private:
  std::vector<Interval> events_;
  std::size_t trace_length_ = 0;
};

// ---------------------------------------------------------------------------
// Trace files
//
// Binary layout (little-endian):
//   "SEISTRC1"  8-byte magic
//   u32 version = 1
//   f64 sample_rate, f64 start_time
//   u64 sample count
//   u32 station id length, station id bytes
//   count x f32 samples
//
// CSV: header "timestamp_index,amplitude", one row per sample; sample rate is
// taken as 200 Hz and the station id from the caller.

void write_trace_binary(const Trace& trace, std::ostream& out);
Trace read_trace_binary(std::istream& in);
void write_trace_csv(const Trace& trace, std::ostream& out);
Trace read_trace_csv(std::istream& in, const std::string& station_id = "");

/// Picks the format from the extension (".csv" or anything else = binary).
void write_trace(const Trace& trace, const std::filesystem::path& path);
Trace read_trace(const std::filesystem::path& path);

/// Interval CSV with header "trace_id,start_index,end_index"; used for event
/// labels and for picked negatives alike.
using IntervalTable = std::map<std::string, std::vector<Interval>>;
std::string interval_csv(const IntervalTable& table);
IntervalTable parse_interval_csv(const std::string& text, const std::string& origin = "<csv>");
IntervalTable read_interval_csv(const std::filesystem::path& path);

// ---------------------------------------------------------------------------
// Windows

std::vector<float> extract_window(const Trace& trace, std::size_t start, std::size_t length);

/// Start of the length-L window centred on `event`, clamped to the trace.
std::size_t centered_window_start(const Interval& event, std::size_t length,
                                  std::size_t trace_length);

struct NegativePolicy {
  /// Hand-picked background intervals per trace id; each yields one window
  /// centred on it.
  IntervalTable picked;
  /// Also take each picked interval near the start and near the end of a
  /// window. Shifted windows that touch an event are skipped.
  bool picked_edges = false;
  /// Uniformly drawn windows that intersect no event.
  std::size_t random_count = 0;
  std::uint64_t seed = 1;
};

struct LabeledTrace {
  const Trace* trace = nullptr;
  LabelSet labels;
};

/**
 * One centred positive window per event, then the picked negatives, then the
 * random negatives. Every window is z-scored with preprocess().
 */
std::vector<LabeledWindow> make_training_set(const std::vector<LabeledTrace>& traces,
                                             std::size_t window_length,
                                             const NegativePolicy& policy);

}  // namespace seisnet
