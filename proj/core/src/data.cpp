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
#include "seisnet/data.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <random>
#include <sstream>

#include "seisnet/io.hpp"

namespace seisnet {

std::size_t Interval::overlap(const Interval& o) const {
  const std::size_t lo = std::max(start, o.start);
  const std::size_t hi = std::min(end, o.end);
  return hi > lo ? hi - lo : 0;
}

LabelSet::LabelSet(std::vector<Interval> events, std::size_t trace_length)
    : events_(std::move(events)), trace_length_(trace_length) {
  std::sort(events_.begin(), events_.end());
  for (std::size_t i = 0; i < events_.size(); ++i) {
    const Interval& e = events_[i];
    if (e.start >= e.end || e.end > trace_length) {
      throw ConfigError("event [" + std::to_string(e.start) + ", " + std::to_string(e.end) +
                        ") is empty or outside a trace of " + std::to_string(trace_length) +
                        " samples");
    }
    if (i > 0 && events_[i - 1].end > e.start) {
      throw ConfigError("events [" + std::to_string(events_[i - 1].start) + ", " +
                        std::to_string(events_[i - 1].end) + ") and [" + std::to_string(e.start) +
                        ", " + std::to_string(e.end) + ") overlap");
    }
  }
}

bool LabelSet::intersects_any(const Interval& window) const {
  // First event ending after the window starts is the only candidate.
  auto it = std::upper_bound(events_.begin(), events_.end(), window.start,
                             [](std::size_t s, const Interval& e) { return s < e.end; });
  return it != events_.end() && it->intersects(window);
}

// ---------------------------------------------------------------------------
// Trace files

namespace {

constexpr std::string_view kTraceMagic = "SEISTRC1";
constexpr std::uint32_t kTraceVersion = 1;

std::string encode_trace(const Trace& trace) {
  ByteWriter w;
  w.bytes(kTraceMagic);
  w.u32(kTraceVersion);
  w.f64(trace.sample_rate);
  w.f64(trace.start_time);
  w.u64(trace.samples.size());
  w.u32(static_cast<std::uint32_t>(trace.station_id.size()));
  w.bytes(trace.station_id);
  w.f32s(trace.samples);
  return w.buffer();
}

Trace decode_trace(const std::string& data) {
  ByteReader r(data, "trace file");
  if (r.bytes(kTraceMagic.size()) != kTraceMagic) r.fail("bad magic, not a binary trace");
  const std::uint32_t version = r.u32();
  if (version != kTraceVersion) r.fail("unsupported trace version " + std::to_string(version));
  Trace t;
  t.sample_rate = r.f64();
  t.start_time = r.f64();
  const std::uint64_t count = r.u64();
  const std::uint32_t id_len = r.u32();
  t.station_id = std::string(r.bytes(id_len));
  if (!(t.sample_rate > 0.0)) r.fail("sample rate must be positive");
  if (count == 0) r.fail("trace holds no samples");
  if (r.remaining() / 4 < count) {
    r.fail("truncated body: expected " + std::to_string(count) + " samples, found " +
           std::to_string(r.remaining() / 4));
  }
  t.samples.resize(count);
  r.f32s(t.samples);
  if (r.remaining() != 0) r.fail("trailing bytes after samples");
  return t;
}

bool has_csv_extension(const std::filesystem::path& path) {
  std::string ext = path.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
  return ext == ".csv";
}

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream in(line);
  while (std::getline(in, field, ',')) {
    const auto b = field.find_first_not_of(" \t\r");
    const auto e = field.find_last_not_of(" \t\r");
    out.push_back(b == std::string::npos ? "" : field.substr(b, e - b + 1));
  }
  return out;
}

std::size_t parse_index(const std::string& s, const std::string& where) {
  std::size_t v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    throw FormatError(where + ": expected a non-negative integer, got '" + s + "'");
  }
  return v;
}

}  // namespace

void write_trace_binary(const Trace& trace, std::ostream& out) {
  const std::string bytes = encode_trace(trace);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw std::runtime_error("write_trace_binary: stream write failed");
}

Trace read_trace_binary(std::istream& in) { return decode_trace(read_all(in)); }

void write_trace_csv(const Trace& trace, std::ostream& out) {
  out << "timestamp_index,amplitude\n";
  char buf[64];
  for (std::size_t i = 0; i < trace.samples.size(); ++i) {
    // %.9g round-trips a float exactly.
    std::snprintf(buf, sizeof(buf), "%zu,%.9g\n", i, static_cast<double>(trace.samples[i]));
    out << buf;
  }
}

Trace read_trace_csv(std::istream& in, const std::string& station_id) {
  Trace t;
  t.station_id = station_id;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    const auto fields = split_fields(line);
    if (line_no == 1 && !fields.empty() && fields[0] == "timestamp_index") continue;
    const std::string where = "trace csv line " + std::to_string(line_no);
    if (fields.size() != 2) throw FormatError(where + ": expected 2 fields");
    const std::size_t index = parse_index(fields[0], where);
    if (index != t.samples.size()) {
      throw FormatError(where + ": expected timestamp_index " + std::to_string(t.samples.size()) +
                        ", got " + std::to_string(index));
    }
    try {
      std::size_t pos = 0;
      const float v = std::stof(fields[1], &pos);
      if (pos != fields[1].size()) throw std::invalid_argument("trailing");
      t.samples.push_back(v);
    } catch (const std::exception&) {
      throw FormatError(where + ": bad amplitude '" + fields[1] + "'");
    }
  }
  if (t.samples.empty()) throw FormatError("trace csv holds no samples");
  return t;
}

void write_trace(const Trace& trace, const std::filesystem::path& path) {
  if (has_csv_extension(path)) {
    std::ostringstream out;
    write_trace_csv(trace, out);
    atomic_write_file(path, out.str());
  } else {
    atomic_write_file(path, encode_trace(trace));
  }
}

Trace read_trace(const std::filesystem::path& path) {
  if (has_csv_extension(path)) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open trace " + path.string());
    return read_trace_csv(in, path.stem().string());
  }
  const std::string data = read_file(path);
  try {
    return decode_trace(data);
  } catch (const FormatError& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

std::string interval_csv(const IntervalTable& table) {
  std::string out = "trace_id,start_index,end_index\n";
  for (const auto& [id, intervals] : table)
    for (const auto& iv : intervals)
      out += id + "," + std::to_string(iv.start) + "," + std::to_string(iv.end) + "\n";
  return out;
}

IntervalTable parse_interval_csv(const std::string& text, const std::string& origin) {
  IntervalTable table;
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    const auto fields = split_fields(line);
    if (line_no == 1 && !fields.empty() && fields[0] == "trace_id") continue;
    const std::string where = origin + " line " + std::to_string(line_no);
    if (fields.size() != 3) throw FormatError(where + ": expected trace_id,start_index,end_index");
    Interval iv{parse_index(fields[1], where), parse_index(fields[2], where)};
    if (iv.start >= iv.end) throw FormatError(where + ": start_index must be < end_index");
    table[fields[0]].push_back(iv);
  }
  return table;
}

IntervalTable read_interval_csv(const std::filesystem::path& path) {
  return parse_interval_csv(read_file(path), path.string());
}

// ---------------------------------------------------------------------------
// Windows

std::vector<float> extract_window(const Trace& trace, std::size_t start, std::size_t length) {
  if (length == 0 || start > trace.size() || length > trace.size() - start) {
    throw std::out_of_range("window [" + std::to_string(start) + ", " +
                            std::to_string(start + length) + ") outside trace of " +
                            std::to_string(trace.size()) + " samples");
  }
  return {trace.samples.begin() + static_cast<std::ptrdiff_t>(start),
          trace.samples.begin() + static_cast<std::ptrdiff_t>(start + length)};
}

std::size_t centered_window_start(const Interval& event, std::size_t length,
                                  std::size_t trace_length) {
  if (length > trace_length) throw std::out_of_range("window longer than trace");
  const std::size_t center = event.start + event.length() / 2;
  const std::size_t half = length / 2;
  const std::size_t start = center > half ? center - half : 0;
  return std::min(start, trace_length - length);
}

std::vector<LabeledWindow> make_training_set(const std::vector<LabeledTrace>& traces,
                                             std::size_t window_length,
                                             const NegativePolicy& policy) {
  std::vector<LabeledWindow> out;
  auto add = [&](const Trace& trace, std::size_t start, int label, WindowSource source) {
    const std::vector<float> raw = extract_window(trace, start, window_length);
    out.push_back({preprocess<float>(raw), label, trace.station_id, start, source});
  };

  for (const auto& lt : traces) {
    if (!lt.trace) throw std::invalid_argument("make_training_set: null trace");
    if (lt.trace->size() < window_length) {
      throw ConfigError("trace " + lt.trace->station_id + " is shorter than the window length");
    }
    for (const auto& e : lt.labels.events()) {
      if (e.length() > window_length) {
        throw ConfigError("event [" + std::to_string(e.start) + ", " + std::to_string(e.end) +
                          ") in " + lt.trace->station_id + " spans " + std::to_string(e.length()) +
                          " samples, longer than the " + std::to_string(window_length) +
                          "-sample window");
      }
      add(*lt.trace, centered_window_start(e, window_length, lt.trace->size()), 1,
          WindowSource::Event);
    }
  }

  for (const auto& lt : traces) {
    auto it = policy.picked.find(lt.trace->station_id);
    if (it == policy.picked.end()) continue;
    for (const auto& iv : it->second) {
      if (iv.end > lt.trace->size()) {
        throw ConfigError("picked negative [" + std::to_string(iv.start) + ", " +
                          std::to_string(iv.end) + ") lies outside trace " + lt.trace->station_id);
      }
      const std::size_t start = centered_window_start(iv, window_length, lt.trace->size());
      add(*lt.trace, start, -1, WindowSource::PickedNegative);
      if (!policy.picked_edges || iv.length() >= window_length) continue;
      const std::size_t margin = (window_length - iv.length()) / 8;
      const std::size_t last = lt.trace->size() - window_length;
      const std::size_t early = std::min(iv.start - std::min(iv.start, margin), last);
      const std::size_t late =
          std::min(iv.end + margin > window_length ? iv.end + margin - window_length : 0, last);
      for (const std::size_t s : {early, late}) {
        if (s == start || lt.labels.intersects_any({s, s + window_length})) continue;
        add(*lt.trace, s, -1, WindowSource::PickedNegative);
      }
    }
  }

  if (policy.random_count > 0) {
    // Draw traces in proportion to the number of window starts they offer.
    std::vector<double> weights;
    for (const auto& lt : traces) weights.push_back(static_cast<double>(lt.trace->size() - window_length + 1));
    if (weights.empty()) throw ConfigError("random negatives requested without any traces");
    std::mt19937_64 rng(policy.seed);
    std::discrete_distribution<std::size_t> pick_trace(weights.begin(), weights.end());
    constexpr std::size_t kMaxAttempts = 100000;
    for (std::size_t n = 0; n < policy.random_count; ++n) {
      bool placed = false;
      for (std::size_t attempt = 0; attempt < kMaxAttempts && !placed; ++attempt) {
        const auto& lt = traces[pick_trace(rng)];
        std::uniform_int_distribution<std::size_t> pick_start(0, lt.trace->size() - window_length);
        const std::size_t start = pick_start(rng);
        if (lt.labels.intersects_any({start, start + window_length})) continue;
        add(*lt.trace, start, -1, WindowSource::RandomNegative);
        placed = true;
      }
      if (!placed) throw ConfigError("could not draw an event-free random negative window");
    }
  }
  return out;
}

}  // namespace seisnet
