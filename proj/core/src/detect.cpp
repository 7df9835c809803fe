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
#include "seisnet/detect.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <numeric>
#include <sstream>
#include <tuple>

#include "seisnet/parallel.hpp"
#include "seisnet/train.hpp"

namespace seisnet {

EvalReport EvalReport::from_counts(std::size_t tp, std::size_t fp, std::size_t fn) {
  EvalReport r;
  r.tp = tp;
  r.fp = fp;
  r.fn = fn;
  r.precision = tp + fp == 0 ? 1.0 : static_cast<double>(tp) / static_cast<double>(tp + fp);
  r.recall = tp + fn == 0 ? 1.0 : static_cast<double>(tp) / static_cast<double>(tp + fn);
  return r;
}

std::string EvalReport::summary() const {
  char buf[160];
  std::snprintf(buf, sizeof(buf), "TP=%zu FP=%zu FN=%zu precision=%.3f recall=%.3f", tp, fp, fn,
                precision, recall);
  return buf;
}

std::size_t scan_window_count(std::size_t n, std::size_t window_length, std::size_t offset) {
  if (offset == 0) throw ConfigError("scan offset must be positive");
  if (window_length == 0 || n < window_length) return 0;
  return (n - window_length) / offset + 1;
}

ScanResult scan(const Trace& trace, const WindowScorer& scorer, const ScanOptions& options) {
  const std::size_t count = scan_window_count(trace.size(), options.window_length, options.offset);
  std::vector<double> scores(count);
  parallel_for(count, options.threads, [&](std::size_t i) {
    const std::size_t start = i * options.offset;
    const std::span<const float> raw(trace.samples.data() + start, options.window_length);
    const std::vector<float> window = preprocess<float>(raw);
    scores[i] = scorer(window);
  });
  ScanResult result;
  result.windows_evaluated = count;
  for (std::size_t i = 0; i < count; ++i) {
    if (scores[i] > options.threshold) {
      const std::size_t start = i * options.offset;
      result.detections.push_back(
          {trace.station_id, start, start + options.window_length, scores[i]});
    }
  }
  return result;
}

ScanResult scan(const Trace& trace, const ModelParams<float>& model, const ScanOptions& options) {
  if (options.window_length != model.spec.input_length) {
    throw ConfigError("scan window length " + std::to_string(options.window_length) +
                      " differs from the model input length " +
                      std::to_string(model.spec.input_length));
  }
  const WindowScorer scorer = [&](std::span<const float> w) {
    FeatureMap<float> x(w.size(), 1, std::vector<float>(w.begin(), w.end()));
    return static_cast<double>(forward(x, model));
  };
  return scan(trace, scorer, options);
}

std::vector<Detection> dedup(std::vector<Detection> raw) {
  std::stable_sort(raw.begin(), raw.end(), [](const Detection& a, const Detection& b) {
    return std::tie(a.trace_id, a.start) < std::tie(b.trace_id, b.start);
  });
  std::vector<Detection> out;
  std::size_t group_end = 0;
  for (std::size_t i = 0; i < raw.size(); ++i) {
    const Detection& d = raw[i];
    const bool joins = !out.empty() && out.back().trace_id == d.trace_id && d.start < group_end;
    if (!joins) {
      out.push_back(d);
      group_end = d.end;
      continue;
    }
    group_end = std::max(group_end, d.end);
    // Strictly greater keeps the earlier start on ties.
    if (d.score > out.back().score) out.back() = d;
  }
  return out;
}

namespace {

std::vector<std::size_t> score_order(const std::vector<Detection>& detections) {
  std::vector<std::size_t> order(detections.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    const Detection& x = detections[a];
    const Detection& y = detections[b];
    if (x.score != y.score) return x.score > y.score;
    return x.start < y.start;
  });
  return order;
}

}  // namespace

EvalReport evaluate(const std::vector<Detection>& detections,
                    const std::map<std::string, LabelSet>& labels) {
  std::map<std::string, std::vector<bool>> used;
  std::size_t events = 0;
  for (const auto& [id, set] : labels) {
    used[id].assign(set.size(), false);
    events += set.size();
  }
  std::size_t tp = 0;
  std::vector<MatchedPair> matches;
  for (std::size_t idx : score_order(detections)) {
    const Detection& d = detections[idx];
    auto it = labels.find(d.trace_id);
    if (it == labels.end()) continue;
    const auto& evs = it->second.events();
    auto& taken = used[d.trace_id];
    std::size_t best = evs.size();
    std::size_t best_overlap = 0;
    for (std::size_t e = 0; e < evs.size(); ++e) {
      if (taken[e]) continue;
      const std::size_t ov = evs[e].overlap(d.window());
      if (ov > best_overlap) {
        best_overlap = ov;
        best = e;
      }
    }
    if (best == evs.size()) continue;
    taken[best] = true;
    ++tp;
    matches.push_back({idx, d.trace_id, evs[best]});
  }
  EvalReport report = EvalReport::from_counts(tp, detections.size() - tp, events - tp);
  report.matches = std::move(matches);
  return report;
}

EvalReport evaluate(const std::vector<Detection>& detections, const LabelSet& labels) {
  // A single label set matches every detection regardless of trace id.
  std::vector<Detection> local = detections;
  for (auto& d : local) d.trace_id.clear();
  EvalReport r = evaluate(local, std::map<std::string, LabelSet>{{"", labels}});
  for (auto& m : r.matches) m.trace_id = detections[m.detection].trace_id;
  return r;
}

std::map<std::string, LabelSet> label_sets(const IntervalTable& table,
                                           const std::vector<const Trace*>& traces) {
  std::map<std::string, LabelSet> out;
  for (const Trace* t : traces) {
    auto it = table.find(t->station_id);
    std::vector<Interval> events = it == table.end() ? std::vector<Interval>{} : it->second;
    out.emplace(t->station_id, LabelSet(std::move(events), t->size()));
  }
  for (const auto& [id, ivs] : table) {
    if (!out.count(id)) throw ConfigError("labels name trace '" + id + "' which was not given");
  }
  return out;
}

PipelineResult detect_pipeline(const std::vector<const Trace*>& traces,
                               const ModelParams<float>& model, const PipelineOptions& options,
                               const std::map<std::string, LabelSet>* labels) {
  const auto t0 = std::chrono::steady_clock::now();
  ScanOptions so;
  so.window_length = model.spec.input_length;
  so.offset = options.offset;
  so.threshold = options.threshold;
  so.threads = options.threads;

  PipelineResult result;
  std::vector<Detection> raw;
  for (const Trace* t : traces) {
    ScanResult s = scan(*t, model, so);
    result.windows_evaluated += s.windows_evaluated;
    raw.insert(raw.end(), s.detections.begin(), s.detections.end());
  }
  result.detections = dedup(std::move(raw));
  if (labels) result.report = evaluate(result.detections, *labels);
  result.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  result.windows_per_second =
      result.seconds > 0.0 ? static_cast<double>(result.windows_evaluated) / result.seconds : 0.0;
  return result;
}

PipelineResult detect_pipeline(const std::vector<std::filesystem::path>& trace_paths,
                               const std::filesystem::path& weights,
                               const PipelineOptions& options, const IntervalTable* labels) {
  if (trace_paths.empty()) throw ConfigError("no trace files given");
  std::vector<Trace> traces;
  for (const auto& p : trace_paths) traces.push_back(read_trace(p));
  std::vector<const Trace*> ptrs;
  for (const auto& t : traces) ptrs.push_back(&t);
  std::optional<std::map<std::string, LabelSet>> sets;
  if (labels) sets = label_sets(*labels, ptrs);

  const ModelParams<float> model = load_weights(weights.string());
  for (const auto& t : traces) {
    if (t.size() < model.spec.input_length) {
      throw ConfigError("trace " + t.station_id + " has " + std::to_string(t.size()) +
                        " samples, fewer than the model window of " +
                        std::to_string(model.spec.input_length));
    }
  }
  return detect_pipeline(ptrs, model, options, sets ? &*sets : nullptr);
}

std::string detections_csv(const std::vector<Detection>& detections) {
  std::string out = "trace_id,start_index,end_index,score\n";
  char buf[64];
  for (const auto& d : detections) {
    std::snprintf(buf, sizeof(buf), ",%zu,%zu,%.9g\n", d.start, d.end, d.score);
    out += d.trace_id;
    out += buf;
  }
  return out;
}

std::vector<Detection> parse_detections_csv(const std::string& text, const std::string& origin) {
  std::vector<Detection> out;
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line_no == 1 && line.rfind("trace_id,", 0) == 0) continue;
    const std::string where = origin + " line " + std::to_string(line_no);
    std::vector<std::string> f;
    std::stringstream fields(line);
    for (std::string cell; std::getline(fields, cell, ',');) f.push_back(cell);
    if (f.size() != 4) throw FormatError(where + ": expected trace_id,start_index,end_index,score");
    Detection d;
    d.trace_id = f[0];
    try {
      std::size_t used = 0;
      d.start = std::stoull(f[1], &used);
      if (used != f[1].size() || f[1][0] == '-') throw std::invalid_argument(f[1]);
      d.end = std::stoull(f[2], &used);
      if (used != f[2].size() || f[2][0] == '-') throw std::invalid_argument(f[2]);
      d.score = std::stod(f[3], &used);
      if (used != f[3].size()) throw std::invalid_argument(f[3]);
    } catch (const std::logic_error&) {
      throw FormatError(where + ": malformed number");
    }
    if (d.start >= d.end) throw FormatError(where + ": start_index must be < end_index");
    out.push_back(std::move(d));
  }
  return out;
}

std::string metrics_csv(const EvalReport& report) {
  char buf[128];
  std::snprintf(buf, sizeof(buf), "%.3f,%.3f,%zu,%zu,%zu\n", report.precision, report.recall,
                report.tp, report.fp, report.fn);
  return std::string("precision,recall,tp,fp,fn\n") + buf;
}

std::string plot_csv(const Trace& trace, const std::vector<Detection>& detections) {
  std::vector<char> flag(trace.size(), 0);
  for (const auto& d : detections) {
    if (d.trace_id != trace.station_id) continue;
    for (std::size_t i = d.start; i < std::min(d.end, trace.size()); ++i) flag[i] = 1;
  }
  std::string out = "timestamp_index,amplitude,detection\n";
  out.reserve(out.size() + trace.size() * 24);
  char buf[64];
  for (std::size_t i = 0; i < trace.size(); ++i) {
    const int n = std::snprintf(buf, sizeof(buf), "%zu,%.9g,%d\n", i,
                                static_cast<double>(trace.samples[i]), flag[i]);
    out.append(buf, static_cast<std::size_t>(n));
  }
  return out;
}

}  // namespace seisnet
