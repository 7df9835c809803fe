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
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "seisnet/data.hpp"
#include "seisnet/model.hpp"

namespace seisnet {

struct Detection {
  std::string trace_id;
  std::size_t start = 0;
  std::size_t end = 0;  // start + L
  double score = 0.0;

  Interval window() const { return {start, end}; }
  friend bool operator==(const Detection&, const Detection&) = default;
};

struct MatchedPair {
  std::size_t detection = 0;  // index into the evaluated list
  std::string trace_id;
  Interval event;
};

struct EvalReport {
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t fn = 0;
  double precision = 1.0;
  double recall = 1.0;
  std::vector<MatchedPair> matches;

  /// Precision and recall from counts, 1.0 for a zero denominator.
  static EvalReport from_counts(std::size_t tp, std::size_t fp, std::size_t fn);
  std::string summary() const;
};

/// Score of one preprocessed window.
using WindowScorer = std::function<double(std::span<const float>)>;

struct ScanOptions {
  std::size_t window_length = 18'000;
  std::size_t offset = 6'000;
  double threshold = 0.0;  // keep windows with score > threshold
  std::size_t threads = 1;
};

struct ScanResult {
  std::vector<Detection> detections;  // sorted by start
  std::size_t windows_evaluated = 0;
};

/// floor((n - L) / offset) + 1 for n >= L, else 0.
std::size_t scan_window_count(std::size_t n, std::size_t window_length, std::size_t offset);

ScanResult scan(const Trace& trace, const WindowScorer& scorer, const ScanOptions& options);
/// Infer-mode model scan; options.window_length must equal the model input length.
ScanResult scan(const Trace& trace, const ModelParams<float>& model, const ScanOptions& options);

/**
 * Collapses each transitively overlapping group of windows (per trace) to its
 * highest-scoring member, ties to the earlier start. Output is sorted by
 * (trace_id, start).
 */
std::vector<Detection> dedup(std::vector<Detection> raw);

/**
 * Greedy one-to-one matching in descending score order (ties: earlier start).
 * A detection is a true positive when its window intersects a still unmatched
 * event; it takes the unmatched event with the largest overlap.
 */
EvalReport evaluate(const std::vector<Detection>& detections, const LabelSet& labels);
/// Same over several traces; detections on traces missing from `labels` count as FP.
EvalReport evaluate(const std::vector<Detection>& detections,
                    const std::map<std::string, LabelSet>& labels);

struct PipelineOptions {
  std::size_t offset = 6'000;
  double threshold = 0.0;
  std::size_t threads = 1;
};

struct PipelineResult {
  std::vector<Detection> detections;
  std::optional<EvalReport> report;  // only with labels
  std::size_t windows_evaluated = 0;
  double seconds = 0.0;
  double windows_per_second = 0.0;
};

/// scan -> dedup -> (evaluate) over in-memory traces.
PipelineResult detect_pipeline(const std::vector<const Trace*>& traces,
                               const ModelParams<float>& model, const PipelineOptions& options,
                               const std::map<std::string, LabelSet>* labels = nullptr);

/// File front end: every trace is read and checked before the weights are loaded.
PipelineResult detect_pipeline(const std::vector<std::filesystem::path>& trace_paths,
                               const std::filesystem::path& weights,
                               const PipelineOptions& options,
                               const IntervalTable* labels = nullptr);

/// Turns an interval table into per-trace label sets for the given traces.
std::map<std::string, LabelSet> label_sets(const IntervalTable& table,
                                           const std::vector<const Trace*>& traces);

// Report files.
/// "trace_id,start_index,end_index,score"
std::string detections_csv(const std::vector<Detection>& detections);
/// Reads detections_csv output back.
std::vector<Detection> parse_detections_csv(const std::string& text,
                                            const std::string& origin = "<csv>");
/// "precision,recall,tp,fp,fn" with precision and recall to 3 decimals.
std::string metrics_csv(const EvalReport& report);
/// "timestamp_index,amplitude,detection" with one row per sample of `trace`.
std::string plot_csv(const Trace& trace, const std::vector<Detection>& detections);

}  // namespace seisnet
