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
#include <gtest/gtest.h>

#include <algorithm>
#include <fstream>
#include <random>
#include <set>

#include "seisnet/detect.hpp"
#include "test_support.hpp"

namespace seisnet {
namespace {

using testing::TempDir;

Detection det(std::size_t start, double score, std::size_t len = 18000, std::string id = "A") {
  return {std::move(id), start, start + len, score};
}

// Connected components of the interval-overlap graph, found by union-find.
std::vector<Detection> dedup_oracle(const std::vector<Detection>& raw) {
  const std::size_t n = raw.size();
  std::vector<std::size_t> parent(n);
  for (std::size_t i = 0; i < n; ++i) parent[i] = i;
  auto find = [&](std::size_t i) {
    while (parent[i] != i) i = parent[i] = parent[parent[i]];
    return i;
  };
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      if (raw[i].trace_id == raw[j].trace_id && raw[i].window().intersects(raw[j].window()))
        parent[find(i)] = find(j);
  std::map<std::size_t, std::size_t> best;
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t r = find(i);
    auto it = best.find(r);
    if (it == best.end()) {
      best[r] = i;
      continue;
    }
    const Detection& b = raw[it->second];
    if (raw[i].score > b.score || (raw[i].score == b.score && raw[i].start < b.start))
      it->second = i;
  }
  std::vector<Detection> out;
  for (const auto& [r, i] : best) out.push_back(raw[i]);
  std::sort(out.begin(), out.end(), [](const Detection& a, const Detection& b) {
    return std::tie(a.trace_id, a.start) < std::tie(b.trace_id, b.start);
  });
  return out;
}

TEST(ScanTest, FullDayWindowCount) {
  EXPECT_EQ(scan_window_count(kDaySamples, 18000, 6000), 2878u);
  EXPECT_EQ(scan_window_count(17999, 18000, 6000), 0u);
  EXPECT_EQ(scan_window_count(18000, 18000, 6000), 1u);
  EXPECT_THROW(scan_window_count(100, 10, 0), ConfigError);
}

TEST(ScanTest, WindowCountMatchesEnumeration) {
  std::mt19937_64 rng(17);
  for (int t = 0; t < 200; ++t) {
    const std::size_t len = 1 + rng() % 500;
    const std::size_t off = 1 + rng() % 300;
    const std::size_t n = rng() % 3000;
    std::size_t count = 0;
    for (std::size_t s = 0; s + len <= n; s += off) ++count;
    EXPECT_EQ(scan_window_count(n, len, off), count) << n << " " << len << " " << off;
  }
}

TEST(ScanTest, ScorerSeesPreprocessedWindowsAtOffsets) {
  Trace t;
  t.station_id = "S";
  t.samples.resize(1000);
  for (std::size_t i = 0; i < t.size(); ++i) t.samples[i] = static_cast<float>(i % 37) * 0.5f;
  ScanOptions o;
  o.window_length = 100;
  o.offset = 90;
  o.threshold = -1.0;
  std::vector<double> seen_means;
  const auto r = scan(t, [&](std::span<const float> w) {
    EXPECT_EQ(w.size(), 100u);
    double m = 0.0;
    for (float v : w) m += v;
    return std::abs(m / 100.0) < 1e-5 ? 1.0 : 0.0;
  }, o);
  EXPECT_EQ(r.windows_evaluated, 11u);
  ASSERT_EQ(r.detections.size(), 11u);
  for (std::size_t i = 0; i < 11; ++i) {
    EXPECT_EQ(r.detections[i].start, i * 90);
    EXPECT_EQ(r.detections[i].end, i * 90 + 100);
    EXPECT_EQ(r.detections[i].trace_id, "S");
  }
}

TEST(ScanTest, ThresholdIsStrict) {
  Trace t;
  t.samples.assign(500, 1.0f);
  ScanOptions o;
  o.window_length = 100;
  o.offset = 100;
  o.threshold = 0.5;
  EXPECT_TRUE(scan(t, [](std::span<const float>) { return 0.5; }, o).detections.empty());
  EXPECT_EQ(scan(t, [](std::span<const float>) { return 0.5000001; }, o).detections.size(), 5u);
}

TEST(ScanTest, ZeroModelScoresItsHeadBias) {
  const ArchSpec spec = ArchSpec::mini();
  ModelParams<float> m = build_model<float>(spec, InitRule::Zeros, 0);
  Trace t;
  t.station_id = "Z";
  std::mt19937_64 rng(1);
  std::normal_distribution<float> nd;
  t.samples.resize(20000);
  for (auto& v : t.samples) v = nd(rng);
  ScanOptions o;
  o.window_length = spec.input_length;
  o.offset = 1500;
  m.head.bias[0] = 1.0f;
  auto r = scan(t, m, o);
  EXPECT_EQ(r.windows_evaluated, scan_window_count(20000, spec.input_length, 1500));
  EXPECT_EQ(r.detections.size(), r.windows_evaluated);
  for (const auto& d : r.detections) EXPECT_EQ(d.score, 1.0);
  m.head.bias[0] = -1.0f;
  EXPECT_TRUE(scan(t, m, o).detections.empty());
  o.window_length = 4000;
  EXPECT_THROW(scan(t, m, o), ConfigError);
}

TEST(DedupTest, OverlappingPairKeepsHigherScore) {
  const auto out = dedup({det(0, 0.3), det(6000, 0.9)});
  ASSERT_EQ(out.size(), 1u);
  EXPECT_EQ(out[0].start, 6000u);
}

TEST(DedupTest, TiesKeepEarlierStart) {
  const auto out = dedup({det(6000, 0.5), det(0, 0.5)});
  ASSERT_EQ(out.size(), 1u);
  EXPECT_EQ(out[0].start, 0u);
}

TEST(DedupTest, ChainIsTransitive) {
  // 0 and 24000 do not overlap but are joined through 12000.
  const auto out = dedup({det(0, 0.9), det(12000, 0.1), det(24000, 0.5), det(42000, 0.2)});
  ASSERT_EQ(out.size(), 2u);
  EXPECT_EQ(out[0].start, 0u);
  EXPECT_EQ(out[1].start, 42000u);
}

TEST(DedupTest, AdjacentWindowsAreSeparate) {
  EXPECT_EQ(dedup({det(0, 0.1), det(18000, 0.2)}).size(), 2u);
  EXPECT_EQ(dedup({det(0, 0.1, 18000, "A"), det(0, 0.2, 18000, "B")}).size(), 2u);
  EXPECT_TRUE(dedup({}).empty());
}

TEST(DedupTest, MatchesComponentOracle) {
  std::mt19937_64 rng(23);
  for (int trial = 0; trial < 500; ++trial) {
    std::vector<Detection> raw;
    const std::size_t n = 1 + rng() % 20;
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t len = 1 + rng() % 60;
      // Coarse scores force ties.
      raw.push_back(det(rng() % 300, static_cast<double>(rng() % 5), len, rng() % 3 ? "A" : "B"));
    }
    const auto got = dedup(raw);
    EXPECT_EQ(got, dedup_oracle(raw)) << "trial " << trial;
    for (std::size_t i = 0; i + 1 < got.size(); ++i)
      if (got[i].trace_id == got[i + 1].trace_id)
        EXPECT_FALSE(got[i].window().intersects(got[i + 1].window()));
  }
}

TEST(EvaluateTest, PerfectDetections) {
  std::vector<Interval> evs;
  std::vector<Detection> ds;
  for (std::size_t k = 0; k < 5; ++k) {
    evs.push_back({50000 * k + 1000, 50000 * k + 9000});
    ds.push_back(det(50000 * k, 0.9));
  }
  const auto r = evaluate(ds, LabelSet(evs, 300000));
  EXPECT_EQ(r.tp, 5u);
  EXPECT_EQ(r.fp, 0u);
  EXPECT_EQ(r.fn, 0u);
  EXPECT_DOUBLE_EQ(r.precision, 1.0);
  EXPECT_DOUBLE_EQ(r.recall, 1.0);
  EXPECT_EQ(r.matches.size(), 5u);
}

TEST(EvaluateTest, VacuousCase) {
  const auto r = evaluate({}, LabelSet({}, 100));
  EXPECT_EQ(r.tp + r.fp + r.fn, 0u);
  EXPECT_DOUBLE_EQ(r.precision, 1.0);
  EXPECT_DOUBLE_EQ(r.recall, 1.0);
}

TEST(EvaluateTest, CountsAndRounding) {
  const auto r = EvalReport::from_counts(24, 3, 2);
  EXPECT_EQ(metrics_csv(r), "precision,recall,tp,fp,fn\n0.889,0.923,24,3,2\n");
  EXPECT_EQ(r.summary(), "TP=24 FP=3 FN=2 precision=0.889 recall=0.923");
}

TEST(EvaluateTest, OneDetectionMatchesOneEvent) {
  // One window covering two events: one TP and one FN.
  const LabelSet labels({{100, 200}, {300, 400}}, 1000);
  const auto r = evaluate({det(0, 0.9, 500)}, labels);
  EXPECT_EQ(r.tp, 1u);
  EXPECT_EQ(r.fn, 1u);
  // Largest overlap wins.
  const LabelSet l2({{100, 200}, {300, 490}}, 1000);
  const auto r2 = evaluate({det(0, 0.9, 500)}, l2);
  ASSERT_EQ(r2.matches.size(), 1u);
  EXPECT_EQ(r2.matches[0].event.start, 300u);
  // Two detections on one event: the higher score is the TP.
  const auto r3 = evaluate({det(0, 0.2, 150), det(150, 0.8, 150)}, LabelSet({{100, 200}}, 1000));
  EXPECT_EQ(r3.tp, 1u);
  EXPECT_EQ(r3.fp, 1u);
  EXPECT_EQ(r3.matches.at(0).detection, 1u);
}

TEST(EvaluateTest, InvariantsOnRandomInputs) {
  std::mt19937_64 rng(31);
  for (int trial = 0; trial < 300; ++trial) {
    std::vector<Interval> evs;
    std::size_t pos = rng() % 50;
    while (evs.size() < rng() % 8) {
      const std::size_t len = 1 + rng() % 40;
      evs.push_back({pos, pos + len});
      pos += len + rng() % 60;
    }
    const LabelSet labels(evs, pos + 100);
    std::vector<Detection> ds;
    const std::size_t n = rng() % 12;
    for (std::size_t i = 0; i < n; ++i)
      ds.push_back(det(rng() % (pos + 50), static_cast<double>(rng() % 100) / 100.0, 1 + rng() % 50));
    const auto r = evaluate(ds, labels);
    EXPECT_EQ(r.tp + r.fp, ds.size());
    EXPECT_EQ(r.tp + r.fn, evs.size());
    EXPECT_EQ(r.matches.size(), r.tp);
    std::set<std::size_t> det_used;
    std::set<std::size_t> ev_used;
    for (const auto& m : r.matches) {
      EXPECT_TRUE(det_used.insert(m.detection).second);
      EXPECT_TRUE(ev_used.insert(m.event.start).second);
      EXPECT_TRUE(ds[m.detection].window().intersects(m.event));
    }
    // Dropping the lowest-scored detection never raises TP.
    if (!ds.empty()) {
      auto fewer = ds;
      auto lowest = std::min_element(fewer.begin(), fewer.end(), [](auto& a, auto& b) {
        return a.score < b.score;
      });
      fewer.erase(lowest);
      EXPECT_LE(evaluate(fewer, labels).tp, r.tp);
    }
  }
}

TEST(EvaluateTest, UnknownTraceCountsAsFalsePositive) {
  std::map<std::string, LabelSet> labels;
  labels.emplace("A", LabelSet({{100, 200}}, 1000));
  const auto r = evaluate({det(0, 0.9, 500, "A"), det(0, 0.9, 500, "B")}, labels);
  EXPECT_EQ(r.tp, 1u);
  EXPECT_EQ(r.fp, 1u);
  EXPECT_EQ(r.fn, 0u);
}

TEST(ReportTest, CsvWriters) {
  EXPECT_EQ(detections_csv({det(0, 0.5, 10, "X")}), "trace_id,start_index,end_index,score\nX,0,10,0.5\n");
  Trace t;
  t.station_id = "X";
  t.samples = {1.0f, -2.5f, 3.0f};
  EXPECT_EQ(plot_csv(t, {det(1, 0.5, 1, "X"), det(0, 0.5, 3, "Y")}),
            "timestamp_index,amplitude,detection\n0,1,0\n1,-2.5,1\n2,3,0\n");
}

TEST(ReportTest, DetectionsCsvRoundTrip) {
  const std::vector<Detection> ds{det(0, 0.125, 10, "X"), det(40, -3.5, 10, "Y")};
  EXPECT_EQ(parse_detections_csv(detections_csv(ds)), ds);
  EXPECT_TRUE(parse_detections_csv(detections_csv({})).empty());
  EXPECT_THROW(parse_detections_csv("trace_id,start_index,end_index,score\nX,5,2,0.1\n"),
               FormatError);
  EXPECT_THROW(parse_detections_csv("X,a,2,0.1\n"), FormatError);
  EXPECT_THROW(parse_detections_csv("X,1,2\n"), FormatError);
}

TEST(PipelineTest, FilesWithoutLabels) {
  TempDir dir("pipeline");
  const ArchSpec spec = ArchSpec::mini();
  ModelParams<float> m = build_model<float>(spec, InitRule::Zeros, 0);
  m.head.bias[0] = 2.0f;
  save_weights(m, (dir / "m.weights").string());
  Trace t;
  t.station_id = "P";
  t.samples.assign(12000, 0.25f);
  write_trace(t, dir / "p.trc");
  PipelineOptions o;
  o.offset = 1500;
  const auto r = detect_pipeline({dir / "p.trc"}, dir / "m.weights", o);
  EXPECT_FALSE(r.report.has_value());
  EXPECT_EQ(r.windows_evaluated, scan_window_count(12000, spec.input_length, 1500));
  // Every window scores the same, so all overlap into one detection at the start.
  ASSERT_EQ(r.detections.size(), 1u);
  EXPECT_EQ(r.detections[0].start, 0u);

  IntervalTable table{{"P", {{5000, 6000}}}};
  const auto lr = detect_pipeline({dir / "p.trc"}, dir / "m.weights", o, &table);
  ASSERT_TRUE(lr.report.has_value());
  EXPECT_EQ(lr.report->tp, 0u);
  EXPECT_EQ(lr.report->fp, 1u);
  EXPECT_EQ(lr.report->fn, 1u);
}

TEST(PipelineTest, BadTraceFailsBeforeModelLoad) {
  TempDir dir("pipeline_bad");
  { std::ofstream(dir / "empty.trc", std::ios::binary); }
  // The weights file does not exist: the trace error must surface first.
  EXPECT_THROW(detect_pipeline({dir / "empty.trc"}, dir / "missing.weights", PipelineOptions{}),
               FormatError);
  EXPECT_THROW(detect_pipeline(std::vector<std::filesystem::path>{}, dir / "missing.weights",
                               PipelineOptions{}),
               ConfigError);
  Trace t;
  t.station_id = "S";
  t.samples.assign(100, 0.0f);
  write_trace(t, dir / "short.trc");
  save_weights(build_model<float>(ArchSpec::mini(), InitRule::Zeros, 0),
               (dir / "m.weights").string());
  EXPECT_THROW(detect_pipeline({dir / "short.trc"}, dir / "m.weights", PipelineOptions{}),
               ConfigError);
}

}  // namespace
}  // namespace seisnet
