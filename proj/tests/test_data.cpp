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

#include <cmath>
#include <cstring>
#include <fstream>
#include <random>
#include <sstream>

#include "seisnet/data.hpp"
#include "seisnet/io.hpp"
#include "test_support.hpp"

namespace seisnet {
namespace {

using testing::TempDir;

Trace random_trace(std::size_t n, std::uint64_t seed, const std::string& id = "STA") {
  std::mt19937_64 rng(seed);
  std::normal_distribution<float> g(0.0f, 100.0f);
  Trace t;
  t.samples.resize(n);
  for (auto& v : t.samples) v = g(rng);
  t.start_time = 1.5e9 + static_cast<double>(seed);
  t.station_id = id;
  return t;
}

TEST(TraceFileTest, BinaryRoundTripIsBitIdentical) {
  const Trace t = random_trace(10007, 1);
  std::stringstream buf;
  write_trace_binary(t, buf);
  EXPECT_EQ(read_trace_binary(buf), t);

  TempDir dir("trace");
  write_trace(t, dir / "a.trace");
  const Trace back = read_trace(dir / "a.trace");
  ASSERT_EQ(back.samples.size(), t.samples.size());
  EXPECT_EQ(std::memcmp(back.samples.data(), t.samples.data(), t.samples.size() * 4), 0);
  EXPECT_EQ(back, t);
}

TEST(TraceFileTest, CsvRoundTripIsExact) {
  TempDir dir("csv");
  Trace t = random_trace(500, 2, "csvtrace");
  t.start_time = 0.0;
  write_trace(t, dir / "csvtrace.csv");
  const Trace back = read_trace(dir / "csvtrace.csv");
  EXPECT_EQ(back.samples, t.samples);
  EXPECT_EQ(back.station_id, "csvtrace");
  EXPECT_EQ(back.sample_rate, 200.0);
}

TEST(TraceFileTest, CsvWithFiveRows) {
  std::istringstream in("timestamp_index,amplitude\n0,1.5\n1,-2\n2,0\n3,4e-3\n4,7\n");
  const Trace t = read_trace_csv(in);
  EXPECT_EQ(t.samples, (std::vector<float>{1.5f, -2.0f, 0.0f, 4e-3f, 7.0f}));
}

TEST(TraceFileTest, CsvErrorsNameTheLine) {
  std::istringstream gap("timestamp_index,amplitude\n0,1\n2,3\n");
  try {
    read_trace_csv(gap);
    FAIL();
  } catch (const FormatError& e) {
    EXPECT_NE(std::string(e.what()).find("line 3"), std::string::npos) << e.what();
  }
  std::istringstream junk("0,abc\n");
  EXPECT_THROW(read_trace_csv(junk), FormatError);
  std::istringstream empty("timestamp_index,amplitude\n");
  EXPECT_THROW(read_trace_csv(empty), FormatError);
}

TEST(TraceFileTest, TruncatedBodyReportsCounts) {
  const Trace t = random_trace(100, 3);
  std::stringstream buf;
  write_trace_binary(t, buf);
  const std::string bytes = buf.str();
  std::stringstream cut(bytes.substr(0, bytes.size() - 4 * 40 - 2));
  try {
    read_trace_binary(cut);
    FAIL() << "expected FormatError";
  } catch (const FormatError& e) {
    const std::string msg = e.what();
    EXPECT_NE(msg.find("expected 100"), std::string::npos) << msg;
    EXPECT_NE(msg.find("found 59"), std::string::npos) << msg;
    EXPECT_NE(msg.find("offset"), std::string::npos) << msg;
  }
}

TEST(TraceFileTest, BadMagicAndShortHeader) {
  std::stringstream junk("NOTATRACE-at-all-really");
  EXPECT_THROW(read_trace_binary(junk), FormatError);
  std::stringstream tiny("SEIS");
  EXPECT_THROW(read_trace_binary(tiny), FormatError);
  TempDir dir("empty");
  std::ofstream(dir / "empty.trace").close();
  EXPECT_THROW(read_trace(dir / "empty.trace"), FormatError);
}

TEST(LabelSetTest, ValidatesBoundsAndOverlap) {
  EXPECT_THROW(LabelSet({{5, 5}}, 10), ConfigError);
  EXPECT_THROW(LabelSet({{5, 11}}, 10), ConfigError);
  EXPECT_THROW(LabelSet({{0, 5}, {4, 8}}, 10), ConfigError);
  const LabelSet ok({{6, 8}, {0, 5}}, 10);
  ASSERT_EQ(ok.size(), 2u);
  EXPECT_EQ(ok.events()[0], (Interval{0, 5}));
  EXPECT_NO_THROW(LabelSet({{0, 5}, {5, 10}}, 10));
}

TEST(LabelSetTest, IntersectsAnyMatchesBruteForce) {
  std::mt19937_64 rng(4);
  std::vector<Interval> evs;
  for (std::size_t s = 100; s < 9500; s += 700) evs.push_back({s, s + 150 + s % 300});
  const LabelSet labels(evs, 10000);
  std::uniform_int_distribution<std::size_t> start_d(0, 9900), len_d(1, 400);
  for (int i = 0; i < 5000; ++i) {
    const std::size_t s = start_d(rng);
    const Interval w{s, std::min<std::size_t>(10000, s + len_d(rng))};
    bool brute = false;
    for (const auto& e : evs) brute |= (w.start < e.end && e.start < w.end);
    ASSERT_EQ(labels.intersects_any(w), brute) << w.start << "," << w.end;
  }
}

TEST(IntervalCsvTest, RoundTripAndErrors) {
  IntervalTable t{{"A", {{1, 5}, {10, 20}}}, {"B", {{0, 3}}}};
  const std::string csv = interval_csv(t);
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "trace_id,start_index,end_index");
  EXPECT_EQ(parse_interval_csv(csv), t);
  EXPECT_THROW(parse_interval_csv("trace_id,start_index,end_index\nA,5,5\n"), FormatError);
  EXPECT_THROW(parse_interval_csv("A,x,5\n"), FormatError);
  EXPECT_THROW(parse_interval_csv("A,1\n"), FormatError);
}

TEST(WindowTest, ExtractFirstLastAndOverlap) {
  Trace day;
  day.samples.resize(kDaySamples);
  for (std::size_t i = 0; i < day.samples.size(); ++i) day.samples[i] = static_cast<float>(i % 9973);
  const auto first = extract_window(day, 0, 18000);
  EXPECT_TRUE(std::equal(first.begin(), first.end(), day.samples.begin()));
  const auto last = extract_window(day, kDaySamples - 18000, 18000);
  EXPECT_EQ(last.back(), day.samples.back());
  const auto next = extract_window(day, 6000, 18000);
  EXPECT_TRUE(std::equal(first.begin() + 6000, first.end(), next.begin()));
  EXPECT_THROW(extract_window(day, kDaySamples - 17999, 18000), std::out_of_range);
}

TEST(WindowTest, CenteredStartContainsEvent) {
  EXPECT_EQ(centered_window_start({1000, 2000}, 4500, 100000), 0u);
  EXPECT_EQ(centered_window_start({50000, 52000}, 4500, 100000), 51000u - 2250u);
  EXPECT_EQ(centered_window_start({99000, 99900}, 4500, 100000), 95500u);
}

struct Corpus {
  std::vector<Trace> traces;
  std::vector<LabeledTrace> labeled;
};

// Three traces with 11 events each.
Corpus field_sized_corpus() {
  Corpus c;
  for (int i = 0; i < 3; ++i) c.traces.push_back(random_trace(400000, 10 + static_cast<std::uint64_t>(i), "T" + std::to_string(i)));
  for (int i = 0; i < 3; ++i) {
    std::vector<Interval> evs;
    for (std::size_t k = 0; k < 11; ++k) {
      const std::size_t s = 10000 + k * 35000 + static_cast<std::size_t>(i) * 500;
      evs.push_back({s, s + 4000 + k * 700});
    }
    c.labeled.push_back({&c.traces[static_cast<std::size_t>(i)], LabelSet(evs, 400000)});
  }
  return c;
}

TEST(TrainingSetTest, FieldScaleCounts) {
  const Corpus c = field_sized_corpus();
  NegativePolicy policy;
  for (int i = 0; i < 83; ++i) {
    const std::size_t s = 20000 + static_cast<std::size_t>(i) * 4000;
    policy.picked["T" + std::to_string(i % 3)].push_back({s, s + 2000});
  }
  policy.random_count = 330;
  const auto set = make_training_set(c.labeled, 18000, policy);
  ASSERT_EQ(set.size(), 446u);
  std::size_t pos = 0, picked = 0, random = 0;
  for (const auto& w : set) {
    pos += w.source == WindowSource::Event;
    picked += w.source == WindowSource::PickedNegative;
    random += w.source == WindowSource::RandomNegative;
    EXPECT_EQ(w.samples.size(), 18000u);
  }
  EXPECT_EQ(pos, 33u);
  EXPECT_EQ(picked, 83u);
  EXPECT_EQ(random, 330u);
}

TEST(TrainingSetTest, PositivesContainEventAndArePreprocessed) {
  const Corpus c = field_sized_corpus();
  const auto set = make_training_set(c.labeled, 18000, NegativePolicy{});
  ASSERT_EQ(set.size(), 33u);
  std::size_t i = 0;
  for (const auto& lt : c.labeled)
    for (const auto& e : lt.labels.events()) {
      const auto& w = set[i++];
      EXPECT_EQ(w.label, 1);
      EXPECT_LE(w.start, e.start);
      EXPECT_GE(w.start + 18000, e.end);
      double mean = 0.0, sq = 0.0;
      for (float v : w.samples) mean += v;
      mean /= 18000.0;
      for (float v : w.samples) sq += (v - mean) * (v - mean);
      EXPECT_LT(std::abs(mean), 1e-5);
      EXPECT_LT(std::abs(sq / 18000.0 - 1.0), 1e-5);
    }
}

TEST(TrainingSetTest, ZeroEventsGivesOnlyRandomNegatives) {
  const Trace t = random_trace(50000, 7, "Q");
  NegativePolicy policy;
  policy.random_count = 25;
  const auto set = make_training_set({{&t, LabelSet({}, t.size())}}, 4500, policy);
  ASSERT_EQ(set.size(), 25u);
  for (const auto& w : set) EXPECT_EQ(w.label, -1);
}

TEST(TrainingSetTest, RandomNegativesNeverTouchEvents) {
  const Corpus c = field_sized_corpus();
  NegativePolicy policy;
  policy.random_count = 1000;
  policy.seed = 77;
  const auto set = make_training_set(c.labeled, 18000, policy);
  std::size_t checked = 0;
  for (const auto& w : set) {
    if (w.source != WindowSource::RandomNegative) continue;
    ++checked;
    for (const auto& lt : c.labeled) {
      if (lt.trace->station_id != w.trace_id) continue;
      for (const auto& e : lt.labels.events())
        ASSERT_FALSE(w.start < e.end && e.start < w.start + 18000) << w.trace_id << "@" << w.start;
    }
  }
  EXPECT_EQ(checked, 1000u);
}

TEST(TrainingSetTest, PickedEdgesAddShiftedWindows) {
  const Trace t = random_trace(100000, 4, "E");
  const std::vector<LabeledTrace> labeled{{&t, LabelSet({{50000, 52000}}, 100000)}};
  NegativePolicy policy;
  policy.picked["E"] = {{20000, 21000}, {47000, 48000}, {100, 600}};
  EXPECT_EQ(make_training_set(labeled, 4500, policy).size(), 1u + 3u);

  policy.picked_edges = true;
  const auto set = make_training_set(labeled, 4500, policy);
  std::vector<std::size_t> starts;
  for (const auto& w : set)
    if (w.source == WindowSource::PickedNegative) starts.push_back(w.start);
  // margin (4500 - 1000) / 8 = 437; the early window at 46563 would touch the
  // event and the clamped ones at 0 repeat the centred window.
  const std::vector<std::size_t> expected{18250, 19563, 16937, 45250, 43937, 0};
  EXPECT_EQ(starts, expected);
  for (const auto& w : set) {
    if (w.source != WindowSource::PickedNegative) continue;
    EXPECT_EQ(w.label, -1);
    EXPECT_FALSE(labeled[0].labels.intersects_any({w.start, w.start + 4500}));
  }
}

TEST(TrainingSetTest, EventLongerThanWindowIsAnError) {
  const Trace t = random_trace(50000, 8, "L");
  EXPECT_THROW(make_training_set({{&t, LabelSet({{100, 5000}}, t.size())}}, 4500, NegativePolicy{}),
               ConfigError);
}

TEST(AtomicWriteTest, ReplacesContentsWholly) {
  TempDir dir("atomic");
  atomic_write_file(dir / "f.txt", "first");
  atomic_write_file(dir / "f.txt", "second");
  EXPECT_EQ(read_file(dir / "f.txt"), "second");
  EXPECT_THROW(atomic_write_file(dir / "missing" / "f.txt", "x"), std::runtime_error);
}

}  // namespace
}  // namespace seisnet
