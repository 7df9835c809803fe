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
#include "seisnet/synth.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "seisnet/parallel.hpp"

namespace seisnet {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

double uniform(std::mt19937_64& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

std::size_t uniform_size(std::mt19937_64& rng, std::size_t lo, std::size_t hi) {
  return std::uniform_int_distribution<std::size_t>(lo, hi)(rng);
}

// RBJ band-pass biquad, 0 dB peak gain.
struct Biquad {
  double b0, b1, b2, a1, a2;
  double x1 = 0, x2 = 0, y1 = 0, y2 = 0;

  Biquad(double center_hz, double q, double fs) {
    const double w0 = kTwoPi * center_hz / fs;
    const double alpha = std::sin(w0) / (2.0 * q);
    const double a0 = 1.0 + alpha;
    b0 = alpha / a0;
    b1 = 0.0;
    b2 = -alpha / a0;
    a1 = -2.0 * std::cos(w0) / a0;
    a2 = (1.0 - alpha) / a0;
  }

  double operator()(double x) {
    const double y = b0 * x + b1 * x1 + b2 * x2 - a1 * y1 - a2 * y2;
    x2 = x1;
    x1 = x;
    y2 = y1;
    y1 = y;
    return y;
  }
};

double rms(const double* v, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += v[i] * v[i];
  return n ? std::sqrt(s / static_cast<double>(n)) : 0.0;
}

std::vector<double> make_noise(const SynthConfig& cfg, std::mt19937_64& rng) {
  const std::size_t n = cfg.samples_per_day;
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::vector<double> white(n);
  for (auto& v : white) v = gauss(rng);

  const double center = std::sqrt(cfg.colored_low_hz * cfg.colored_high_hz);
  const double q = center / (cfg.colored_high_hz - cfg.colored_low_hz);
  Biquad s1(center, q, cfg.sample_rate), s2(center, q, cfg.sample_rate);
  // Settle the filter state before the first kept sample.
  const std::size_t warmup = static_cast<std::size_t>(4.0 * cfg.sample_rate / cfg.colored_low_hz);
  for (std::size_t i = 0; i < warmup; ++i) s2(s1(gauss(rng)));
  std::vector<double> colored(n);
  for (auto& v : colored) v = s2(s1(gauss(rng)));

  const double cr = rms(colored.data(), n);
  const double scale_c = cr > 0.0 ? cfg.colored_ratio / cr : 0.0;
  // Unit total noise RMS.
  const double norm = 1.0 / std::sqrt(1.0 + cfg.colored_ratio * cfg.colored_ratio);
  for (std::size_t i = 0; i < n; ++i) white[i] = norm * (white[i] + scale_c * colored[i]);
  return white;
}

struct Placement {
  std::size_t start;
  std::size_t span;
};

std::vector<Placement> place(const std::vector<std::size_t>& spans, const SynthConfig& cfg,
                             std::mt19937_64& rng) {
  const std::size_t n = cfg.samples_per_day;
  std::size_t needed = 0;
  for (std::size_t s : spans) needed += s + cfg.min_separation;
  if (!spans.empty() && needed - cfg.min_separation > n) {
    throw ConfigError("infeasible placement: " + std::to_string(spans.size()) +
                      " events/confounders need " + std::to_string(needed - cfg.min_separation) +
                      " samples, trace has " + std::to_string(n));
  }
  std::vector<Placement> placed;
  constexpr std::size_t kMaxAttempts = 100000;
  for (std::size_t span : spans) {
    bool ok = false;
    for (std::size_t attempt = 0; attempt < kMaxAttempts && !ok; ++attempt) {
      const std::size_t start = uniform_size(rng, 0, n - span);
      ok = std::all_of(placed.begin(), placed.end(), [&](const Placement& p) {
        return start >= p.start + p.span + cfg.min_separation ||
               p.start >= start + span + cfg.min_separation;
      });
      if (ok) placed.push_back({start, span});
    }
    if (!ok) {
      throw ConfigError("infeasible placement: could not fit " + std::to_string(spans.size()) +
                        " non-overlapping events/confounders into " + std::to_string(n) +
                        " samples");
    }
  }
  return placed;
}

void add_scaled(std::vector<double>& trace, std::size_t start, const std::vector<double>& wave,
                double snr) {
  const double noise_rms = rms(trace.data() + start, wave.size());
  const double wave_rms = rms(wave.data(), wave.size());
  if (wave_rms == 0.0) return;
  const double gain = snr * noise_rms / wave_rms;
  for (std::size_t i = 0; i < wave.size(); ++i) trace[start + i] += gain * wave[i];
}

}  // namespace

std::vector<double> render_event(std::size_t span, std::size_t peaks, double sample_rate,
                                 double emergence_hz, double impulsive_hz, std::mt19937_64& rng,
                                 std::size_t* impulsive_start) {
  if (span < 8 || peaks == 0) throw ConfigError("render_event: span too short or no peaks");
  std::vector<double> out(span, 0.0);
  const std::size_t emergence =
      static_cast<std::size_t>(std::lround(static_cast<double>(span) * uniform(rng, 0.4, 0.6)));
  const std::size_t impulsive = span - emergence;

  // Slow random wobble on the emergence envelope.
  double wf[3], wp[3];
  for (int j = 0; j < 3; ++j) {
    wf[j] = uniform(rng, 0.5, 3.0);
    wp[j] = uniform(rng, 0.0, kTwoPi);
  }
  const double phase = uniform(rng, 0.0, kTwoPi);
  for (std::size_t i = 0; i < emergence; ++i) {
    const double t = static_cast<double>(i) / sample_rate;
    const double ramp = std::pow(static_cast<double>(i + 1) / static_cast<double>(emergence), 2.0);
    double wobble = 0.0;
    for (int j = 0; j < 3; ++j) wobble += std::sin(kTwoPi * wf[j] * t + wp[j]);
    const double env = ramp * std::max(0.0, 1.0 + 0.1 * wobble);
    out[i] = env * std::sin(kTwoPi * emergence_hz * t + phase);
  }

  const std::size_t slot = impulsive / peaks;
  for (std::size_t p = 0; p < peaks; ++p) {
    const std::size_t onset = emergence + p * slot;
    const std::size_t stop = p + 1 == peaks ? span : onset + slot;
    const double amp = uniform(rng, 2.0, 4.0);
    const double tau = static_cast<double>(slot) * uniform(rng, 0.12, 0.2);
    const double ph = uniform(rng, 0.0, kTwoPi);
    for (std::size_t i = onset; i < stop; ++i) {
      const double k = static_cast<double>(i - onset);
      const double rise = std::min(1.0, (k + 1.0) / 4.0);
      out[i] += amp * rise * std::exp(-k / tau) *
                std::sin(kTwoPi * impulsive_hz * k / sample_rate + ph);
    }
  }
  if (impulsive_start) *impulsive_start = emergence;
  return out;
}

std::vector<double> render_chirp(std::size_t span, double f0, double f1, double sample_rate,
                                 std::mt19937_64& rng) {
  std::vector<double> out(span);
  const double duration = static_cast<double>(span) / sample_rate;
  const double phase = uniform(rng, 0.0, kTwoPi);
  for (std::size_t i = 0; i < span; ++i) {
    const double t = static_cast<double>(i) / sample_rate;
    const double hann = 0.5 - 0.5 * std::cos(kTwoPi * static_cast<double>(i) /
                                             static_cast<double>(span > 1 ? span - 1 : 1));
    out[i] = hann * std::sin(kTwoPi * (f0 * t + 0.5 * (f1 - f0) * t * t / duration) + phase);
  }
  return out;
}

SynthConfig SynthConfig::day() { return SynthConfig{}; }

SynthConfig SynthConfig::mini_day() {
  SynthConfig c;
  c.samples_per_day = kDaySamples / 10;
  c.event_span_min = 1'000;
  c.event_span_max = 3'000;
  c.confounder_span_min = 500;
  c.confounder_span_max = 3'000;
  c.min_separation = 6'000;
  return c;
}

void SynthConfig::validate() const {
  auto fail = [](const std::string& m) { throw ConfigError("SynthConfig: " + m); };
  const double nyquist = sample_rate / 2.0;
  if (!(sample_rate > 0.0)) fail("sample_rate must be positive");
  if (days == 0) fail("days must be at least 1");
  if (events_min > events_max) fail("events_min > events_max");
  if (event_span_min < 8 || event_span_min > event_span_max) fail("bad event span range");
  if (event_span_max > kMaxEventSpan) fail("event_span_max exceeds 12000 samples");
  if (event_span_max > samples_per_day) fail("events longer than the day");
  if (peaks_min == 0 || peaks_min > peaks_max) fail("bad impulsive peak range");
  for (double f : {emergence_hz, impulsive_hz, colored_high_hz, confounder_high_hz}) {
    if (!(f > 0.0) || f >= nyquist) fail("frequencies must lie in (0, Nyquist)");
  }
  if (!(colored_low_hz > 0.0) || colored_low_hz >= colored_high_hz) fail("bad colored band");
  if (!(confounder_low_hz > 0.0) || confounder_low_hz >= confounder_high_hz)
    fail("bad confounder band");
  if (!(snr_min > 0.0) || snr_min > snr_max) fail("bad SNR range");
  if (!(colored_ratio >= 0.0)) fail("colored_ratio must be non-negative");
  if (!(confounder_rate >= 0.0)) fail("confounder_rate must be non-negative");
  if (confounder_span_min < 8 || confounder_span_min > confounder_span_max ||
      confounder_span_max > samples_per_day)
    fail("bad confounder span range");
}

SynthConfig SynthConfig::from_config(const KeyValueConfig& cfg) {
  const std::string preset = cfg.get_string("preset", "day");
  SynthConfig c;
  if (preset == "mini_day") {
    c = mini_day();
  } else if (preset != "day") {
    throw ConfigError("unknown synth preset '" + preset + "' (expected day or mini_day)");
  }
  c.days = cfg.get_size("days", c.days);
  c.samples_per_day = cfg.get_size("samples_per_day", c.samples_per_day);
  c.sample_rate = cfg.get_double("sample_rate", c.sample_rate);
  c.start_time = cfg.get_double("start_time", c.start_time);
  c.events_min = cfg.get_size("events_min", c.events_min);
  c.events_max = cfg.get_size("events_max", c.events_max);
  c.event_span_min = cfg.get_size("event_span_min", c.event_span_min);
  c.event_span_max = cfg.get_size("event_span_max", c.event_span_max);
  c.emergence_hz = cfg.get_double("emergence_hz", c.emergence_hz);
  c.impulsive_hz = cfg.get_double("impulsive_hz", c.impulsive_hz);
  c.peaks_min = cfg.get_size("peaks_min", c.peaks_min);
  c.peaks_max = cfg.get_size("peaks_max", c.peaks_max);
  c.snr_min = cfg.get_double("snr_min", c.snr_min);
  c.snr_max = cfg.get_double("snr_max", c.snr_max);
  c.colored_ratio = cfg.get_double("colored_ratio", c.colored_ratio);
  c.colored_low_hz = cfg.get_double("colored_low_hz", c.colored_low_hz);
  c.colored_high_hz = cfg.get_double("colored_high_hz", c.colored_high_hz);
  c.confounders = cfg.get_bool("confounders", c.confounders);
  c.confounder_rate = cfg.get_double("confounder_rate", c.confounder_rate);
  c.confounder_span_min = cfg.get_size("confounder_span_min", c.confounder_span_min);
  c.confounder_span_max = cfg.get_size("confounder_span_max", c.confounder_span_max);
  c.confounder_low_hz = cfg.get_double("confounder_low_hz", c.confounder_low_hz);
  c.confounder_high_hz = cfg.get_double("confounder_high_hz", c.confounder_high_hz);
  c.min_separation = cfg.get_size("min_separation", c.min_separation);
  c.seed = cfg.get_u64("seed", c.seed);
  c.station_prefix = cfg.get_string("station_prefix", c.station_prefix);
  c.validate();
  return c;
}

std::string SynthConfig::to_config() const {
  std::ostringstream o;
  o.precision(17);
  o << "days = " << days << "\n"
    << "samples_per_day = " << samples_per_day << "\n"
    << "sample_rate = " << sample_rate << "\n"
    << "start_time = " << start_time << "\n"
    << "events_min = " << events_min << "\n"
    << "events_max = " << events_max << "\n"
    << "event_span_min = " << event_span_min << "\n"
    << "event_span_max = " << event_span_max << "\n"
    << "emergence_hz = " << emergence_hz << "\n"
    << "impulsive_hz = " << impulsive_hz << "\n"
    << "peaks_min = " << peaks_min << "\n"
    << "peaks_max = " << peaks_max << "\n"
    << "snr_min = " << snr_min << "\n"
    << "snr_max = " << snr_max << "\n"
    << "colored_ratio = " << colored_ratio << "\n"
    << "colored_low_hz = " << colored_low_hz << "\n"
    << "colored_high_hz = " << colored_high_hz << "\n"
    << "confounders = " << (confounders ? "true" : "false") << "\n"
    << "confounder_rate = " << confounder_rate << "\n"
    << "confounder_span_min = " << confounder_span_min << "\n"
    << "confounder_span_max = " << confounder_span_max << "\n"
    << "confounder_low_hz = " << confounder_low_hz << "\n"
    << "confounder_high_hz = " << confounder_high_hz << "\n"
    << "min_separation = " << min_separation << "\n"
    << "seed = " << seed << "\n"
    << "station_prefix = " << station_prefix << "\n";
  return o.str();
}

SynthDay generate_day(const SynthConfig& cfg, std::size_t day_index) {
  cfg.validate();
  std::mt19937_64 rng(splitmix64(cfg.seed ^ splitmix64(day_index)));

  const std::size_t n_events = uniform_size(rng, cfg.events_min, cfg.events_max);
  std::size_t n_conf = 0;
  if (cfg.confounders && cfg.confounder_rate > 0.0)
    n_conf = std::poisson_distribution<std::size_t>(cfg.confounder_rate)(rng);

  std::vector<std::size_t> spans;
  for (std::size_t i = 0; i < n_events; ++i)
    spans.push_back(uniform_size(rng, cfg.event_span_min, cfg.event_span_max));
  for (std::size_t i = 0; i < n_conf; ++i)
    spans.push_back(uniform_size(rng, cfg.confounder_span_min, cfg.confounder_span_max));
  const std::vector<Placement> placed = place(spans, cfg, rng);

  std::vector<double> trace = make_noise(cfg, rng);

  SynthDay day;
  std::vector<Interval> labels;
  for (std::size_t i = 0; i < placed.size(); ++i) {
    const Placement& p = placed[i];
    const double snr = uniform(rng, cfg.snr_min, cfg.snr_max);
    if (i < n_events) {
      const std::size_t peaks = uniform_size(rng, cfg.peaks_min, cfg.peaks_max);
      std::size_t boundary = 0;
      const auto wave = render_event(p.span, peaks, cfg.sample_rate, cfg.emergence_hz,
                                     cfg.impulsive_hz, rng, &boundary);
      add_scaled(trace, p.start, wave, snr);
      const Interval span{p.start, p.start + p.span};
      labels.push_back(span);
      day.events.push_back({span, p.start + boundary, peaks, snr});
    } else {
      double f0 = uniform(rng, cfg.confounder_low_hz, cfg.confounder_high_hz);
      double f1 = uniform(rng, cfg.confounder_low_hz, cfg.confounder_high_hz);
      const auto wave = render_chirp(p.span, f0, f1, cfg.sample_rate, rng);
      add_scaled(trace, p.start, wave, snr);
      day.confounders.push_back({p.start, p.start + p.span});
    }
  }
  std::sort(day.events.begin(), day.events.end(),
            [](const SynthEvent& a, const SynthEvent& b) { return a.span < b.span; });
  std::sort(day.confounders.begin(), day.confounders.end());

  day.trace.sample_rate = cfg.sample_rate;
  day.trace.start_time = cfg.start_time + 86400.0 * static_cast<double>(day_index);
  char id[32];
  std::snprintf(id, sizeof(id), "%03zu", day_index);
  day.trace.station_id = cfg.station_prefix + id;
  day.trace.samples.assign(trace.begin(), trace.end());
  day.labels = LabelSet(std::move(labels), cfg.samples_per_day);
  return day;
}

std::vector<SynthDay> generate_synthetic(const SynthConfig& cfg, std::size_t threads) {
  cfg.validate();
  std::vector<SynthDay> days(cfg.days);
  parallel_for(cfg.days, threads, [&](std::size_t i) { days[i] = generate_day(cfg, i); });
  return days;
}

}  // namespace seisnet
