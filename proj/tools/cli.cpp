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
#include "cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <ostream>
#include <set>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "seisnet/gradcheck.hpp"
#include "seisnet/io.hpp"
#include "seisnet/parallel.hpp"
#include "seisnet/synth.hpp"
#include "seisnet/train.hpp"

namespace seisnet::cli {

namespace fs = std::filesystem;

namespace {

// Bad input detected before or during a run; maps to exit code 1.
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

void require_file(const fs::path& path, const std::string& what) {
  std::error_code ec;
  if (!fs::is_regular_file(path, ec)) throw UsageError(what + " not found: " + path.string());
}

void require_files(const std::vector<fs::path>& paths, const std::string& what) {
  for (const auto& p : paths) require_file(p, what);
}

KeyValueConfig load_config(const std::optional<fs::path>& path) {
  if (!path) return {};
  require_file(*path, "config file");
  return KeyValueConfig::load(*path);
}

void reject_unused(const KeyValueConfig& kv) {
  const auto unused = kv.unused_keys();
  if (unused.empty()) return;
  std::string names;
  for (const auto& k : unused) names += (names.empty() ? "" : ", ") + k;
  throw ConfigError("unknown configuration key(s): " + names);
}

void print_block(std::ostream& out, const std::string& title, const std::string& body) {
  out << title << ":\n";
  std::istringstream in(body);
  for (std::string line; std::getline(in, line);) out << "  " << line << "\n";
}

template <typename T>
std::string str(const T& v) {
  std::ostringstream s;
  s.precision(17);
  s << v;
  return s.str();
}

std::vector<Trace> read_traces(const std::vector<fs::path>& paths) {
  std::vector<Trace> traces;
  std::set<std::string> ids;
  for (const auto& p : paths) {
    traces.push_back(read_trace(p));
    if (!ids.insert(traces.back().station_id).second) {
      throw ConfigError("duplicate trace id '" + traces.back().station_id + "' in " + p.string());
    }
  }
  return traces;
}

std::vector<const Trace*> pointers(const std::vector<Trace>& traces) {
  std::vector<const Trace*> out;
  for (const auto& t : traces) out.push_back(&t);
  return out;
}

// Keeps only the rows for the given traces; a labels file may cover a larger corpus.
IntervalTable restrict_to(const IntervalTable& table, const std::vector<Trace>& traces) {
  IntervalTable out;
  for (const auto& t : traces) {
    auto it = table.find(t.station_id);
    if (it != table.end()) out[t.station_id] = it->second;
  }
  return out;
}

std::string trace_extension(const std::string& format) {
  if (format == "bin") return ".trc";
  if (format == "csv") return ".csv";
  throw ConfigError("unknown trace format '" + format + "' (use bin or csv)");
}

struct Common {
  std::optional<std::size_t> threads;
  std::optional<std::uint64_t> seed;
};

void add_common(CLI::App* app, Common& c) {
  app->add_option("--threads", c.threads, "Worker threads (env SEISNET_THREADS)")
      ->check(CLI::PositiveNumber);
  app->add_option("--seed", c.seed, "Seed for every random choice of the run");
}

// ---------------------------------------------------------------------------

struct GenerateArgs {
  Common common;
  std::optional<fs::path> config;
  fs::path out_dir;
  std::optional<std::string> preset;
  std::optional<std::size_t> days;
  std::string format = "bin";
};

int run_generate(const GenerateArgs& a, std::ostream& out) {
  KeyValueConfig kv = load_config(a.config);
  if (a.preset) kv.set("preset", *a.preset);
  if (a.days) kv.set("days", str(*a.days));
  if (a.common.seed) kv.set("seed", str(*a.common.seed));
  const SynthConfig cfg = SynthConfig::from_config(kv);
  reject_unused(kv);
  const std::string ext = trace_extension(a.format);
  const std::size_t threads = resolve_threads(a.common.threads);
  print_block(out, "generate", cfg.to_config() + "threads = " + str(threads));

  fs::create_directories(a.out_dir);
  IntervalTable labels;
  IntervalTable confounders;
  std::size_t events = 0;
  // Days are produced in groups of `threads` to bound memory on full-size presets.
  for (std::size_t first = 0; first < cfg.days; first += threads) {
    const std::size_t count = std::min(threads, cfg.days - first);
    std::vector<SynthDay> days(count);
    parallel_for(count, threads, [&](std::size_t i) { days[i] = generate_day(cfg, first + i); });
    for (const auto& d : days) {
      write_trace(d.trace, a.out_dir / (d.trace.station_id + ext));
      labels[d.trace.station_id] = d.labels.events();
      confounders[d.trace.station_id] = d.confounders;
      events += d.events.size();
    }
  }
  atomic_write_file(a.out_dir / "labels.csv", interval_csv(labels));
  atomic_write_file(a.out_dir / "confounders.csv", interval_csv(confounders));
  atomic_write_file(a.out_dir / "synth.cfg", cfg.to_config());
  out << "wrote " << cfg.days << " traces with " << events << " events to " << a.out_dir.string()
      << "\n";
  return kExitOk;
}

// ---------------------------------------------------------------------------

struct TrainArgs {
  Common common;
  std::optional<fs::path> config;
  std::vector<fs::path> traces;
  fs::path labels;
  std::optional<fs::path> negatives;
  fs::path out_dir;
  std::optional<std::string> preset;
  std::optional<std::size_t> epochs;
  std::optional<double> lr;
  std::optional<std::size_t> batch_size;
  std::optional<std::size_t> random_negatives;
  bool oversample = false;
  bool picked_edges = false;
  std::optional<fs::path> init_weights;
  std::optional<fs::path> resume_state;
};

int run_train(const TrainArgs& a, std::ostream& out) {
  KeyValueConfig kv = load_config(a.config);
  if (a.preset) kv.set("preset", *a.preset);
  if (a.epochs) kv.set("epochs", str(*a.epochs));
  if (a.lr) kv.set("lr", str(*a.lr));
  if (a.batch_size) kv.set("batch_size", str(*a.batch_size));
  if (a.random_negatives) kv.set("random_negatives", str(*a.random_negatives));
  if (a.oversample) kv.set("oversample_positives", "true");
  if (a.picked_edges) kv.set("picked_edges", "true");
  if (a.common.seed) kv.set("seed", str(*a.common.seed));
  if (a.common.threads || !kv.has("threads")) kv.set("threads", str(resolve_threads(a.common.threads)));

  const ArchSpec spec = ArchSpec::from_config(kv);
  TrainConfig tc = TrainConfig::from_config(kv);
  NegativePolicy negatives;
  negatives.random_count = kv.get_size("random_negatives", 0);
  negatives.seed = kv.get_u64("negative_seed", tc.seed ^ 0x6e65676174697665ULL);
  negatives.picked_edges = kv.get_bool("picked_edges", false);
  reject_unused(kv);
  if (tc.checkpoint_every > 0 && tc.checkpoint_dir.empty()) tc.checkpoint_dir = a.out_dir / "checkpoints";
  if (a.resume_state && !a.init_weights) {
    throw UsageError("--resume-state needs --init-weights with the matching weights");
  }

  require_files(a.traces, "trace file");
  require_file(a.labels, "labels file");
  if (a.negatives) require_file(*a.negatives, "negatives file");
  if (a.init_weights) require_file(*a.init_weights, "weight file");
  if (a.resume_state) require_file(*a.resume_state, "optimizer state file");

  const std::string effective = spec.to_config() + tc.to_config() + "random_negatives = " +
                                str(negatives.random_count) + "\nnegative_seed = " +
                                str(negatives.seed) + "\npicked_edges = " +
                                (negatives.picked_edges ? "true" : "false") + "\n";
  print_block(out, "train", effective);

  const std::vector<Trace> traces = read_traces(a.traces);
  const auto ptrs = pointers(traces);
  const auto label_map = label_sets(restrict_to(read_interval_csv(a.labels), traces), ptrs);
  if (a.negatives) negatives.picked = restrict_to(read_interval_csv(*a.negatives), traces);
  std::vector<LabeledTrace> labeled;
  for (const auto& t : traces) labeled.push_back({&t, label_map.at(t.station_id)});
  const auto dataset = make_training_set(labeled, spec.input_length, negatives);
  std::size_t positives = 0;
  for (const auto& w : dataset) positives += w.label > 0;
  out << "training windows: " << positives << " positive, " << dataset.size() - positives
      << " negative\n";

  ModelParams<float> model = a.init_weights ? load_weights(a.init_weights->string(), &spec)
                                            : build_model<float>(spec, InitRule::He, tc.seed);
  std::optional<AdamState> resume;
  if (a.resume_state) resume = load_adam_state(*a.resume_state);

  const TrainResult result =
      train(dataset, std::move(model), tc, resume ? &*resume : nullptr, [&](const EpochStats& s) {
        char line[128];
        std::snprintf(line, sizeof(line), "epoch %zu loss=%.6f accuracy=%.4f\n", s.epoch,
                      s.mean_loss, s.train_accuracy);
        out << line << std::flush;
      });

  fs::create_directories(a.out_dir);
  save_weights(result.params, (a.out_dir / "model.weights").string());
  save_adam_state(result.optimizer, a.out_dir / "model.adam");
  atomic_write_file(a.out_dir / "history.csv", history_csv(result.history));
  atomic_write_file(a.out_dir / "train.cfg", effective);
  out << "wrote " << (a.out_dir / "model.weights").string() << "\n";
  return kExitOk;
}

// ---------------------------------------------------------------------------

struct DetectArgs {
  Common common;
  fs::path weights;
  std::vector<fs::path> traces;
  std::optional<fs::path> labels;
  fs::path out_dir;
  std::optional<std::size_t> offset;
  double threshold = 0.0;
  bool plot = false;
};

int run_detect(const DetectArgs& a, std::ostream& out) {
  require_file(a.weights, "weight file");
  require_files(a.traces, "trace file");
  if (a.labels) require_file(*a.labels, "labels file");

  const std::vector<Trace> traces = read_traces(a.traces);
  const auto ptrs = pointers(traces);
  std::optional<std::map<std::string, LabelSet>> sets;
  if (a.labels) sets = label_sets(restrict_to(read_interval_csv(*a.labels), traces), ptrs);
  const ModelParams<float> model = load_weights(a.weights.string());
  for (const auto& t : traces) {
    if (t.size() < model.spec.input_length) {
      throw ConfigError("trace " + t.station_id + " has " + std::to_string(t.size()) +
                        " samples, fewer than the model window of " +
                        std::to_string(model.spec.input_length));
    }
  }

  PipelineOptions po;
  // The default stride is a third of the window.
  po.offset = a.offset.value_or(std::max<std::size_t>(1, model.spec.input_length / 3));
  if (po.offset == 0) throw ConfigError("--offset must be positive");
  po.threshold = a.threshold;
  po.threads = resolve_threads(a.common.threads);
  print_block(out, "detect",
              "window_length = " + str(model.spec.input_length) + "\noffset = " + str(po.offset) +
                  "\nthreshold = " + str(po.threshold) + "\nthreads = " + str(po.threads) +
                  "\ntraces = " + str(traces.size()) + "\n");

  const PipelineResult r = detect_pipeline(ptrs, model, po, sets ? &*sets : nullptr);
  emit_report(r.report, r.detections, a.plot ? ptrs : std::vector<const Trace*>{}, a.out_dir);
  char line[160];
  std::snprintf(line, sizeof(line), "%zu windows in %.2f s (%.1f windows/s), %zu detections\n",
                r.windows_evaluated, r.seconds, r.windows_per_second, r.detections.size());
  out << line;
  if (r.report) out << r.report->summary() << "\n";
  return kExitOk;
}

// ---------------------------------------------------------------------------

struct EvaluateArgs {
  fs::path detections;
  fs::path labels;
  std::vector<fs::path> traces;
  std::optional<fs::path> out_dir;
};

int run_evaluate(const EvaluateArgs& a, std::ostream& out) {
  require_file(a.detections, "detections file");
  require_file(a.labels, "labels file");
  require_files(a.traces, "trace file");
  const auto dets = parse_detections_csv(read_file(a.detections), a.detections.string());
  const IntervalTable table = read_interval_csv(a.labels);

  std::map<std::string, LabelSet> sets;
  if (!a.traces.empty()) {
    const std::vector<Trace> traces = read_traces(a.traces);
    sets = label_sets(restrict_to(table, traces), pointers(traces));
  } else {
    // Without traces the extent of each trace is the furthest labelled or detected sample.
    std::map<std::string, std::size_t> extent;
    for (const auto& [id, ivs] : table)
      for (const auto& iv : ivs) extent[id] = std::max(extent[id], iv.end);
    for (const auto& d : dets) extent[d.trace_id] = std::max(extent[d.trace_id], d.end);
    for (const auto& [id, n] : extent) {
      auto it = table.find(id);
      sets.emplace(id, LabelSet(it == table.end() ? std::vector<Interval>{} : it->second, n));
    }
  }
  const EvalReport report = evaluate(dets, sets);
  if (a.out_dir) {
    fs::create_directories(*a.out_dir);
    atomic_write_file(*a.out_dir / "metrics.csv", metrics_csv(report));
  }
  out << report.summary() << "\n";
  return kExitOk;
}

// ---------------------------------------------------------------------------

struct InspectArgs {
  std::optional<fs::path> weights;
  std::optional<fs::path> arch;
  std::optional<std::string> preset;
};

int run_inspect(const InspectArgs& a, std::ostream& out) {
  if (!!a.weights + !!a.arch + !!a.preset != 1) {
    throw UsageError("inspect needs exactly one of --weights, --arch or --preset");
  }
  ArchSpec spec;
  std::size_t params = 0;
  if (a.weights) {
    require_file(*a.weights, "weight file");
    const ModelParams<float> m = load_weights(a.weights->string());
    spec = m.spec;
    params = count_parameters(m);
  } else {
    KeyValueConfig kv = load_config(a.arch);
    if (a.preset) kv.set("preset", *a.preset);
    spec = ArchSpec::from_config(kv);
    reject_unused(kv);
    params = count_parameters(build_model<float>(spec, InitRule::Zeros, 0));
  }
  print_block(out, "architecture", spec.to_config());
  out << "parameters: " << params << "\n";
  out << "feature_dim: " << spec.feature_dim() << "\n";
  out << "ladder:\n";
  char line[160];
  for (const auto& s : spec.ladder()) {
    std::snprintf(line, sizeof(line), "  %-12s %-28s %8zu x %zu\n", s.stage.c_str(),
                  s.layers.c_str(), s.length, s.channels);
    out << line;
  }
  return kExitOk;
}

// ---------------------------------------------------------------------------

struct GradcheckArgs {
  Common common;
  std::size_t trials = 20;
  double tolerance = 1e-4;
  double model_tolerance = 1e-3;
  std::size_t model_seeds = 20;
  std::size_t directions = 1;
  std::optional<fs::path> arch;
  std::string preset = "mini";
  std::vector<std::string> layers;
};

int run_gradcheck(const GradcheckArgs& a, std::ostream& out) {
  std::vector<LayerKind> kinds;
  for (const auto& name : a.layers) {
    const auto k = parse_layer_kind(name);
    if (!k) throw UsageError("unknown layer '" + name + "'");
    kinds.push_back(*k);
  }
  if (a.layers.empty()) kinds = all_layer_kinds();
  KeyValueConfig kv = load_config(a.arch);
  if (!kv.has("preset") && !a.arch) kv.set("preset", a.preset);
  const ArchSpec spec = ArchSpec::from_config(kv);
  reject_unused(kv);
  const std::uint64_t seed = a.common.seed.value_or(1);

  bool ok = true;
  char line[200];
  for (LayerKind k : kinds) {
    const GradCheckReport r = check_gradients(k, a.trials, a.tolerance, seed);
    ok = ok && r.passed();
    std::snprintf(line, sizeof(line), "%-5s %-10s max_rel=%.3e tol=%.0e trials=%zu\n",
                  r.passed() ? "PASS" : "FAIL", to_string(k).c_str(), r.max_relative_error(),
                  a.tolerance, a.trials);
    out << line;
    if (!r.passed()) out << r.summary();
  }
  for (std::size_t s = 0; s < a.model_seeds; ++s) {
    const GradCheckReport r =
        check_model_gradients(spec, seed + s, a.model_tolerance, 2, a.directions);
    ok = ok && r.passed();
    std::snprintf(line, sizeof(line), "%-5s model seed=%llu max_rel=%.3e tol=%.0e\n",
                  r.passed() ? "PASS" : "FAIL", static_cast<unsigned long long>(seed + s),
                  r.max_relative_error(), a.model_tolerance);
    out << line << std::flush;
    if (!r.passed()) out << r.summary();
  }
  out << (ok ? "all gradient checks passed\n" : "gradient checks FAILED\n");
  return ok ? kExitOk : kExitFailure;
}

}  // namespace

std::size_t resolve_threads(std::optional<std::size_t> flag) {
  if (flag) return std::max<std::size_t>(1, *flag);
  if (const char* env = std::getenv("SEISNET_THREADS"); env && *env) {
    char* end = nullptr;
    const unsigned long long v = std::strtoull(env, &end, 10);
    if (*end != '\0' || v == 0) throw ConfigError("SEISNET_THREADS must be a positive integer");
    return static_cast<std::size_t>(v);
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

std::vector<fs::path> emit_report(const std::optional<EvalReport>& report,
                                  const std::vector<Detection>& detections,
                                  const std::vector<const Trace*>& plot_traces,
                                  const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw std::runtime_error("cannot create " + dir.string() + ": " + ec.message());
  std::vector<fs::path> written{dir / "detections.csv"};
  atomic_write_file(written.back(), detections_csv(detections));
  if (report) {
    written.push_back(dir / "metrics.csv");
    atomic_write_file(written.back(), metrics_csv(*report));
  }
  for (const Trace* t : plot_traces) {
    written.push_back(dir / ("plot_" + t->station_id + ".csv"));
    atomic_write_file(written.back(), plot_csv(*t, detections));
  }
  return written;
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Seismic event detection with a densely connected 1D CNN", "seisnet"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all", "Help for every subcommand");

  GenerateArgs gen;
  auto* g = app.add_subcommand("generate", "Write a seeded synthetic corpus of traces and labels");
  add_common(g, gen.common);
  g->add_option("--config", gen.config, "Generator config (key = value)");
  g->add_option("--out", gen.out_dir, "Output directory")->required();
  g->add_option("--preset", gen.preset, "day or mini_day");
  g->add_option("--days", gen.days, "Number of traces");
  g->add_option("--format", gen.format, "Trace format: bin or csv")->capture_default_str();

  TrainArgs tr;
  auto* t = app.add_subcommand("train", "Train a model on labelled traces");
  add_common(t, tr.common);
  t->add_option("--config", tr.config, "Training and architecture config (key = value)");
  t->add_option("--traces", tr.traces, "Trace files")->required();
  t->add_option("--labels", tr.labels, "Event intervals CSV")->required();
  t->add_option("--negatives", tr.negatives, "Picked background intervals CSV");
  t->add_option("--out", tr.out_dir, "Output directory")->required();
  t->add_option("--preset", tr.preset, "Architecture preset: canonical or mini");
  t->add_option("--epochs", tr.epochs, "Training epochs");
  t->add_option("--lr", tr.lr, "Adam learning rate");
  t->add_option("--batch-size", tr.batch_size, "Minibatch size");
  t->add_option("--random-negatives", tr.random_negatives, "Random background windows");
  t->add_flag("--oversample", tr.oversample, "Repeat positives to balance the classes");
  t->add_flag("--picked-edges", tr.picked_edges,
              "Also place each picked interval near both window edges");
  t->add_option("--init-weights", tr.init_weights, "Start from these weights");
  t->add_option("--resume-state", tr.resume_state, "Optimizer state saved with --init-weights");

  DetectArgs de;
  auto* d = app.add_subcommand("detect", "Scan traces with a trained model");
  add_common(d, de.common);
  d->add_option("--weights", de.weights, "Weight file")->required();
  d->add_option("--traces", de.traces, "Trace files")->required();
  d->add_option("--labels", de.labels, "Event intervals CSV; adds metrics.csv");
  d->add_option("--out", de.out_dir, "Output directory")->required();
  d->add_option("--offset", de.offset, "Window stride in samples (default: window / 3)");
  d->add_option("--threshold", de.threshold, "Keep windows scoring above this")
      ->capture_default_str();
  d->add_flag("--plot", de.plot, "Also write plot_<trace>.csv per trace");

  EvaluateArgs ev;
  auto* e = app.add_subcommand("evaluate", "Score a detections CSV against labels");
  e->add_option("--detections", ev.detections, "Detections CSV")->required();
  e->add_option("--labels", ev.labels, "Event intervals CSV")->required();
  e->add_option("--traces", ev.traces, "Trace files giving the trace lengths");
  e->add_option("--out", ev.out_dir, "Directory for metrics.csv");

  InspectArgs in;
  auto* i = app.add_subcommand("inspect", "Print an architecture, its parameter count and shapes");
  i->add_option("--weights", in.weights, "Weight file");
  i->add_option("--arch", in.arch, "Architecture config");
  i->add_option("--preset", in.preset, "canonical or mini");

  GradcheckArgs gc;
  auto* c = app.add_subcommand("gradcheck", "Compare backward passes with finite differences");
  add_common(c, gc.common);
  c->add_option("--trials", gc.trials, "Random trials per layer")->capture_default_str();
  c->add_option("--tolerance", gc.tolerance, "Layer relative error bound")->capture_default_str();
  c->add_option("--model-tolerance", gc.model_tolerance, "Model relative error bound")
      ->capture_default_str();
  c->add_option("--model-seeds", gc.model_seeds, "Model checks (0 skips)")->capture_default_str();
  c->add_option("--directions", gc.directions,
                "Random directions per tensor in model checks (0: every scalar)")
      ->capture_default_str();
  c->add_option("--arch", gc.arch, "Architecture config for the model check");
  c->add_option("--preset", gc.preset, "Architecture preset for the model check")
      ->capture_default_str();
  c->add_option("--layer", gc.layers, "Only these layers");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(std::move(reversed));
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& ex) {
    err << "seisnet: " << ex.what() << "\n";
    err << "run 'seisnet --help' for usage\n";
    return kExitInvalid;
  }

  try {
    if (*g) return run_generate(gen, out);
    if (*t) return run_train(tr, out);
    if (*d) return run_detect(de, out);
    if (*e) return run_evaluate(ev, out);
    if (*i) return run_inspect(in, out);
    if (*c) return run_gradcheck(gc, out);
  } catch (const UsageError& ex) {
    err << "seisnet: " << ex.what() << "\n";
    return kExitInvalid;
  } catch (const ConfigError& ex) {
    err << "seisnet: invalid configuration: " << ex.what() << "\n";
    return kExitInvalid;
  } catch (const FormatError& ex) {
    err << "seisnet: invalid input: " << ex.what() << "\n";
    return kExitInvalid;
  } catch (const ShapeError& ex) {
    err << "seisnet: shape mismatch: " << ex.what() << "\n";
    return kExitInvalid;
  } catch (const std::exception& ex) {
    err << "seisnet: " << ex.what() << "\n";
    return kExitFailure;
  }
  return kExitInvalid;
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  std::vector<std::string> args;
  for (int k = 1; k < argc; ++k) args.emplace_back(argv[k]);
  return run(args, out, err);
}

}  // namespace seisnet::cli
