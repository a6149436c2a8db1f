// surprise: command-line front end.
//
//   surprise track      [EVENTS] [engine flags] [--emit jsonl|csv] [--snapshot-in F] [--snapshot-out F]
//   surprise replay     --snapshot F [EVENTS] ...
//   surprise explain    --graph F --target S --cd BITS | --bayes F [--target O]
//   surprise divergence --world W --mind M [--normalize-mind] [--tau T] [--emit json|csv]
//   surprise simulate   --spec F [--out F] [--world-out F]
//
// Exit codes: 0 success, 1 invalid flags, 2 data error.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <unistd.h>

#include <CLI11.hpp>

#include "surprise/surprise.hpp"

namespace {

using namespace surprise;

// Raised for flag problems; everything else that fails is a data error.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

template <typename Fn>
auto validating(Fn&& fn) -> decltype(fn()) {
  try {
    return fn();
  } catch (const Error& e) {
    throw UsageError(e.what());
  }
}

/// Standard output, or a file written through a temporary and renamed on commit().
class OutputSink {
 public:
  explicit OutputSink(const std::string& path) : path_(path) {
    if (path_.empty() || path_ == "-") return;
    tmp_ = path_ + ".tmp." + std::to_string(::getpid());
    file_ = std::make_unique<std::ofstream>(tmp_, std::ios::binary | std::ios::trunc);
    if (!*file_) throw Error(ErrorKind::parse_error, "cannot write '" + path_ + "'");
  }
  OutputSink(const OutputSink&) = delete;
  OutputSink& operator=(const OutputSink&) = delete;

  ~OutputSink() {
    if (file_ && !committed_) {
      file_.reset();
      std::error_code ec;
      std::filesystem::remove(tmp_, ec);
    }
  }

  std::ostream& stream() { return file_ ? static_cast<std::ostream&>(*file_) : std::cout; }

  void commit() {
    if (!file_) {
      std::cout.flush();
      return;
    }
    file_->close();
    if (!*file_) throw Error(ErrorKind::parse_error, "failed writing '" + path_ + "'");
    std::filesystem::rename(tmp_, path_);
    committed_ = true;
  }

 private:
  std::string path_;
  std::string tmp_;
  std::unique_ptr<std::ofstream> file_;
  bool committed_ = false;
};

void write_file(const std::string& path, const std::string& content) {
  OutputSink sink(path);
  sink.stream() << content;
  sink.commit();
}

/// Standard input, or the named file.
class InputSource {
 public:
  explicit InputSource(const std::string& path) {
    if (path.empty() || path == "-") return;
    file_ = std::make_unique<std::ifstream>(path);
    if (!*file_) throw Error(ErrorKind::parse_error, "cannot open '" + path + "'");
  }
  std::istream& stream() { return file_ ? static_cast<std::istream&>(*file_) : std::cin; }

 private:
  std::unique_ptr<std::ifstream> file_;
};

Json read_json(const std::string& path) {
  if (path == "-") {
    return detail::parsing("standard input", [] { return Json::parse(std::cin); });
  }
  return read_json_file(path);
}

// --- engine flags ---------------------------------------------------------------

struct EngineFlags {
  std::string config_path;
  std::string estimator = "iir";
  std::size_t window = 1000;
  double alpha = 0.999;
  std::string epsilon = "auto";
  bool prune = false;
  double beta = 0.95;
  double theta = 2.0;
  std::size_t min_hits = 20;
  std::string warmup = "auto";
  std::size_t capacity = 0;

  CLI::Option* o_estimator = nullptr;
  CLI::Option* o_window = nullptr;
  CLI::Option* o_alpha = nullptr;
  CLI::Option* o_epsilon = nullptr;
  CLI::Option* o_prune = nullptr;
  CLI::Option* o_beta = nullptr;
  CLI::Option* o_theta = nullptr;
  CLI::Option* o_min_hits = nullptr;
  CLI::Option* o_warmup = nullptr;
  CLI::Option* o_capacity = nullptr;

  void attach(CLI::App& app) {
    app.add_option("--config", config_path, "JSON config file; explicit flags override it");
    o_estimator = app.add_option("--estimator", estimator, "Rate estimator: fir or iir");
    o_window = app.add_option("--window", window, "FIR window length N");
    o_alpha = app.add_option("--alpha", alpha, "IIR decay alpha in (0,1)");
    o_epsilon = app.add_option("--epsilon", epsilon, "Smoothing floor: auto, off, or a value in (0,1]");
    o_prune = app.add_flag("--prune", prune, "Drop IIR symbols whose rate fell below epsilon/2");
    o_beta = app.add_option("--beta", beta, "Detector EWMA decay in (0,1)");
    o_theta = app.add_option("--theta", theta, "Detector threshold in bits");
    o_min_hits = app.add_option("--min-hits", min_hits, "Consecutive exceedances needed to flag");
    o_warmup = app.add_option("--warmup", warmup, "Events ignored by the detector: auto or a count");
    o_capacity = app.add_option("--capacity", capacity, "Short-term memory capacity (0 = unbounded)");
  }

  // Overlays explicitly given flags on `c`.
  EngineConfig apply(EngineConfig c) const {
    if (o_estimator->count()) {
      if (estimator != "fir" && estimator != "iir") {
        throw UsageError("--estimator must be fir or iir, got '" + estimator + "'");
      }
      c.estimator.kind = estimator == "fir" ? EstimatorKind::fir : EstimatorKind::iir;
    }
    if (o_window->count()) c.estimator.window = window;
    if (o_alpha->count()) c.estimator.alpha = alpha;
    if (o_epsilon->count()) c.estimator.smoothing = parse_epsilon();
    if (o_prune->count()) c.estimator.prune = prune;
    if (o_beta->count()) c.detector.beta = beta;
    if (o_theta->count()) c.detector.theta = theta;
    if (o_min_hits->count()) c.detector.min_hits = min_hits;
    if (o_warmup->count()) c.detector.warmup = parse_warmup();
    if (o_capacity->count()) {
      c.stack_capacity = capacity == 0 ? std::nullopt : std::optional<std::size_t>(capacity);
    }
    return c;
  }

  EngineConfig resolve() const {
    EngineConfig c;
    if (!config_path.empty()) {
      const auto j = read_json(config_path);
      c = validating([&] { return engine_config_from_json(j); });
    }
    c = apply(c);
    validating([&] {
      c.validate();
      return 0;
    });
    return c;
  }

  // Flags given on a replay must agree with the configuration in the snapshot.
  void check_against(const EngineConfig& baked) const {
    const EngineConfig merged = validating([&] { return apply(baked); });
    auto conflict = [](const char* flag) {
      throw UsageError(std::string(flag) + " differs from the configuration stored in the snapshot");
    };
    if (merged.estimator.kind != baked.estimator.kind) conflict("--estimator");
    if (merged.estimator.window != baked.estimator.window) conflict("--window");
    if (merged.estimator.alpha != baked.estimator.alpha) conflict("--alpha");
    if (merged.estimator.smoothing != baked.estimator.smoothing) conflict("--epsilon");
    if (merged.estimator.prune != baked.estimator.prune) conflict("--prune");
    if (merged.detector.beta != baked.detector.beta) conflict("--beta");
    if (merged.detector.theta != baked.detector.theta) conflict("--theta");
    if (merged.detector.min_hits != baked.detector.min_hits) conflict("--min-hits");
    if (merged.detector.warmup != baked.detector.warmup) conflict("--warmup");
    if (merged.stack_capacity != baked.stack_capacity) conflict("--capacity");
  }

 private:
  Smoothing parse_epsilon() const {
    if (epsilon == "auto") return Smoothing::automatic();
    if (epsilon == "off") return Smoothing::off();
    double v = 0.0;
    try {
      std::size_t used = 0;
      v = std::stod(epsilon, &used);
      if (used != epsilon.size()) throw std::invalid_argument(epsilon);
    } catch (const std::exception&) {
      throw UsageError("--epsilon must be auto, off, or a number in (0,1]");
    }
    if (!(v > 0.0 && v <= 1.0)) throw UsageError("--epsilon must lie in (0,1], got " + epsilon);
    return Smoothing::fixed(v);
  }

  std::optional<std::uint64_t> parse_warmup() const {
    if (warmup == "auto") return std::nullopt;
    try {
      std::size_t used = 0;
      const auto v = std::stoull(warmup, &used);
      if (used != warmup.size() || warmup.front() == '-') throw std::invalid_argument(warmup);
      return v;
    } catch (const std::exception&) {
      throw UsageError("--warmup must be auto or a nonnegative integer");
    }
  }
};

// --- track / replay -------------------------------------------------------------

struct TrackOptions {
  std::string input;
  std::string emit = "jsonl";
  std::string output;
  std::string snapshot_in;
  std::string snapshot_out;
  std::string mind_out;
  std::size_t stability_m = 100;
  double stability_delta = 0.05;
  EngineFlags engine;

  void attach(CLI::App& app, bool replay) {
    app.add_option("events", input, "Event file (JSONL or one token per line); stdin if omitted");
    if (replay) {
      app.add_option("--snapshot", snapshot_in, "Snapshot to resume from")->required();
    } else {
      app.add_option("--snapshot-in", snapshot_in, "Resume from this snapshot");
    }
    app.add_option("--emit", emit, "Trace format: jsonl or csv");
    app.add_option("-o,--output", output, "Trace destination; stdout if omitted");
    app.add_option("--snapshot-out", snapshot_out, "Write the final engine state here");
    app.add_option("--mind-out", mind_out, "Write the learned code-length table here");
    app.add_option("--stability-m", stability_m, "Samples in the Delta-w stability window");
    app.add_option("--stability-delta", stability_delta, "Max rate range for a stable symbol");
    engine.attach(app);
  }
};

Json mind_json(const Engine& engine, const StabilityMonitor& monitor) {
  Json symbols = Json::array();
  Json bits = Json::array();
  Json rates = Json::array();
  Json stable = Json::array();
  for (const auto& x : engine.estimator().alphabet()) {
    const auto cost = engine.estimator().complexity(x);
    if (!cost.is_finite()) {
      std::cerr << "surprise: warning: '" << x.str() << "' has infinite cost and is omitted\n";
      continue;
    }
    symbols.push_back(x.str());
    bits.push_back(cost.value());
    rates.push_back(engine.estimator().rate(x));
    const auto s = monitor.stable(x);
    stable.push_back(s ? Json(*s) : Json(nullptr));
  }
  return {{"symbols", symbols}, {"bits", bits}, {"rate", rates}, {"stable", stable}};
}

int run_track(const TrackOptions& opt) {
  TraceFormat format = TraceFormat::jsonl;
  if (opt.emit == "csv") {
    format = TraceFormat::csv;
  } else if (opt.emit != "jsonl") {
    throw UsageError("--emit must be jsonl or csv, got '" + opt.emit + "'");
  }
  if (opt.stability_m < 1) throw UsageError("--stability-m must be >= 1");
  if (!(opt.stability_delta >= 0.0)) throw UsageError("--stability-delta must be >= 0");

  std::optional<Engine> engine;
  if (!opt.snapshot_in.empty()) {
    const auto snap = snapshot_from_json(read_json(opt.snapshot_in));
    opt.engine.check_against(snap.config);
    engine = Engine::restore(snap);
  } else {
    engine.emplace(opt.engine.resolve());
  }

  InputSource input(opt.input);
  OutputSink sink(opt.output);
  TraceWriter writer(sink.stream(), format);
  StabilityMonitor monitor(opt.stability_m, opt.stability_delta);
  const bool want_mind = !opt.mind_out.empty();

  EventReader reader(input.stream());
  while (auto o = reader.next()) {
    try {
      writer.write(engine->step(*o));
    } catch (const Error& e) {
      throw e.with_line(reader.line());
    }
    if (want_mind) monitor.sample(engine->estimator());
  }
  sink.commit();

  if (!opt.snapshot_out.empty()) write_file(opt.snapshot_out, to_json(engine->snapshot()).dump() + "\n");
  if (want_mind) write_file(opt.mind_out, mind_json(*engine, monitor).dump() + "\n");
  return 0;
}

// --- explain --------------------------------------------------------------------

struct ExplainOptions {
  std::string graph;
  std::string bayes;
  std::string target;
  double cd = 0.0;
  CLI::Option* o_cd = nullptr;
  std::string output;

  void attach(CLI::App& app) {
    auto* g = app.add_option("--graph", graph, "Causal graph JSON");
    auto* b = app.add_option("--bayes", bayes, "Probabilistic model JSON (priors, likelihoods, evidence)");
    g->excludes(b);
    app.add_option("--target", target, "Situation to explain");
    o_cd = app.add_option("--cd", cd, "Description complexity of the target, in bits");
    app.add_option("-o,--output", output, "Destination; stdout if omitted");
  }
};

int run_explain(const ExplainOptions& opt) {
  if (opt.graph.empty() == opt.bayes.empty()) throw UsageError("give exactly one of --graph or --bayes");
  Explanation ex;
  if (!opt.graph.empty()) {
    if (opt.target.empty()) throw UsageError("--target is required with --graph");
    if (!opt.o_cd->count()) throw UsageError("--cd is required with --graph");
    const BitLength cd = validating([&] {
      if (!std::isfinite(opt.cd)) throw Error(ErrorKind::invalid_argument, "--cd must be finite");
      try {
        return BitLength(opt.cd);
      } catch (const Error&) {
        throw Error(ErrorKind::invalid_argument, "--cd must be a finite value >= 0");
      }
    });
    const auto graph = graph_from_json(read_json(opt.graph));
    ex = explain(graph, SymbolId(opt.target), cd);
  } else {
    if (opt.o_cd->count()) throw UsageError("--cd cannot be combined with --bayes; the evidence sets it");
    auto model = bayes_model_from_json(read_json(opt.bayes));
    if (model.observation.str().empty()) {
      if (opt.target.empty()) throw UsageError("--target is required when the model names no observation");
      model.observation = SymbolId(opt.target);
    } else if (!opt.target.empty() && SymbolId(opt.target) != model.observation) {
      throw Error(ErrorKind::unknown_node, "--target '" + opt.target + "' is not the model's observation '" +
                                               model.observation.str() + "'");
    }
    const auto bg = from_probabilities(model);
    ex = explain(bg.graph, model.observation, bg.c_d);
  }
  OutputSink sink(opt.output);
  sink.stream() << to_json(ex).dump() << '\n';
  sink.commit();
  return 0;
}

// --- divergence -----------------------------------------------------------------

struct DivergenceOptions_ {
  std::string world;
  std::string mind;
  bool normalize = false;
  double tau = 2.0;
  std::string emit = "json";
  std::string output;

  void attach(CLI::App& app) {
    app.add_option("--world", world, "World distribution JSON {symbols, mass}")->required();
    app.add_option("--mind", mind, "Mind code table JSON {symbols, bits}")->required();
    app.add_flag("--normalize-mind", normalize, "Rescale mind weights 2^-bits to sum to one");
    app.add_option("--tau", tau, "Easy/hard threshold in bits for the soundness diagnostics");
    app.add_option("--emit", emit, "Report format: json or csv");
    app.add_option("-o,--output", output, "Destination; stdout if omitted");
  }
};

int run_divergence(const DivergenceOptions_& opt) {
  if (opt.emit != "json" && opt.emit != "csv") throw UsageError("--emit must be json or csv, got '" + opt.emit + "'");
  if (!(opt.tau > 0.0 && std::isfinite(opt.tau))) throw UsageError("--tau must be a finite value > 0");

  const auto world = distribution_from_json(read_json(opt.world));
  const auto mind = code_table_from_json(read_json(opt.mind));
  const MachinePair pair(world, mind);
  DivergenceOptions options;
  options.mind = opt.normalize ? Normalization::normalize : Normalization::reject;
  options.tau = opt.tau;
  const auto report = divergences(pair, options);
  for (const auto& s : report.zero_mass) {
    std::cerr << "surprise: warning: '" << s.str() << "' has zero world mass; its C_W is infinite\n";
  }

  OutputSink sink(opt.output);
  if (opt.emit == "csv") {
    sink.stream() << format_report_csv(report);
  } else {
    sink.stream() << to_json(report).dump() << '\n';
  }
  sink.commit();
  return 0;
}

// --- simulate -------------------------------------------------------------------

struct SimulateOptions {
  std::string spec;
  std::string out;
  std::string world_out;

  void attach(CLI::App& app) {
    app.add_option("--spec", spec, "Source specification JSON")->required();
    app.add_option("--out", out, "Event destination (JSONL); stdout if omitted");
    app.add_option("--world-out", world_out, "Write the generating distribution (stationary and zipf sources)");
  }
};

int run_simulate(const SimulateOptions& opt) {
  const auto spec = source_spec_from_json(read_json(opt.spec));
  std::optional<DiscreteDistribution> world;
  if (!opt.world_out.empty()) {
    world = stationary_distribution(spec);
    if (!world) throw UsageError("--world-out needs a stationary or zipf source");
  }
  OutputSink sink(opt.out);
  for (const auto& o : generate(spec)) sink.stream() << format_event(o) << '\n';
  sink.commit();
  if (world) write_file(opt.world_out, to_json(*world).dump() + "\n");
  return 0;
}

void report(const std::string& message) { std::cerr << "surprise: error: " << message << '\n'; }

}  // namespace

int main(int argc, char** argv) {
  std::ios::sync_with_stdio(false);

  CLI::App app{"Streaming unexpectedness, causal explanation and divergence diagnostics"};
  app.require_subcommand(1);

  TrackOptions track;
  track.attach(*app.add_subcommand("track", "Compute per-event unexpectedness over an event stream"), false);
  TrackOptions replay;
  replay.attach(*app.add_subcommand("replay", "Resume a tracked stream from a snapshot"), true);
  ExplainOptions explain_opts;
  explain_opts.attach(*app.add_subcommand("explain", "Best causal explanation and its unexpectedness"));
  DivergenceOptions_ div;
  div.attach(*app.add_subcommand("divergence", "Entropy/variety divergences between world and mind"));
  SimulateOptions sim;
  sim.attach(*app.add_subcommand("simulate", "Generate a deterministic event stream"));

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    report(e.what());
    return 1;
  }

  try {
    const auto* sub = app.get_subcommands().front();
    const std::string name = sub->get_name();
    if (name == "track") return run_track(track);
    if (name == "replay") return run_track(replay);
    if (name == "explain") return run_explain(explain_opts);
    if (name == "divergence") return run_divergence(div);
    if (name == "simulate") return run_simulate(sim);
  } catch (const UsageError& e) {
    report(e.what());
    return 1;
  } catch (const Error& e) {
    report(e.line() ? "line " + std::to_string(*e.line()) + ": " + e.what() : std::string(e.what()));
    return 2;
  } catch (const std::exception& e) {
    report(e.what());
    return 2;
  }
  return 1;
}
