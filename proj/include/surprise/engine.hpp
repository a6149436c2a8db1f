#pragma once

// Per-event unexpectedness U = C_D^LTM - C_D^STM over a symbol stream, with
// novelty flagging and an EWMA change detector on sustained positive U.

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "surprise/core.hpp"
#include "surprise/estimators.hpp"
#include "surprise/memory.hpp"

namespace surprise {

struct EstimatorConfig {
  EstimatorKind kind = EstimatorKind::iir;
  std::size_t window = 1000;
  double alpha = 0.999;
  Smoothing smoothing;
  bool prune = false;

  void validate() const {
    detail::require(window >= 1, ErrorKind::invalid_argument, "--window must be >= 1");
    detail::require(alpha > 0.0 && alpha < 1.0, ErrorKind::invalid_argument,
                    "--alpha must lie in the open interval (0,1)");
    if (smoothing.mode == SmoothingMode::fixed) {
      detail::require(smoothing.epsilon > 0.0 && smoothing.epsilon <= 1.0,
                      ErrorKind::invalid_argument, "--epsilon must lie in (0,1]");
    }
  }

  AnyEstimator make() const {
    validate();
    if (kind == EstimatorKind::fir) return FirEstimator(window, smoothing);
    return IirEstimator(alpha, smoothing, prune);
  }

  friend bool operator==(const EstimatorConfig&, const EstimatorConfig&) = default;
};

struct DetectorConfig {
  double beta = 0.95;
  double theta = 2.0;
  std::size_t min_hits = 20;
  // Events ignored by the detector while the estimator fills up.
  // nullopt: 3/(1-alpha) for IIR, the window length for FIR.
  std::optional<std::uint64_t> warmup;

  void validate() const {
    detail::require(beta > 0.0 && beta < 1.0, ErrorKind::invalid_argument,
                    "--beta must lie in the open interval (0,1)");
    detail::require(std::isfinite(theta) && theta >= 0.0, ErrorKind::invalid_argument,
                    "--theta must be a finite value >= 0");
    detail::require(min_hits >= 1, ErrorKind::invalid_argument, "--min-hits must be >= 1");
  }

  friend bool operator==(const DetectorConfig&, const DetectorConfig&) = default;
};

struct EngineConfig {
  EstimatorConfig estimator;
  DetectorConfig detector;
  std::optional<std::size_t> stack_capacity;

  void validate() const {
    estimator.validate();
    detector.validate();
    detail::require(!stack_capacity || *stack_capacity >= 1, ErrorKind::invalid_argument,
                    "--capacity must be >= 1");
  }

  std::uint64_t resolved_warmup() const {
    if (detector.warmup) return *detector.warmup;
    if (estimator.kind == EstimatorKind::fir) return estimator.window;
    return static_cast<std::uint64_t>(std::ceil(3.0 / (1.0 - estimator.alpha)));
  }

  friend bool operator==(const EngineConfig&, const EngineConfig&) = default;
};

/**
 * EWMA of clamped unexpectedness. The flag is up on every event at which the
 * average has exceeded theta for at least min_hits consecutive events.
 */
class ChangeDetector {
 public:
  ChangeDetector(double beta, double theta, std::size_t min_hits)
      : beta_(beta), theta_(theta), min_hits_(min_hits) {
    DetectorConfig{beta, theta, min_hits, std::nullopt}.validate();
  }
  explicit ChangeDetector(const DetectorConfig& c) : ChangeDetector(c.beta, c.theta, c.min_hits) {}

  bool detect(double u_clamped) {
    detail::require(u_clamped >= 0.0 && std::isfinite(u_clamped), ErrorKind::invalid_argument,
                    "detector input must be finite and >= 0");
    ewma_ = (1.0 - beta_) * u_clamped + beta_ * ewma_;
    consecutive_ = ewma_ > theta_ ? consecutive_ + 1 : 0;
    return consecutive_ >= min_hits_;
  }

  double ewma() const noexcept { return ewma_; }
  std::size_t consecutive() const noexcept { return consecutive_; }

  static ChangeDetector restore(const DetectorConfig& c, double ewma, std::size_t consecutive) {
    detail::require(ewma >= 0.0 && std::isfinite(ewma), ErrorKind::invalid_argument,
                    "detector ewma must be finite and >= 0");
    ChangeDetector d(c);
    d.ewma_ = ewma;
    d.consecutive_ = consecutive;
    return d;
  }

 private:
  double beta_;
  double theta_;
  std::size_t min_hits_;
  double ewma_ = 0.0;
  std::size_t consecutive_ = 0;
};

struct TraceRecord {
  std::uint64_t t = 0;
  SymbolId symbol;
  BitLength c_stm;
  BitLength c_ltm;
  std::optional<Unexpectedness> u;  // absent for novelty or infinite c_ltm
  bool novelty = false;
  bool change_flag = false;

  friend bool operator==(const TraceRecord&, const TraceRecord&) = default;
};

struct EngineSnapshot {
  static constexpr int kFormatVersion = 1;

  int format_version = kFormatVersion;
  EngineConfig config;
  std::optional<std::uint64_t> last_t;
  std::uint64_t events = 0;
  std::vector<SymbolId> stack;  // top first
  AnyEstimator estimator;
  double detector_ewma = 0.0;
  std::size_t detector_consecutive = 0;
};

class Engine {
 public:
  explicit Engine(EngineConfig config)
      : config_((config.validate(), config)),
        stack_(config.stack_capacity),
        estimator_(config.estimator.make()),
        detector_(config.detector),
        warmup_(config.resolved_warmup()) {}

  /// Measures, then learns: c_stm and c_ltm are read before the stack,
  /// estimator and detector see the event.
  TraceRecord step(const Observation& o) {
    if (last_t_ && o.t <= *last_t_) {
      detail::fail(ErrorKind::non_monotonic_time, "time " + std::to_string(o.t) +
                                                      " does not exceed previous " +
                                                      std::to_string(*last_t_));
    }
    estimator_.check_time(o);

    TraceRecord rec;
    rec.t = o.t;
    rec.symbol = o.symbol;
    rec.c_ltm = estimator_.complexity(o.symbol);
    rec.c_stm = stm_complexity(stack_.observe(o.symbol));
    rec.novelty = !rec.c_stm.is_finite();
    if (!rec.novelty && rec.c_ltm.is_finite()) {
      rec.u = Unexpectedness::between(rec.c_ltm, rec.c_stm);
    }

    estimator_.update(o);
    if (rec.u && events_ >= warmup_) rec.change_flag = detector_.detect(rec.u->clamped());

    last_t_ = o.t;
    ++events_;
    return rec;
  }

  const EngineConfig& config() const noexcept { return config_; }
  const StmStack& stack() const noexcept { return stack_; }
  const AnyEstimator& estimator() const noexcept { return estimator_; }
  const ChangeDetector& detector() const noexcept { return detector_; }
  std::optional<std::uint64_t> last_time() const noexcept { return last_t_; }
  std::uint64_t events() const noexcept { return events_; }

  EngineSnapshot snapshot() const {
    return EngineSnapshot{EngineSnapshot::kFormatVersion, config_,      last_t_,
                          events_,                         stack_.items(), estimator_,
                          detector_.ewma(),                detector_.consecutive()};
  }

  static Engine restore(const EngineSnapshot& snap) {
    if (snap.format_version != EngineSnapshot::kFormatVersion) {
      detail::fail(ErrorKind::version_mismatch,
                   "snapshot format " + std::to_string(snap.format_version) + ", expected " +
                       std::to_string(EngineSnapshot::kFormatVersion));
    }
    detail::require(snap.estimator.kind() == snap.config.estimator.kind,
                    ErrorKind::invalid_argument, "snapshot estimator does not match its config");
    Engine e(snap.config);
    e.stack_ = StmStack(snap.stack, snap.config.stack_capacity);
    e.estimator_ = snap.estimator;
    e.detector_ =
        ChangeDetector::restore(snap.config.detector, snap.detector_ewma, snap.detector_consecutive);
    e.last_t_ = snap.last_t;
    e.events_ = snap.events;
    return e;
  }

 private:
  EngineConfig config_;
  StmStack stack_;
  AnyEstimator estimator_;
  ChangeDetector detector_;
  std::uint64_t warmup_;
  std::optional<std::uint64_t> last_t_;
  std::uint64_t events_ = 0;
};

/// Folds step() over a finite stream. Errors carry the 1-based index of the
/// offending event.
inline std::vector<TraceRecord> run_stream(std::span<const Observation> events,
                                           const EngineConfig& config) {
  Engine engine(config);
  std::vector<TraceRecord> trace;
  trace.reserve(events.size());
  for (std::size_t i = 0; i < events.size(); ++i) {
    try {
      trace.push_back(engine.step(events[i]));
    } catch (const Error& e) {
      throw e.with_line(i + 1);
    }
  }
  return trace;
}

}  // namespace surprise
