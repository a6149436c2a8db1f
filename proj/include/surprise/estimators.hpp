#pragma once

// Online occurrence-rate estimators w(x) ~ P(x), and the long-term-memory
// complexity derived from them.

#include <algorithm>
#include <cmath>
#include <concepts>
#include <cstddef>
#include <cstdint>
#include <deque>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <variant>
#include <vector>

#include "surprise/core.hpp"
#include "surprise/memory.hpp"

namespace surprise {

/// Expected number of items above x in a move-to-front stack fed by an
/// i.i.d. source with P(x) = p: 1/p - 1.
inline double expected_position(double p) {
  detail::require(p > 0.0 && p <= 1.0, ErrorKind::invalid_argument,
                  "expected_position needs p in (0,1], got " + std::to_string(p));
  return 1.0 / p - 1.0;
}

/// C_D^LTM = log2(1 / max(w, epsilon)). With epsilon = 0 an unseen rate costs +inf.
inline BitLength ltm_complexity(double w, double epsilon = 0.0) {
  detail::require(w >= 0.0 && w <= 1.0, ErrorKind::invalid_argument,
                  "rate must lie in [0,1], got " + std::to_string(w));
  detail::require(epsilon >= 0.0 && epsilon <= 1.0, ErrorKind::invalid_argument,
                  "smoothing floor must lie in [0,1]");
  return bits_from_probability(std::max(w, epsilon));
}

/// True iff max - min over the last m values is at most delta.
inline bool is_stable(std::span<const double> history, std::size_t m, double delta) {
  detail::require(m >= 1, ErrorKind::invalid_argument, "stability window must be >= 1");
  detail::require(delta >= 0.0, ErrorKind::invalid_argument, "stability delta must be >= 0");
  if (history.size() < m) {
    detail::fail(ErrorKind::insufficient_history, "need " + std::to_string(m) + " values, have " +
                                                      std::to_string(history.size()));
  }
  auto tail = history.last(m);
  auto [lo, hi] = std::minmax_element(tail.begin(), tail.end());
  return *hi - *lo <= delta;
}

enum class SmoothingMode { automatic, fixed, off };

// Floor applied to rates before taking logs. The automatic floor is
// 1/(events + alphabet), an additive-smoothing style pseudo-count.
struct Smoothing {
  SmoothingMode mode = SmoothingMode::automatic;
  double epsilon = 0.0;

  static Smoothing automatic() { return {}; }
  static Smoothing off() { return {SmoothingMode::off, 0.0}; }
  static Smoothing fixed(double eps) {
    detail::require(eps > 0.0 && eps <= 1.0, ErrorKind::invalid_argument,
                    "smoothing epsilon must lie in (0,1]");
    return {SmoothingMode::fixed, eps};
  }

  double floor(std::uint64_t events, std::size_t alphabet) const noexcept {
    switch (mode) {
      case SmoothingMode::fixed: return epsilon;
      case SmoothingMode::off: return 0.0;
      case SmoothingMode::automatic: break;
    }
    const double denom = static_cast<double>(events) + static_cast<double>(alphabet);
    return denom > 0.0 ? 1.0 / denom : 1.0;
  }

  friend bool operator==(const Smoothing&, const Smoothing&) = default;
};

struct FreqEstimate {
  SymbolId symbol;
  double w = 0.0;
  std::uint64_t support_count = 0;
};

namespace detail {

// Clock and alphabet bookkeeping common to both filters.
class StreamClock {
 public:
  void advance(const Observation& o) {
    if (last_t_ && o.t <= *last_t_) {
      fail(ErrorKind::non_monotonic_time, "time " + std::to_string(o.t) +
                                              " does not exceed previous " +
                                              std::to_string(*last_t_));
    }
    last_t_ = o.t;
    ++events_;
    if (seen_.insert(o.symbol).second) alphabet_.push_back(o.symbol);
  }

  void check(const Observation& o) const {
    if (last_t_ && o.t <= *last_t_) {
      fail(ErrorKind::non_monotonic_time, "time " + std::to_string(o.t) +
                                              " does not exceed previous " +
                                              std::to_string(*last_t_));
    }
  }

  std::optional<std::uint64_t> last_time() const noexcept { return last_t_; }
  std::uint64_t events() const noexcept { return events_; }
  const std::vector<SymbolId>& alphabet() const noexcept { return alphabet_; }

  void restore(std::optional<std::uint64_t> last_t, std::uint64_t events,
               std::vector<SymbolId> alphabet) {
    last_t_ = last_t;
    events_ = events;
    alphabet_ = std::move(alphabet);
    seen_ = {alphabet_.begin(), alphabet_.end()};
    require(seen_.size() == alphabet_.size(), ErrorKind::invalid_argument,
            "duplicate symbol in alphabet");
  }

 private:
  std::optional<std::uint64_t> last_t_;
  std::uint64_t events_ = 0;
  std::vector<SymbolId> alphabet_;
  std::unordered_set<SymbolId> seen_;
};

}  // namespace detail

/**
 * Finite-impulse-response rate: w(x) = (#matches among the last N events) / N.
 *
 * Events before the start of the stream count as non-matches, so during the
 * first N steps the rates sum to t/N rather than 1.
 */
class FirEstimator {
 public:
  explicit FirEstimator(std::size_t window, Smoothing smoothing = {})
      : window_(window), smoothing_(smoothing) {
    detail::require(window >= 1, ErrorKind::invalid_argument, "FIR window must be >= 1");
  }

  void update(const Observation& o) {
    clock_.advance(o);
    if (ring_.size() < window_) {
      ring_.push_back(o.symbol);
    } else {
      auto& slot = ring_[head_];
      auto it = counts_.find(slot);
      if (--it->second == 0) counts_.erase(it);
      slot = o.symbol;
      head_ = (head_ + 1) % window_;
    }
    ++counts_[o.symbol];
  }

  void register_symbol(const SymbolId& x) { registered_.insert(x); }

  double rate(const SymbolId& x) const {
    return static_cast<double>(count(x)) / static_cast<double>(window_);
  }

  FreqEstimate estimate(const SymbolId& x) const { return {x, rate(x), count(x)}; }

  /// Symbols in the current window plus explicitly registered ones.
  std::vector<SymbolId> tracked() const {
    std::vector<SymbolId> out;
    for (const auto& s : clock_.alphabet()) {
      if (counts_.contains(s) || registered_.contains(s)) out.push_back(s);
    }
    // registered but never observed, in id order
    for (const auto& s : registered()) {
      if (std::find(out.begin(), out.end(), s) == out.end()) out.push_back(s);
    }
    return out;
  }

  double epsilon() const noexcept { return smoothing_.floor(events(), clock_.alphabet().size()); }
  BitLength complexity(const SymbolId& x) const { return ltm_complexity(rate(x), epsilon()); }

  void check_time(const Observation& o) const { clock_.check(o); }
  std::size_t window() const noexcept { return window_; }
  const Smoothing& smoothing() const noexcept { return smoothing_; }
  std::uint64_t events() const noexcept { return clock_.events(); }
  std::optional<std::uint64_t> last_time() const noexcept { return clock_.last_time(); }
  const std::vector<SymbolId>& alphabet() const noexcept { return clock_.alphabet(); }

  /// Window contents, oldest first.
  std::vector<SymbolId> window_contents() const {
    std::vector<SymbolId> out;
    out.reserve(ring_.size());
    for (std::size_t i = 0; i < ring_.size(); ++i) out.push_back(ring_[(head_ + i) % ring_.size()]);
    return out;
  }

  std::vector<SymbolId> registered() const {
    std::vector<SymbolId> out(registered_.begin(), registered_.end());
    std::sort(out.begin(), out.end());
    return out;
  }

  static FirEstimator restore(std::size_t window, Smoothing smoothing,
                              std::optional<std::uint64_t> last_t, std::uint64_t events,
                              std::vector<SymbolId> alphabet,
                              const std::vector<SymbolId>& window_oldest_first,
                              const std::vector<SymbolId>& registered) {
    FirEstimator est(window, smoothing);
    detail::require(window_oldest_first.size() <= window, ErrorKind::invalid_argument,
                    "FIR window contents exceed the window length");
    est.ring_ = window_oldest_first;
    est.head_ = 0;
    for (const auto& s : est.ring_) ++est.counts_[s];
    est.registered_ = {registered.begin(), registered.end()};
    est.clock_.restore(last_t, events, std::move(alphabet));
    return est;
  }

 private:
  std::uint64_t count(const SymbolId& x) const {
    auto it = counts_.find(x);
    return it == counts_.end() ? 0 : it->second;
  }

  std::size_t window_;
  Smoothing smoothing_;
  detail::StreamClock clock_;
  std::vector<SymbolId> ring_;
  std::size_t head_ = 0;
  std::unordered_map<SymbolId, std::uint64_t> counts_;
  std::unordered_set<SymbolId> registered_;
};

/**
 * One-pole infinite-impulse-response rate:
 *   w_t(x) = (1 - alpha) * [O_t ~ x] + alpha * w_{t-1}(x).
 *
 * New symbols enter with w = 0 before their first update. With pruning on,
 * symbols whose rate has decayed below half the smoothing floor are dropped.
 */
class IirEstimator {
 public:
  struct Entry {
    SymbolId symbol;
    double w = 0.0;
    std::uint64_t count = 0;
  };

  explicit IirEstimator(double alpha, Smoothing smoothing = {}, bool prune = false)
      : alpha_(alpha), smoothing_(smoothing), prune_(prune) {
    detail::require(alpha > 0.0 && alpha < 1.0, ErrorKind::invalid_argument,
                    "IIR decay alpha must lie in (0,1)");
  }

  void update(const Observation& o) {
    clock_.advance(o);
    auto [it, inserted] = index_.try_emplace(o.symbol, entries_.size());
    if (inserted) entries_.push_back(Entry{o.symbol, 0.0, 0});
    for (auto& e : entries_) {
      const double indicator = matches(o, e.symbol) ? 1.0 : 0.0;
      e.w = (1.0 - alpha_) * indicator + alpha_ * e.w;
    }
    ++entries_[it->second].count;
    if (prune_) prune_below(epsilon() / 2.0, o.symbol);
  }

  double rate(const SymbolId& x) const {
    auto it = index_.find(x);
    return it == index_.end() ? 0.0 : entries_[it->second].w;
  }

  FreqEstimate estimate(const SymbolId& x) const {
    auto it = index_.find(x);
    if (it == index_.end()) return {x, 0.0, 0};
    const auto& e = entries_[it->second];
    return {x, e.w, e.count};
  }

  std::vector<SymbolId> tracked() const {
    std::vector<SymbolId> out;
    out.reserve(entries_.size());
    for (const auto& e : entries_) out.push_back(e.symbol);
    return out;
  }

  double epsilon() const noexcept { return smoothing_.floor(events(), clock_.alphabet().size()); }
  BitLength complexity(const SymbolId& x) const { return ltm_complexity(rate(x), epsilon()); }

  void check_time(const Observation& o) const { clock_.check(o); }
  double alpha() const noexcept { return alpha_; }
  bool prune() const noexcept { return prune_; }
  const Smoothing& smoothing() const noexcept { return smoothing_; }
  std::uint64_t events() const noexcept { return clock_.events(); }
  std::optional<std::uint64_t> last_time() const noexcept { return clock_.last_time(); }
  const std::vector<SymbolId>& alphabet() const noexcept { return clock_.alphabet(); }
  const std::vector<Entry>& entries() const noexcept { return entries_; }

  static IirEstimator restore(double alpha, Smoothing smoothing, bool prune,
                              std::optional<std::uint64_t> last_t, std::uint64_t events,
                              std::vector<SymbolId> alphabet, std::vector<Entry> entries) {
    IirEstimator est(alpha, smoothing, prune);
    for (const auto& e : entries) {
      detail::require(e.w >= 0.0 && e.w <= 1.0, ErrorKind::invalid_argument,
                      "IIR rate outside [0,1]");
      detail::require(est.index_.emplace(e.symbol, est.entries_.size()).second,
                      ErrorKind::invalid_argument, "duplicate IIR entry");
      est.entries_.push_back(e);
    }
    est.clock_.restore(last_t, events, std::move(alphabet));
    return est;
  }

 private:
  void prune_below(double threshold, const SymbolId& keep) {
    if (threshold <= 0.0) return;
    const auto before = entries_.size();
    std::erase_if(entries_, [&](const Entry& e) { return e.w < threshold && e.symbol != keep; });
    if (entries_.size() != before) {
      index_.clear();
      for (std::size_t i = 0; i < entries_.size(); ++i) index_.emplace(entries_[i].symbol, i);
    }
  }

  double alpha_;
  Smoothing smoothing_;
  bool prune_;
  detail::StreamClock clock_;
  std::vector<Entry> entries_;
  std::unordered_map<SymbolId, std::size_t> index_;
};

template <typename E>
concept RateEstimator = requires(E est, const E cest, const Observation& o, const SymbolId& x) {
  est.update(o);
  { cest.rate(x) } -> std::convertible_to<double>;
  { cest.estimate(x) } -> std::same_as<FreqEstimate>;
  { cest.complexity(x) } -> std::same_as<BitLength>;
  { cest.epsilon() } -> std::convertible_to<double>;
  { cest.events() } -> std::convertible_to<std::uint64_t>;
  { cest.tracked() } -> std::same_as<std::vector<SymbolId>>;
};

static_assert(RateEstimator<FirEstimator>);
static_assert(RateEstimator<IirEstimator>);

enum class EstimatorKind { fir, iir };

/// Runtime choice between the two filters; value semantics, cheap to snapshot.
class AnyEstimator {
 public:
  AnyEstimator(FirEstimator e) : impl_(std::move(e)) {}
  AnyEstimator(IirEstimator e) : impl_(std::move(e)) {}

  EstimatorKind kind() const noexcept {
    return std::holds_alternative<FirEstimator>(impl_) ? EstimatorKind::fir : EstimatorKind::iir;
  }

  void update(const Observation& o) {
    std::visit([&](auto& e) { e.update(o); }, impl_);
  }
  void check_time(const Observation& o) const {
    std::visit([&](const auto& e) { e.check_time(o); }, impl_);
  }
  double rate(const SymbolId& x) const {
    return std::visit([&](const auto& e) { return e.rate(x); }, impl_);
  }
  FreqEstimate estimate(const SymbolId& x) const {
    return std::visit([&](const auto& e) { return e.estimate(x); }, impl_);
  }
  BitLength complexity(const SymbolId& x) const {
    return std::visit([&](const auto& e) { return e.complexity(x); }, impl_);
  }
  double epsilon() const {
    return std::visit([](const auto& e) { return e.epsilon(); }, impl_);
  }
  std::uint64_t events() const {
    return std::visit([](const auto& e) { return e.events(); }, impl_);
  }
  std::vector<SymbolId> tracked() const {
    return std::visit([](const auto& e) { return e.tracked(); }, impl_);
  }
  const std::vector<SymbolId>& alphabet() const {
    return std::visit([](const auto& e) -> const std::vector<SymbolId>& { return e.alphabet(); },
                      impl_);
  }

  const FirEstimator* fir() const noexcept { return std::get_if<FirEstimator>(&impl_); }
  const IirEstimator* iir() const noexcept { return std::get_if<IirEstimator>(&impl_); }

 private:
  std::variant<FirEstimator, IirEstimator> impl_;
};

static_assert(RateEstimator<AnyEstimator>);

/// Keeps the last m rate values of every symbol seen, for Delta-w checks.
class StabilityMonitor {
 public:
  StabilityMonitor(std::size_t m, double delta) : m_(m), delta_(delta) {
    detail::require(m >= 1, ErrorKind::invalid_argument, "stability window must be >= 1");
    detail::require(delta >= 0.0, ErrorKind::invalid_argument, "stability delta must be >= 0");
  }

  template <RateEstimator E>
  void sample(const E& est) {
    for (const auto& x : est.alphabet()) {
      auto& h = history_[x];
      h.push_back(est.rate(x));
      if (h.size() > m_) h.pop_front();
    }
  }

  /// nullopt until m samples have been collected for x.
  std::optional<bool> stable(const SymbolId& x) const {
    auto it = history_.find(x);
    if (it == history_.end() || it->second.size() < m_) return std::nullopt;
    std::vector<double> values(it->second.begin(), it->second.end());
    return is_stable(values, m_, delta_);
  }

 private:
  std::size_t m_;
  double delta_;
  std::unordered_map<SymbolId, std::deque<double>> history_;
};

}  // namespace surprise
