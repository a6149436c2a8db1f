#pragma once

// Entropy/variety analytics between a generative source (world machine,
// masses p_i, C_W(i) = log2 1/p_i) and a descriptive memory (mind machine,
// code lengths C_D(i), weights d_i = 2^-C_D(i)).

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <numbers>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "surprise/core.hpp"

namespace surprise {

namespace detail {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

// Sum p_i log2(p_i / q_i) over raw weight vectors. 0 log 0 = 0; p_i > 0 with
// q_i = 0 gives +inf. q need not sum to one.
inline double kl_terms(std::span<const double> p, std::span<const double> q) {
  double s = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (p[i] == 0.0) continue;
    if (q[i] == 0.0) return kInf;
    s += p[i] * std::log2(p[i] / q[i]);
  }
  return s;
}

inline double cross_entropy_terms(std::span<const double> p, std::span<const double> q) {
  double s = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (p[i] == 0.0) continue;
    if (q[i] == 0.0) return kInf;
    s -= p[i] * std::log2(q[i]);
  }
  return s;
}

inline std::vector<double> aligned_masses(const DiscreteDistribution& reference,
                                          const DiscreteDistribution& other) {
  const auto perm = align_support(reference.support(), other.index());
  std::vector<double> out;
  out.reserve(perm.size());
  for (std::size_t j : perm) out.push_back(other.mass(j));
  return out;
}

// Same value for two infinities of equal sign, otherwise absolute tolerance.
inline bool agrees(double a, double b, double tol) {
  if (std::isinf(a) || std::isinf(b)) return a == b;
  return std::abs(a - b) <= tol;
}

}  // namespace detail

inline double entropy(const DiscreteDistribution& p) {
  return detail::cross_entropy_terms(p.masses(), p.masses());
}

/// H(P, Q) = sum P(x) log2 1/Q(x); +inf when Q misses mass that P has.
inline double cross_entropy(const DiscreteDistribution& p, const DiscreteDistribution& q) {
  const auto qa = detail::aligned_masses(p, q);
  return detail::cross_entropy_terms(p.masses(), qa);
}

inline double kl(const DiscreteDistribution& p, const DiscreteDistribution& q) {
  const auto qa = detail::aligned_masses(p, q);
  return detail::kl_terms(p.masses(), qa);
}

/// Symbols where P has mass and Q has none; these make H(P,Q) and KL infinite.
inline std::vector<SymbolId> uncovered_symbols(const DiscreteDistribution& p,
                                               const DiscreteDistribution& q) {
  const auto qa = detail::aligned_masses(p, q);
  std::vector<SymbolId> out;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (p.mass(i) > 0.0 && qa[i] == 0.0) out.push_back(p.support()[i]);
  }
  return out;
}

/// V = log2 |S|.
inline double variety(std::uint64_t n) {
  detail::require(n >= 1, ErrorKind::invalid_argument, "variety needs at least one state");
  return std::log2(static_cast<double>(n));
}

/// Mean description cost over the support.
inline double variety_hat(const CodeLengthTable& mind) {
  double s = 0.0;
  for (double l : mind.lengths()) s += l;
  return s / static_cast<double>(mind.size());
}

/// Entropy of the description weights d_i, i.e. sum d_i C_D(i) for a complete code.
inline double variety_star(const CodeLengthTable& mind,
                           Normalization mode = Normalization::reject) {
  return entropy(distribution_from_code(mind, mode));
}

/// Total address cost N log2 N for an unordered set of N objects.
inline double memory_cost_unordered(std::uint64_t n) {
  detail::require(n >= 1, ErrorKind::invalid_argument, "memory cost needs N >= 1");
  const double nd = static_cast<double>(n);
  return nd * std::log2(nd);
}

/// Total address cost log2(N!) + log2 N for an ordered stack of N objects.
/// log2(N!) is summed term by term up to 2^24 and taken from lgamma beyond.
inline double memory_cost_ordered(std::uint64_t n) {
  detail::require(n >= 1, ErrorKind::invalid_argument, "memory cost needs N >= 1");
  constexpr std::uint64_t kSummationLimit = std::uint64_t{1} << 24;
  double log_factorial = 0.0;
  if (n <= kSummationLimit) {
    long double acc = 0.0L;
    for (std::uint64_t i = 2; i <= n; ++i) acc += std::log2(static_cast<long double>(i));
    log_factorial = static_cast<double>(acc);
  } else {
    log_factorial = std::lgamma(static_cast<double>(n) + 1.0) / std::numbers::ln2;
  }
  return log_factorial + std::log2(static_cast<double>(n));
}

/// World distribution and mind code table over the same support, stored in
/// the world's order.
class MachinePair {
 public:
  MachinePair(DiscreteDistribution world, const CodeLengthTable& mind)
      : world_(std::move(world)), mind_(aligned(world_, mind)) {}

  const DiscreteDistribution& world() const noexcept { return world_; }
  const CodeLengthTable& mind() const noexcept { return mind_; }
  std::size_t size() const noexcept { return world_.size(); }
  const SymbolId& symbol(std::size_t i) const { return world_.support()[i]; }

  double c_w(std::size_t i) const { return bits_from_probability(world_.mass(i)).value(); }
  double c_d(std::size_t i) const { return mind_.length(i); }
  double u(std::size_t i) const { return c_w(i) - c_d(i); }
  double d(std::size_t i) const { return std::exp2(-c_d(i)); }

  /// Same world, mind lengths shifted by log2(Kraft sum) so the weights sum to one.
  MachinePair with_normalized_mind() const {
    const double shift = std::log2(mind_.kraft_sum());
    std::vector<double> lengths;
    lengths.reserve(size());
    for (double l : mind_.lengths()) lengths.push_back(std::max(0.0, l + shift));
    return MachinePair(world_, CodeLengthTable(mind_.support(), std::move(lengths)));
  }

 private:
  static CodeLengthTable aligned(const DiscreteDistribution& world, const CodeLengthTable& mind) {
    const auto perm = detail::align_support(world.support(), mind.index());
    std::vector<double> lengths;
    lengths.reserve(perm.size());
    for (std::size_t j : perm) lengths.push_back(mind.length(j));
    return {world.support(), std::move(lengths)};
  }

  DiscreteDistribution world_;
  CodeLengthTable mind_;
};

namespace detail {

inline std::vector<double> uniform_weights(std::size_t n) {
  return std::vector<double>(n, 1.0 / static_cast<double>(n));
}

inline std::vector<double> mind_weights(const MachinePair& pair) {
  std::vector<double> d;
  d.reserve(pair.size());
  for (std::size_t i = 0; i < pair.size(); ++i) d.push_back(pair.d(i));
  return d;
}

// sum w_i U(i), skipping zero-weight terms (0 * inf = 0).
inline double weighted_u(const MachinePair& pair, std::span<const double> weights) {
  double s = 0.0;
  for (std::size_t i = 0; i < pair.size(); ++i) {
    if (weights[i] == 0.0) continue;
    s += weights[i] * pair.u(i);
  }
  return s;
}

inline void require_not_over_kraft(const MachinePair& pair) {
  const double k = pair.mind().kraft_sum();
  require(k <= 1.0 + kMassTolerance, ErrorKind::kraft_violation,
          "mind Kraft sum " + std::to_string(k) + " exceeds 1");
}

inline void cross_check(double weighted, double identity, const char* name) {
  if (!agrees(weighted, identity, 1e-9)) {
    fail(ErrorKind::identity_mismatch, std::string(name) + ": weighted-U form " +
                                           std::to_string(weighted) + " vs KL form " +
                                           std::to_string(identity));
  }
}

}  // namespace detail

/// World-relative divergence sum p_i U(i) = -KL(W || D). Sub-stochastic minds are accepted.
inline double d_wrel(const MachinePair& pair) {
  detail::require_not_over_kraft(pair);
  const double weighted = detail::weighted_u(pair, pair.world().masses());
  const double identity = -detail::kl_terms(pair.world().masses(), detail::mind_weights(pair));
  detail::cross_check(weighted, identity, "D_wrel");
  return weighted;
}

/// Absolute divergence sum U(i)/N = KL(U || W) - KL(U || D).
inline double d_abs(const MachinePair& pair) {
  detail::require_not_over_kraft(pair);
  const auto uniform = detail::uniform_weights(pair.size());
  const double weighted = detail::weighted_u(pair, uniform);
  const double to_world = detail::kl_terms(uniform, pair.world().masses());
  const double to_mind = detail::kl_terms(uniform, detail::mind_weights(pair));
  const double identity = std::isinf(to_world) ? to_world : to_world - to_mind;
  detail::cross_check(weighted, identity, "D_abs");
  return weighted;
}

/// Mind-relative divergence sum d_i U(i) = KL(D || W). The mind weights must
/// sum to one; see MachinePair::with_normalized_mind.
inline double d_drel(const MachinePair& pair) {
  const double k = pair.mind().kraft_sum();
  detail::require(k <= 1.0 + kMassTolerance, ErrorKind::kraft_violation,
                  "mind Kraft sum " + std::to_string(k) + " exceeds 1");
  detail::require(k >= 1.0 - kMassTolerance, ErrorKind::improper_distribution,
                  "mind Kraft sum " + std::to_string(k) +
                      " is below 1; mind-relative divergence needs normalized weights");
  const auto d = detail::mind_weights(pair);
  const double weighted = detail::weighted_u(pair, d);
  const double identity = detail::kl_terms(d, pair.world().masses());
  detail::cross_check(weighted, identity, "D_drel");
  return weighted;
}

struct SoundnessReport {
  std::vector<SymbolId> unsound;     // easy to describe, hard to generate
  std::vector<SymbolId> incomplete;  // easy to generate, hard to describe
};

/// Instance-level diagnostics: "easy" is at most tau bits, "hard" exceeds 2 tau.
inline SoundnessReport soundness_completeness(const MachinePair& pair, double tau) {
  detail::require(tau > 0.0 && std::isfinite(tau), ErrorKind::invalid_argument,
                  "--tau must be a finite value > 0");
  SoundnessReport r;
  for (std::size_t i = 0; i < pair.size(); ++i) {
    const double cw = pair.c_w(i);
    const double cd = pair.c_d(i);
    if (cd <= tau && cw > 2.0 * tau) r.unsound.push_back(pair.symbol(i));
    if (cw <= tau && cd > 2.0 * tau) r.incomplete.push_back(pair.symbol(i));
  }
  return r;
}

struct SymbolCosts {
  SymbolId symbol;
  double c_w = 0.0;  // +inf for zero world mass
  double c_d = 0.0;
  double u = 0.0;
};

struct DivergenceOptions {
  Normalization mind = Normalization::reject;
  double tau = 2.0;
};

struct DivergenceReport {
  double H = 0.0;
  double V = 0.0;
  double V_hat = 0.0;
  double V_star = 0.0;
  double D = 0.0;
  double D_wrel = 0.0;
  double D_abs = 0.0;
  double D_drel = 0.0;
  double kraft_sum = 0.0;  // of the mind table as given
  bool mind_normalized = false;
  std::vector<SymbolCosts> per_symbol;
  std::vector<SymbolId> unsound;
  std::vector<SymbolId> incomplete;
  std::vector<SymbolId> zero_mass;  // world symbols with p_i = 0 (infinite C_W)
};

/**
 * Full report. Each divergence is computed both as a weighted average of
 * U(i) and through its Kullback-Leibler identity; disagreement beyond 1e-9
 * raises identity-mismatch.
 *
 * Mind tables whose Kraft sum is not one are rejected unless options.mind is
 * Normalization::normalize, in which case every mind length is shifted so the
 * weights sum to one and all fields (including U(i)) use the shifted lengths.
 */
inline DivergenceReport divergences(const MachinePair& given, const DivergenceOptions& options = {}) {
  DivergenceReport r;
  r.kraft_sum = given.mind().kraft_sum();
  const bool complete = given.mind().is_complete();
  if (!complete && options.mind == Normalization::reject) {
    detail::require(r.kraft_sum <= 1.0 + kMassTolerance, ErrorKind::kraft_violation,
                    "mind Kraft sum " + std::to_string(r.kraft_sum) + " exceeds 1");
  }
  r.mind_normalized = !complete && options.mind == Normalization::normalize;
  const MachinePair pair = r.mind_normalized ? given.with_normalized_mind() : given;

  const std::size_t n = pair.size();
  r.H = entropy(pair.world());
  r.V = variety(n);
  r.V_hat = variety_hat(pair.mind());
  r.D = r.H - r.V;
  r.D_wrel = d_wrel(pair);
  r.D_abs = d_abs(pair);
  r.D_drel = d_drel(pair);
  r.V_star = variety_star(pair.mind(), Normalization::reject);

  r.per_symbol.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    r.per_symbol.push_back({pair.symbol(i), pair.c_w(i), pair.c_d(i), pair.u(i)});
    if (pair.world().mass(i) == 0.0) r.zero_mass.push_back(pair.symbol(i));
  }
  auto diag = soundness_completeness(pair, options.tau);
  r.unsound = std::move(diag.unsound);
  r.incomplete = std::move(diag.incomplete);
  return r;
}

}  // namespace surprise
