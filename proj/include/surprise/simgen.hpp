#pragma once

// Deterministic ground-truth streams. Symbols are decimal strings of integer
// labels; time indices run 0..length-1.

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <type_traits>
#include <unordered_set>
#include <variant>
#include <vector>

#include "surprise/core.hpp"
#include "surprise/memory.hpp"

namespace surprise {

/**
 * SplitMix64 (Steele, Lea & Flood 2014; constants as published by Vigna).
 * The state is the seed itself, so any implementation of the same recurrence
 * reproduces these streams exactly.
 */
class SplitMix64 {
 public:
  explicit constexpr SplitMix64(std::uint64_t seed) noexcept : state_(seed) {}

  constexpr std::uint64_t next() noexcept {
    std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  /// Uniform in [0,1) from the top 53 bits.
  constexpr double uniform01() noexcept {
    return static_cast<double>(next() >> 11) * 0x1.0p-53;
  }

  // UniformRandomBitGenerator, so <random> distributions also accept it.
  using result_type = std::uint64_t;
  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept { return ~result_type{0}; }
  constexpr result_type operator()() noexcept { return next(); }

 private:
  std::uint64_t state_;
};

struct LabeledDistribution {
  std::vector<std::int64_t> labels;
  std::vector<double> mass;

  /// Labels 0..K-1 for the given masses.
  static LabeledDistribution over_range(std::vector<double> mass) {
    LabeledDistribution d;
    for (std::size_t i = 0; i < mass.size(); ++i) d.labels.push_back(static_cast<std::int64_t>(i));
    d.mass = std::move(mass);
    return d;
  }

  DiscreteDistribution to_distribution() const {
    std::vector<SymbolId> symbols;
    symbols.reserve(labels.size());
    for (auto l : labels) symbols.emplace_back(std::to_string(l));
    return {std::move(symbols), mass};
  }
};

struct StationarySource {
  LabeledDistribution distribution;
};

struct ChangepointSource {
  LabeledDistribution before;
  LabeledDistribution after;
  std::uint64_t change_at = 0;  // first index drawn from `after`
};

/// Y_n = X_n + V with V drawn once: stationary, but not ergodic.
struct BifurcationSource {
  LabeledDistribution base;
  LabeledDistribution offset;
};

/// Labels are ranks 1..alphabet with mass proportional to 1/rank^exponent.
struct ZipfSource {
  std::size_t alphabet = 0;
  double exponent = 1.0;
};

struct SourceSpec {
  std::variant<StationarySource, ChangepointSource, BifurcationSource, ZipfSource> source;
  std::uint64_t seed = 0;
  std::uint64_t length = 0;
};

inline LabeledDistribution zipf_masses(std::size_t alphabet, double exponent) {
  detail::require(alphabet >= 1, ErrorKind::invalid_spec, "zipf alphabet must be >= 1");
  detail::require(std::isfinite(exponent) && exponent >= 0.0, ErrorKind::invalid_spec,
                  "zipf exponent must be finite and >= 0");
  LabeledDistribution d;
  double total = 0.0;
  for (std::size_t k = 1; k <= alphabet; ++k) {
    const double w = std::pow(static_cast<double>(k), -exponent);
    d.labels.push_back(static_cast<std::int64_t>(k));
    d.mass.push_back(w);
    total += w;
  }
  for (double& m : d.mass) m /= total;
  return d;
}

namespace detail {

inline DiscreteDistribution checked(const LabeledDistribution& d, const char* what) {
  try {
    return d.to_distribution();
  } catch (const Error& e) {
    fail(ErrorKind::invalid_spec, std::string(what) + ": " + e.what());
  }
}

// Inverse-CDF draw by a forward scan of cumulative masses.
inline std::size_t draw_index(std::span<const double> mass, SplitMix64& rng) {
  const double u = rng.uniform01();
  double acc = 0.0;
  std::size_t last_positive = 0;
  for (std::size_t i = 0; i < mass.size(); ++i) {
    if (mass[i] <= 0.0) continue;
    acc += mass[i];
    last_positive = i;
    if (u < acc) return i;
  }
  return last_positive;
}

inline Observation at(std::uint64_t t, std::int64_t label) {
  return Observation{t, SymbolId(std::to_string(label))};
}

}  // namespace detail

inline void validate(const SourceSpec& spec) {
  std::visit(
      [&](const auto& src) {
        using T = std::decay_t<decltype(src)>;
        if constexpr (std::is_same_v<T, StationarySource>) {
          detail::checked(src.distribution, "distribution");
        } else if constexpr (std::is_same_v<T, ChangepointSource>) {
          detail::checked(src.before, "before");
          detail::checked(src.after, "after");
          detail::require(src.change_at < spec.length, ErrorKind::invalid_spec,
                          "change_at must be smaller than length");
        } else if constexpr (std::is_same_v<T, BifurcationSource>) {
          detail::checked(src.base, "base");
          detail::checked(src.offset, "offset");
        } else {
          zipf_masses(src.alphabet, src.exponent);
        }
      },
      spec.source);
}

/// The distribution every event is drawn from, when there is a single one.
inline std::optional<DiscreteDistribution> stationary_distribution(const SourceSpec& spec) {
  if (const auto* s = std::get_if<StationarySource>(&spec.source)) {
    return detail::checked(s->distribution, "distribution");
  }
  if (const auto* z = std::get_if<ZipfSource>(&spec.source)) {
    return zipf_masses(z->alphabet, z->exponent).to_distribution();
  }
  return std::nullopt;
}

inline std::vector<Observation> generate(const SourceSpec& spec) {
  validate(spec);
  SplitMix64 rng(spec.seed);
  std::vector<Observation> out;
  out.reserve(spec.length);

  auto iid = [&](const LabeledDistribution& d, std::uint64_t from, std::uint64_t to,
                 std::int64_t shift) {
    for (std::uint64_t t = from; t < to; ++t) {
      out.push_back(detail::at(t, d.labels[detail::draw_index(d.mass, rng)] + shift));
    }
  };

  std::visit(
      [&](const auto& src) {
        using T = std::decay_t<decltype(src)>;
        if constexpr (std::is_same_v<T, StationarySource>) {
          iid(src.distribution, 0, spec.length, 0);
        } else if constexpr (std::is_same_v<T, ChangepointSource>) {
          iid(src.before, 0, src.change_at, 0);
          iid(src.after, src.change_at, spec.length, 0);
        } else if constexpr (std::is_same_v<T, BifurcationSource>) {
          const auto v = src.offset.labels[detail::draw_index(src.offset.mass, rng)];
          iid(src.base, 0, spec.length, v);
        } else {
          iid(zipf_masses(src.alphabet, src.exponent), 0, spec.length, 0);
        }
      },
      spec.source);
  return out;
}

}  // namespace surprise
