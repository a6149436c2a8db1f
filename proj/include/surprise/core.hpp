#pragma once

// Value types shared by every module: symbols, bit lengths, unexpectedness,
// finite distributions and code-length tables. Everything here is an
// immutable value and safe to share across threads.

#include <cmath>
#include <compare>
#include <cstddef>
#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "surprise/error.hpp"

namespace surprise {

inline constexpr double kMassTolerance = 1e-9;

/// Identity of an atomic situation. Two symbols are the same iff their ids are equal.
class SymbolId {
 public:
  SymbolId() = default;
  explicit SymbolId(std::string id) : id_(std::move(id)) {}
  explicit SymbolId(const char* id) : id_(id) {}

  const std::string& str() const noexcept { return id_; }

  friend bool operator==(const SymbolId&, const SymbolId&) = default;
  friend std::strong_ordering operator<=>(const SymbolId& a, const SymbolId& b) noexcept {
    return a.id_.compare(b.id_) <=> 0;
  }

 private:
  std::string id_;
};

}  // namespace surprise

template <>
struct std::hash<surprise::SymbolId> {
  std::size_t operator()(const surprise::SymbolId& s) const noexcept {
    return std::hash<std::string>{}(s.str());
  }
};

namespace surprise {

/// A nonnegative cost in bits. +inf is a legal value (impossible or unseen
/// objects); NaN and negative values are rejected at construction.
class BitLength {
 public:
  constexpr BitLength() noexcept = default;

  explicit BitLength(double bits) : value_(bits + 0.0) {
    if (std::isnan(bits) || bits < 0.0) {
      detail::fail(ErrorKind::invalid_argument,
                   "bit length must be >= 0 or +inf, got " + std::to_string(bits));
    }
  }

  static constexpr BitLength infinite() noexcept {
    BitLength b;
    b.value_ = std::numeric_limits<double>::infinity();
    return b;
  }

  constexpr double value() const noexcept { return value_; }
  constexpr bool is_finite() const noexcept {
    return value_ != std::numeric_limits<double>::infinity();
  }

  friend BitLength operator+(BitLength a, BitLength b) noexcept {
    BitLength r;
    r.value_ = a.value_ + b.value_;
    return r;
  }

  friend constexpr bool operator==(BitLength, BitLength) = default;
  friend constexpr auto operator<=>(BitLength a, BitLength b) noexcept {
    return a.value_ <=> b.value_;
  }

 private:
  double value_ = 0.0;
};

/// U = C_W - C_D for one event. The raw value may be negative; the clamped
/// value applies the cognitive-economy floor at zero.
struct Unexpectedness {
  double raw = 0.0;

  double clamped() const noexcept { return raw > 0.0 ? raw : 0.0; }

  friend bool operator==(const Unexpectedness&, const Unexpectedness&) = default;

  static Unexpectedness between(BitLength generation, BitLength description) {
    detail::require(generation.is_finite() && description.is_finite(),
                    ErrorKind::invalid_argument, "unexpectedness needs finite costs");
    return Unexpectedness{generation.value() - description.value()};
  }
};

namespace detail {

inline std::unordered_map<SymbolId, std::size_t> index_symbols(const std::vector<SymbolId>& symbols,
                                                               std::string_view what) {
  std::unordered_map<SymbolId, std::size_t> index;
  index.reserve(symbols.size());
  for (std::size_t i = 0; i < symbols.size(); ++i) {
    if (!index.emplace(symbols[i], i).second) {
      fail(ErrorKind::invalid_argument,
           std::string(what) + ": duplicate symbol '" + symbols[i].str() + "'");
    }
  }
  return index;
}

// Permutation mapping each reference position to the matching position in
// `other`. Both lists must hold the same set of symbols.
inline std::vector<std::size_t> align_support(const std::vector<SymbolId>& reference,
                                              const std::unordered_map<SymbolId, std::size_t>& other) {
  if (reference.size() != other.size()) {
    fail(ErrorKind::support_mismatch, "supports have different sizes (" +
                                          std::to_string(reference.size()) + " vs " +
                                          std::to_string(other.size()) + ")");
  }
  std::vector<std::size_t> perm;
  perm.reserve(reference.size());
  for (const auto& s : reference) {
    auto it = other.find(s);
    if (it == other.end()) fail(ErrorKind::support_mismatch, "symbol '" + s.str() + "' missing");
    perm.push_back(it->second);
  }
  return perm;
}

}  // namespace detail

/// Finite probability distribution over an ordered, duplicate-free support.
class DiscreteDistribution {
 public:
  DiscreteDistribution(std::vector<SymbolId> support, std::vector<double> mass)
      : support_(std::move(support)), mass_(std::move(mass)) {
    detail::require(support_.size() == mass_.size(), ErrorKind::invalid_argument,
                    "distribution: support and mass arrays differ in length");
    detail::require(!support_.empty(), ErrorKind::invalid_argument, "distribution: empty support");
    double total = 0.0;
    for (double m : mass_) {
      detail::require(std::isfinite(m) && m >= 0.0 && m <= 1.0, ErrorKind::invalid_argument,
                      "distribution: mass outside [0,1]");
      total += m;
    }
    detail::require(std::abs(total - 1.0) <= kMassTolerance, ErrorKind::improper_distribution,
                    "distribution: masses sum to " + std::to_string(total));
    index_ = detail::index_symbols(support_, "distribution");
  }

  static DiscreteDistribution uniform(std::vector<SymbolId> support) {
    std::vector<double> mass(support.size(), 1.0 / static_cast<double>(support.size()));
    return {std::move(support), std::move(mass)};
  }

  std::size_t size() const noexcept { return support_.size(); }
  const std::vector<SymbolId>& support() const noexcept { return support_; }
  std::span<const double> masses() const noexcept { return mass_; }
  double mass(std::size_t i) const { return mass_.at(i); }

  std::optional<std::size_t> index_of(const SymbolId& s) const {
    auto it = index_.find(s);
    if (it == index_.end()) return std::nullopt;
    return it->second;
  }

  const std::unordered_map<SymbolId, std::size_t>& index() const noexcept { return index_; }

 private:
  std::vector<SymbolId> support_;
  std::vector<double> mass_;
  std::unordered_map<SymbolId, std::size_t> index_;
};

/// Per-symbol description lengths C_D(i), in bits.
class CodeLengthTable {
 public:
  CodeLengthTable(std::vector<SymbolId> support, std::vector<double> lengths)
      : support_(std::move(support)), lengths_(std::move(lengths)) {
    detail::require(support_.size() == lengths_.size(), ErrorKind::invalid_argument,
                    "code table: support and length arrays differ in length");
    detail::require(!support_.empty(), ErrorKind::invalid_argument, "code table: empty support");
    for (double l : lengths_) {
      detail::require(std::isfinite(l) && l >= 0.0, ErrorKind::invalid_argument,
                      "code table: lengths must be finite and >= 0");
    }
    index_ = detail::index_symbols(support_, "code table");
  }

  std::size_t size() const noexcept { return support_.size(); }
  const std::vector<SymbolId>& support() const noexcept { return support_; }
  std::span<const double> lengths() const noexcept { return lengths_; }
  double length(std::size_t i) const { return lengths_.at(i); }
  const std::unordered_map<SymbolId, std::size_t>& index() const noexcept { return index_; }

  double kraft_sum() const noexcept {
    double s = 0.0;
    for (double l : lengths_) s += std::exp2(-l);
    return s;
  }

  /// Kraft sum <= 1: the lengths are realisable by a prefix code.
  bool is_proper() const noexcept { return kraft_sum() <= 1.0 + kMassTolerance; }
  /// Kraft sum == 1: the implied weights form a probability distribution.
  bool is_complete() const noexcept { return std::abs(kraft_sum() - 1.0) <= kMassTolerance; }

 private:
  std::vector<SymbolId> support_;
  std::vector<double> lengths_;
  std::unordered_map<SymbolId, std::size_t> index_;
};

/// Information content log2(1/p). p = 0 gives +inf.
inline BitLength bits_from_probability(double p) {
  detail::require(p >= 0.0 && p <= 1.0, ErrorKind::invalid_argument,
                  "probability must lie in [0,1], got " + std::to_string(p));
  if (p == 0.0) return BitLength::infinite();
  return BitLength(-std::log2(p));
}

enum class Normalization { reject, normalize };

/// Weights d_i = 2^-length_i. Without normalization the raw weights must
/// already sum to one.
inline DiscreteDistribution distribution_from_code(const CodeLengthTable& table,
                                                   Normalization mode = Normalization::reject) {
  std::vector<double> mass;
  mass.reserve(table.size());
  for (double l : table.lengths()) mass.push_back(std::exp2(-l));
  const double kraft = table.kraft_sum();
  if (mode == Normalization::normalize) {
    for (double& m : mass) m /= kraft;
  } else if (kraft > 1.0 + kMassTolerance) {
    detail::fail(ErrorKind::kraft_violation, "Kraft sum " + std::to_string(kraft) + " exceeds 1");
  } else if (kraft < 1.0 - kMassTolerance) {
    detail::fail(ErrorKind::improper_distribution,
                 "Kraft sum " + std::to_string(kraft) + " is below 1; pass normalize to rescale");
  }
  return {table.support(), std::move(mass)};
}

}  // namespace surprise
