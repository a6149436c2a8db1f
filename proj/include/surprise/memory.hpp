#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <iterator>
#include <list>
#include <optional>
#include <unordered_map>
#include <vector>

#include "surprise/core.hpp"

namespace surprise {

struct Observation {
  std::uint64_t t = 0;
  SymbolId symbol;

  friend bool operator==(const Observation&, const Observation&) = default;
};

// Determination test O_n ~ R. Identity only; the time index plays no part.
inline bool matches(const Observation& o, const SymbolId& reference) {
  return o.symbol == reference;
}

/// 1-based stack position, or nullopt when the symbol is not in memory.
using StackPosition = std::optional<std::size_t>;

/**
 * Short-term memory as a move-to-front stack. Position 1 is the top.
 *
 * Lookups walk from the top, so the cost of observe() is proportional to the
 * retrieved position; membership is answered by a hash index. An optional
 * capacity bounds the length, evicting from the bottom.
 *
 * Single writer. Copies are independent snapshots.
 */
class StmStack {
 public:
  StmStack() = default;
  explicit StmStack(std::optional<std::size_t> capacity) : capacity_(capacity) {
    detail::require(!capacity_ || *capacity_ >= 1, ErrorKind::invalid_argument,
                    "stack capacity must be >= 1");
  }

  /// Rebuilds a stack from its items, top first.
  StmStack(const std::vector<SymbolId>& items_top_first, std::optional<std::size_t> capacity)
      : StmStack(capacity) {
    detail::require(!capacity_ || items_top_first.size() <= *capacity_,
                    ErrorKind::invalid_argument, "stack holds more items than its capacity");
    for (const auto& s : items_top_first) {
      auto it = items_.insert(items_.end(), s);
      detail::require(where_.emplace(s, it).second, ErrorKind::invalid_argument,
                      "duplicate stack item '" + s.str() + "'");
    }
  }

  StmStack(const StmStack& other) : StmStack(other.items(), other.capacity_) {}
  StmStack& operator=(const StmStack& other) {
    if (this != &other) *this = StmStack(other);
    return *this;
  }
  StmStack(StmStack&&) noexcept = default;
  StmStack& operator=(StmStack&&) noexcept = default;

  std::size_t size() const noexcept { return items_.size(); }
  bool empty() const noexcept { return items_.empty(); }
  std::optional<std::size_t> capacity() const noexcept { return capacity_; }
  bool contains(const SymbolId& x) const { return where_.contains(x); }

  StackPosition position(const SymbolId& x) const {
    auto it = where_.find(x);
    if (it == where_.end()) return std::nullopt;
    return static_cast<std::size_t>(std::distance(items_.begin(), ListIter(it->second))) + 1;
  }

  /// Returns the position of x before the move, then puts x on top.
  StackPosition observe(const SymbolId& x) {
    auto it = where_.find(x);
    if (it != where_.end()) {
      auto node = it->second;
      const auto pos = static_cast<std::size_t>(std::distance(items_.begin(), node)) + 1;
      items_.splice(items_.begin(), items_, node);
      return pos;
    }
    items_.push_front(x);
    where_.emplace(x, items_.begin());
    if (capacity_ && items_.size() > *capacity_) {
      where_.erase(items_.back());
      items_.pop_back();
    }
    return std::nullopt;
  }

  std::vector<SymbolId> items() const { return {items_.begin(), items_.end()}; }

 private:
  using List = std::list<SymbolId>;
  using ListIter = List::const_iterator;

  List items_;
  std::unordered_map<SymbolId, List::iterator> where_;
  std::optional<std::size_t> capacity_;
};

/// C_D^STM = log2 pos, computed from the pre-move position. Unseen is +inf.
inline BitLength stm_complexity(StackPosition pre_position) {
  if (!pre_position) return BitLength::infinite();
  detail::require(*pre_position >= 1, ErrorKind::invalid_argument,
                  "stack positions are 1-based");
  return BitLength(std::log2(static_cast<double>(*pre_position)));
}

}  // namespace surprise
