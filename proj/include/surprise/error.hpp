#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace surprise {

enum class ErrorKind {
  invalid_argument,
  kraft_violation,
  improper_distribution,
  non_monotonic_time,
  insufficient_history,
  unknown_node,
  unreachable,
  support_mismatch,
  identity_mismatch,
  version_mismatch,
  invalid_spec,
  parse_error,
};

constexpr std::string_view to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::invalid_argument: return "invalid-argument";
    case ErrorKind::kraft_violation: return "kraft-violation";
    case ErrorKind::improper_distribution: return "improper-distribution";
    case ErrorKind::non_monotonic_time: return "non-monotonic-time";
    case ErrorKind::insufficient_history: return "insufficient-history";
    case ErrorKind::unknown_node: return "unknown-node";
    case ErrorKind::unreachable: return "unreachable";
    case ErrorKind::support_mismatch: return "support-mismatch";
    case ErrorKind::identity_mismatch: return "identity-mismatch";
    case ErrorKind::version_mismatch: return "version-mismatch";
    case ErrorKind::invalid_spec: return "invalid-spec";
    case ErrorKind::parse_error: return "parse-error";
  }
  return "unknown";
}

// Every failure in the library is reported through this type. The message is
// prefixed with the kind name so that a bare what() is already diagnosable.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& detail)
      : std::runtime_error(std::string(to_string(kind)) + ": " + detail), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

  // 1-based input line, set by readers that know where the offending record was.
  std::optional<std::uint64_t> line() const noexcept { return line_; }

  Error with_line(std::uint64_t line) const {
    Error copy(kind_, std::string(what()).substr(to_string(kind_).size() + 2));
    copy.line_ = line;
    return copy;
  }

 private:
  ErrorKind kind_;
  std::optional<std::uint64_t> line_;
};

namespace detail {

[[noreturn]] inline void fail(ErrorKind kind, const std::string& detail) {
  throw Error(kind, detail);
}

inline void require(bool condition, ErrorKind kind, const std::string& detail) {
  if (!condition) fail(kind, detail);
}

}  // namespace detail
}  // namespace surprise
