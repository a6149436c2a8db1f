#pragma once

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <istream>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>

#include <nlohmann/json.hpp>

#include "surprise/divergence.hpp"
#include "surprise/engine.hpp"
#include "surprise/memory.hpp"

namespace surprise {

/**
 * Reads an event stream, one event per line. A line starting with '{' is a
 * JSON object {"t": int, "s": string}; any other non-blank line is a bare
 * token whose time index is its 1-based line number. Blank lines are skipped.
 */
class EventReader {
 public:
  explicit EventReader(std::istream& in) : in_(in) {}

  std::optional<Observation> next() {
    std::string raw;
    while (std::getline(in_, raw)) {
      ++line_;
      const auto text = trim(raw);
      if (text.empty()) continue;
      try {
        return text.front() == '{' ? parse_json(text) : Observation{line_, SymbolId(std::string(text))};
      } catch (const Error& e) {
        throw e.with_line(line_);
      }
    }
    return std::nullopt;
  }

  /// 1-based number of the line most recently read.
  std::uint64_t line() const noexcept { return line_; }

 private:
  static std::string_view trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
  }

  static Observation parse_json(std::string_view text) {
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
      detail::fail(ErrorKind::parse_error, e.what());
    }
    detail::require(j.is_object() && j.contains("t") && j.contains("s"), ErrorKind::parse_error,
                    "event needs fields \"t\" and \"s\"");
    const auto& t = j.at("t");
    detail::require(t.is_number_unsigned() || (t.is_number_integer() && t.get<std::int64_t>() >= 0),
                    ErrorKind::parse_error, "\"t\" must be a nonnegative integer");
    const auto& s = j.at("s");
    std::string symbol;
    if (s.is_string()) {
      symbol = s.get<std::string>();
    } else if (s.is_number_integer()) {
      symbol = s.dump();
    } else {
      detail::fail(ErrorKind::parse_error, "\"s\" must be a string");
    }
    return Observation{t.get<std::uint64_t>(), SymbolId(std::move(symbol))};
  }

  std::istream& in_;
  std::uint64_t line_ = 0;
};

inline std::string format_event(const Observation& o) {
  return nlohmann::json{{"t", o.t}, {"s", o.symbol.str()}}.dump();
}

namespace detail {

// Fixed notation with 6 decimals, independent of the C++ locale.
inline std::string fixed6(double v) {
  std::array<char, 64> buf{};
  auto [end, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v, std::chars_format::fixed, 6);
  if (ec != std::errc{}) fail(ErrorKind::invalid_argument, "number out of range");
  return {buf.data(), end};
}

inline std::string json_number(double v) { return std::isinf(v) ? "null" : fixed6(v); }
inline std::string csv_number(double v) { return std::isinf(v) ? "" : fixed6(v); }

inline std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

}  // namespace detail

enum class TraceFormat { jsonl, csv };

inline constexpr std::string_view kTraceCsvHeader =
    "t,symbol,c_stm,c_ltm,u_raw,u_clamped,novelty,change_flag";

inline std::string format_record(const TraceRecord& r, TraceFormat format) {
  using namespace detail;
  std::string out;
  if (format == TraceFormat::csv) {
    out += std::to_string(r.t) + ',' + csv_field(r.symbol.str()) + ',';
    out += csv_number(r.c_stm.value()) + ',' + csv_number(r.c_ltm.value()) + ',';
    out += (r.u ? fixed6(r.u->raw) : std::string{}) + ',';
    out += (r.u ? fixed6(r.u->clamped()) : std::string{}) + ',';
    out += std::string(r.novelty ? "1" : "0") + ',' + (r.change_flag ? "1" : "0");
    return out;
  }
  out += "{\"t\":" + std::to_string(r.t);
  out += ",\"symbol\":" + nlohmann::json(r.symbol.str()).dump();
  out += ",\"c_stm\":" + json_number(r.c_stm.value());
  out += ",\"c_ltm\":" + json_number(r.c_ltm.value());
  out += ",\"u_raw\":" + (r.u ? fixed6(r.u->raw) : std::string("null"));
  out += ",\"u_clamped\":" + (r.u ? fixed6(r.u->clamped()) : std::string("null"));
  out += std::string(",\"novelty\":") + (r.novelty ? "true" : "false");
  out += std::string(",\"change_flag\":") + (r.change_flag ? "true" : "false") + "}";
  return out;
}

/// Writes records in arrival order. CSV output starts with the header line.
class TraceWriter {
 public:
  TraceWriter(std::ostream& out, TraceFormat format, bool write_header = true)
      : out_(out), format_(format) {
    if (format_ == TraceFormat::csv && write_header) out_ << kTraceCsvHeader << '\n';
  }

  void write(const TraceRecord& r) { out_ << format_record(r, format_) << '\n'; }

 private:
  std::ostream& out_;
  TraceFormat format_;
};

/// Per-symbol table of a divergence report, followed by the aggregate fields
/// as `# key,value` comment lines.
inline std::string format_report_csv(const DivergenceReport& r) {
  using namespace detail;
  std::string out = "symbol,c_w,c_d,u,unsound,incomplete\n";
  auto listed = [](const std::vector<SymbolId>& v, const SymbolId& s) {
    return std::find(v.begin(), v.end(), s) != v.end() ? "1" : "0";
  };
  for (const auto& s : r.per_symbol) {
    out += csv_field(s.symbol.str()) + ',' + csv_number(s.c_w) + ',' + fixed6(s.c_d) + ',' +
           csv_number(s.u) + ',' + listed(r.unsound, s.symbol) + ',' +
           listed(r.incomplete, s.symbol) + '\n';
  }
  const std::pair<const char*, double> fields[] = {
      {"H", r.H},           {"V", r.V},         {"V_hat", r.V_hat},   {"V_star", r.V_star},
      {"D", r.D},           {"D_wrel", r.D_wrel}, {"D_abs", r.D_abs}, {"D_drel", r.D_drel},
      {"kraft_sum", r.kraft_sum}};
  for (const auto& [k, v] : fields) out += std::string("# ") + k + ',' + csv_number(v) + '\n';
  return out;
}

}  // namespace surprise
