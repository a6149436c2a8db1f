#pragma once

// JSON file formats. Infinite costs are written as null.

#include <cmath>
#include <cstdint>
#include <fstream>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "surprise/causal.hpp"
#include "surprise/core.hpp"
#include "surprise/divergence.hpp"
#include "surprise/engine.hpp"
#include "surprise/estimators.hpp"
#include "surprise/simgen.hpp"

namespace surprise {

using Json = nlohmann::json;

inline constexpr const char* kSnapshotFormat = "surprise-engine-snapshot";

namespace detail {

inline Json bits_or_null(double v) { return std::isinf(v) ? Json(nullptr) : Json(v); }

template <typename Fn>
auto parsing(const std::string& what, Fn&& fn) -> decltype(fn()) {
  try {
    return fn();
  } catch (const Error&) {
    throw;
  } catch (const Json::exception& e) {
    fail(ErrorKind::parse_error, what + ": " + e.what());
  }
}

inline const Json& field(const Json& j, const char* key) {
  if (!j.is_object() || !j.contains(key)) {
    fail(ErrorKind::parse_error, std::string("missing field '") + key + "'");
  }
  return j.at(key);
}

inline std::vector<SymbolId> symbols_of(const Json& arr) {
  std::vector<SymbolId> out;
  for (const auto& s : arr) out.emplace_back(s.get<std::string>());
  return out;
}

inline Json symbols_json(const std::vector<SymbolId>& symbols) {
  Json arr = Json::array();
  for (const auto& s : symbols) arr.push_back(s.str());
  return arr;
}

}  // namespace detail

inline Json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) detail::fail(ErrorKind::parse_error, "cannot open '" + path + "'");
  return detail::parsing(path, [&] { return Json::parse(in); });
}

// --- distributions and code tables --------------------------------------------

/// {"symbols": [...], "mass": [...]}; a "bits" array is accepted and mapped to 2^-bits.
inline DiscreteDistribution distribution_from_json(const Json& j) {
  return detail::parsing("distribution", [&] {
    auto symbols = detail::symbols_of(detail::field(j, "symbols"));
    std::vector<double> mass;
    if (j.contains("mass")) {
      mass = j.at("mass").get<std::vector<double>>();
    } else {
      for (double b : detail::field(j, "bits").get<std::vector<double>>()) mass.push_back(std::exp2(-b));
    }
    return DiscreteDistribution(std::move(symbols), std::move(mass));
  });
}

/// {"symbols": [...], "bits": [...]}; a "mass" array is accepted and mapped to log2 1/mass.
inline CodeLengthTable code_table_from_json(const Json& j) {
  return detail::parsing("code table", [&] {
    auto symbols = detail::symbols_of(detail::field(j, "symbols"));
    std::vector<double> bits;
    if (j.contains("bits")) {
      bits = j.at("bits").get<std::vector<double>>();
    } else {
      for (double m : detail::field(j, "mass").get<std::vector<double>>()) {
        detail::require(m > 0.0, ErrorKind::invalid_argument, "code table mass must be > 0");
        bits.push_back(bits_from_probability(m).value());
      }
    }
    return CodeLengthTable(std::move(symbols), std::move(bits));
  });
}

inline Json to_json(const DiscreteDistribution& d) {
  return {{"symbols", detail::symbols_json(d.support())},
          {"mass", std::vector<double>(d.masses().begin(), d.masses().end())}};
}

inline Json to_json(const CodeLengthTable& t) {
  return {{"symbols", detail::symbols_json(t.support())},
          {"bits", std::vector<double>(t.lengths().begin(), t.lengths().end())}};
}

// --- engine configuration -------------------------------------------------------

inline Json to_json(const EngineConfig& c) {
  Json j;
  j["estimator"] = c.estimator.kind == EstimatorKind::fir ? "fir" : "iir";
  j["window"] = c.estimator.window;
  j["alpha"] = c.estimator.alpha;
  switch (c.estimator.smoothing.mode) {
    case SmoothingMode::automatic: j["epsilon"] = "auto"; break;
    case SmoothingMode::off: j["epsilon"] = "off"; break;
    case SmoothingMode::fixed: j["epsilon"] = c.estimator.smoothing.epsilon; break;
  }
  j["prune"] = c.estimator.prune;
  j["beta"] = c.detector.beta;
  j["theta"] = c.detector.theta;
  j["min_hits"] = c.detector.min_hits;
  j["warmup"] = c.detector.warmup ? Json(*c.detector.warmup) : Json("auto");
  j["capacity"] = c.stack_capacity ? Json(*c.stack_capacity) : Json(nullptr);
  return j;
}

/// Reads the keys present in j on top of `base`; absent keys keep base values.
inline EngineConfig engine_config_from_json(const Json& j, EngineConfig base = {}) {
  return detail::parsing("config", [&] {
    detail::require(j.is_object(), ErrorKind::parse_error, "config must be a JSON object");
    EngineConfig c = base;
    if (j.contains("estimator")) {
      const auto k = j.at("estimator").get<std::string>();
      detail::require(k == "fir" || k == "iir", ErrorKind::invalid_argument,
                      "estimator must be fir or iir");
      c.estimator.kind = k == "fir" ? EstimatorKind::fir : EstimatorKind::iir;
    }
    if (j.contains("window")) c.estimator.window = j.at("window").get<std::size_t>();
    if (j.contains("alpha")) c.estimator.alpha = j.at("alpha").get<double>();
    if (j.contains("epsilon")) {
      const auto& e = j.at("epsilon");
      if (e.is_string() && e.get<std::string>() == "auto") {
        c.estimator.smoothing = Smoothing::automatic();
      } else if (e.is_string() && e.get<std::string>() == "off") {
        c.estimator.smoothing = Smoothing::off();
      } else {
        c.estimator.smoothing = Smoothing::fixed(e.get<double>());
      }
    }
    if (j.contains("prune")) c.estimator.prune = j.at("prune").get<bool>();
    if (j.contains("beta")) c.detector.beta = j.at("beta").get<double>();
    if (j.contains("theta")) c.detector.theta = j.at("theta").get<double>();
    if (j.contains("min_hits")) c.detector.min_hits = j.at("min_hits").get<std::size_t>();
    if (j.contains("warmup")) {
      const auto& w = j.at("warmup");
      if (w.is_string() && w.get<std::string>() == "auto") {
        c.detector.warmup.reset();
      } else {
        c.detector.warmup = w.get<std::uint64_t>();
      }
    }
    if (j.contains("capacity")) {
      const auto& cap = j.at("capacity");
      if (cap.is_null()) {
        c.stack_capacity.reset();
      } else {
        c.stack_capacity = cap.get<std::size_t>();
      }
    }
    return c;
  });
}

// --- engine snapshots -----------------------------------------------------------

inline Json to_json(const EngineSnapshot& s) {
  Json est;
  est["alphabet"] = detail::symbols_json(s.estimator.alphabet());
  if (const auto* fir = s.estimator.fir()) {
    est["kind"] = "fir";
    est["window_contents"] = detail::symbols_json(fir->window_contents());
    est["registered"] = detail::symbols_json(fir->registered());
  } else {
    const auto* iir = s.estimator.iir();
    est["kind"] = "iir";
    Json entries = Json::array();
    for (const auto& e : iir->entries()) {
      entries.push_back({{"symbol", e.symbol.str()}, {"w", e.w}, {"count", e.count}});
    }
    est["entries"] = std::move(entries);
  }
  Json j;
  j["format"] = kSnapshotFormat;
  j["format_version"] = s.format_version;
  j["config"] = to_json(s.config);
  j["last_t"] = s.last_t ? Json(*s.last_t) : Json(nullptr);
  j["events"] = s.events;
  j["stack"] = detail::symbols_json(s.stack);
  j["estimator"] = std::move(est);
  j["detector"] = {{"ewma", s.detector_ewma}, {"consecutive", s.detector_consecutive}};
  return j;
}

inline EngineSnapshot snapshot_from_json(const Json& j) {
  return detail::parsing("snapshot", [&]() -> EngineSnapshot {
    detail::require(j.is_object() && j.value("format", std::string{}) == kSnapshotFormat,
                    ErrorKind::parse_error, "not an engine snapshot");
    const auto& version = detail::field(j, "format_version");
    detail::require(version.is_number_integer(), ErrorKind::parse_error,
                    "format_version must be an integer");
    if (version.get<int>() != EngineSnapshot::kFormatVersion) {
      detail::fail(ErrorKind::version_mismatch,
                   "snapshot format " + version.dump() + ", expected " +
                       std::to_string(EngineSnapshot::kFormatVersion));
    }
    const auto config = engine_config_from_json(detail::field(j, "config"));
    config.validate();
    const auto& lt = detail::field(j, "last_t");
    std::optional<std::uint64_t> last_t;
    if (!lt.is_null()) last_t = lt.get<std::uint64_t>();
    const auto events = detail::field(j, "events").get<std::uint64_t>();
    const auto& est = detail::field(j, "estimator");
    auto alphabet = detail::symbols_of(detail::field(est, "alphabet"));
    const auto kind = detail::field(est, "kind").get<std::string>();
    const bool want_fir = config.estimator.kind == EstimatorKind::fir;
    detail::require(kind == (want_fir ? "fir" : "iir"), ErrorKind::parse_error,
                    "estimator state does not match the configured estimator");

    std::optional<AnyEstimator> estimator;
    if (want_fir) {
      estimator = FirEstimator::restore(
          config.estimator.window, config.estimator.smoothing, last_t, events, std::move(alphabet),
          detail::symbols_of(detail::field(est, "window_contents")),
          detail::symbols_of(detail::field(est, "registered")));
    } else {
      std::vector<IirEstimator::Entry> entries;
      for (const auto& e : detail::field(est, "entries")) {
        entries.push_back({SymbolId(detail::field(e, "symbol").get<std::string>()),
                           detail::field(e, "w").get<double>(),
                           detail::field(e, "count").get<std::uint64_t>()});
      }
      estimator = IirEstimator::restore(config.estimator.alpha, config.estimator.smoothing,
                                        config.estimator.prune, last_t, events,
                                        std::move(alphabet), std::move(entries));
    }
    const auto& det = detail::field(j, "detector");
    return EngineSnapshot{version.get<int>(),
                          config,
                          last_t,
                          events,
                          detail::symbols_of(detail::field(j, "stack")),
                          std::move(*estimator),
                          detail::field(det, "ewma").get<double>(),
                          detail::field(det, "consecutive").get<std::size_t>()};
  });
}

// --- causal graphs and Bayes models ---------------------------------------------

inline CausalGraph graph_from_json(const Json& j) {
  return detail::parsing("graph", [&] {
    std::vector<CausalNode> nodes;
    for (const auto& n : detail::field(j, "nodes")) {
      CausalNode node{SymbolId(detail::field(n, "id").get<std::string>()), std::nullopt};
      if (n.contains("prior_bits") && !n.at("prior_bits").is_null()) {
        node.prior_bits = n.at("prior_bits").get<double>();
      }
      nodes.push_back(std::move(node));
    }
    std::vector<CausalEdge> edges;
    if (j.contains("edges")) {
      for (const auto& e : j.at("edges")) {
        edges.push_back({SymbolId(detail::field(e, "from").get<std::string>()),
                         SymbolId(detail::field(e, "to").get<std::string>()),
                         detail::field(e, "bits").get<double>()});
      }
    }
    return CausalGraph(std::move(nodes), std::move(edges));
  });
}

inline Json to_json(const CausalGraph& g) {
  Json nodes = Json::array();
  for (const auto& n : g.nodes()) {
    Json node{{"id", n.id.str()}};
    if (n.prior_bits) node["prior_bits"] = *n.prior_bits;
    nodes.push_back(std::move(node));
  }
  Json edges = Json::array();
  for (const auto& e : g.edges()) {
    edges.push_back({{"from", e.from.str()}, {"to", e.to.str()}, {"bits", e.bits}});
  }
  return {{"nodes", std::move(nodes)}, {"edges", std::move(edges)}};
}

/// {"observation": "O", "evidence": 0.1?, "causes": [{"id", "prior", "likelihood"}]}
inline BayesModel bayes_model_from_json(const Json& j) {
  return detail::parsing("bayes model", [&] {
    BayesModel m;
    if (j.contains("observation")) m.observation = SymbolId(j.at("observation").get<std::string>());
    if (j.contains("evidence") && !j.at("evidence").is_null()) {
      m.evidence = j.at("evidence").get<double>();
    }
    for (const auto& c : detail::field(j, "causes")) {
      m.causes.push_back({SymbolId(detail::field(c, "id").get<std::string>()),
                          detail::field(c, "prior").get<double>(),
                          detail::field(c, "likelihood").get<double>()});
    }
    return m;
  });
}

inline Json to_json(const Explanation& e) {
  return {{"target", e.target.str()},
          {"best_cause", e.best_cause.str()},
          {"chain", detail::symbols_json(e.chain)},
          {"generation_cost", e.generation_cost.value()},
          {"u_raw", e.u.raw},
          {"u_clamped", e.u.clamped()},
          {"posterior", std::exp2(-e.u.raw)}};
}

// --- simulation specs -----------------------------------------------------------

namespace detail {

inline LabeledDistribution labeled_from_json(const Json& j) {
  LabeledDistribution d;
  d.mass = field(j, "mass").get<std::vector<double>>();
  if (j.contains("labels")) {
    d.labels = j.at("labels").get<std::vector<std::int64_t>>();
  } else {
    d = LabeledDistribution::over_range(std::move(d.mass));
  }
  return d;
}

inline Json labeled_json(const LabeledDistribution& d) {
  return {{"labels", d.labels}, {"mass", d.mass}};
}

}  // namespace detail

inline SourceSpec source_spec_from_json(const Json& j) {
  try {
    SourceSpec spec;
    spec.seed = detail::field(j, "seed").get<std::uint64_t>();
    spec.length = detail::field(j, "length").get<std::uint64_t>();
    const auto kind = detail::field(j, "kind").get<std::string>();
    if (kind == "stationary") {
      spec.source = StationarySource{detail::labeled_from_json(detail::field(j, "distribution"))};
    } else if (kind == "changepoint") {
      spec.source = ChangepointSource{detail::labeled_from_json(detail::field(j, "before")),
                                      detail::labeled_from_json(detail::field(j, "after")),
                                      detail::field(j, "change_at").get<std::uint64_t>()};
    } else if (kind == "bifurcation") {
      spec.source = BifurcationSource{detail::labeled_from_json(detail::field(j, "base")),
                                      detail::labeled_from_json(detail::field(j, "offset"))};
    } else if (kind == "zipf") {
      spec.source = ZipfSource{detail::field(j, "alphabet").get<std::size_t>(),
                               j.value("exponent", 1.0)};
    } else {
      detail::fail(ErrorKind::invalid_spec, "unknown source kind '" + kind + "'");
    }
    validate(spec);
    return spec;
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::invalid_spec) throw;
    detail::fail(ErrorKind::invalid_spec, e.what());
  } catch (const Json::exception& e) {
    detail::fail(ErrorKind::invalid_spec, e.what());
  }
}

inline Json to_json(const SourceSpec& spec) {
  Json j{{"seed", spec.seed}, {"length", spec.length}};
  std::visit(
      [&](const auto& src) {
        using T = std::decay_t<decltype(src)>;
        if constexpr (std::is_same_v<T, StationarySource>) {
          j["kind"] = "stationary";
          j["distribution"] = detail::labeled_json(src.distribution);
        } else if constexpr (std::is_same_v<T, ChangepointSource>) {
          j["kind"] = "changepoint";
          j["before"] = detail::labeled_json(src.before);
          j["after"] = detail::labeled_json(src.after);
          j["change_at"] = src.change_at;
        } else if constexpr (std::is_same_v<T, BifurcationSource>) {
          j["kind"] = "bifurcation";
          j["base"] = detail::labeled_json(src.base);
          j["offset"] = detail::labeled_json(src.offset);
        } else {
          j["kind"] = "zipf";
          j["alphabet"] = src.alphabet;
          j["exponent"] = src.exponent;
        }
      },
      spec.source);
  return j;
}

// --- divergence reports ---------------------------------------------------------

inline Json to_json(const DivergenceReport& r) {
  using detail::bits_or_null;
  Json per = Json::array();
  for (const auto& s : r.per_symbol) {
    per.push_back({{"symbol", s.symbol.str()},
                   {"c_w", bits_or_null(s.c_w)},
                   {"c_d", s.c_d},
                   {"u", bits_or_null(s.u)}});
  }
  return {{"H", r.H},
          {"V", r.V},
          {"V_hat", r.V_hat},
          {"V_star", r.V_star},
          {"D", r.D},
          {"D_wrel", bits_or_null(r.D_wrel)},
          {"D_abs", bits_or_null(r.D_abs)},
          {"D_drel", bits_or_null(r.D_drel)},
          {"kraft_sum", r.kraft_sum},
          {"mind_normalized", r.mind_normalized},
          {"unsound", detail::symbols_json(r.unsound)},
          {"incomplete", detail::symbols_json(r.incomplete)},
          {"zero_mass", detail::symbols_json(r.zero_mass)},
          {"per_symbol", std::move(per)}};
}

}  // namespace surprise
