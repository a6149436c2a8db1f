#include <cmath>
#include <numbers>
#include <random>

#include <gtest/gtest.h>

#include "surprise/estimators.hpp"

using namespace surprise;

namespace {

Observation at(std::uint64_t t, const char* s) { return {t, SymbolId(s)}; }

// Bernoulli stream over {"a", "b"} with P(a) = p.
std::vector<Observation> bernoulli(double p, std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::bernoulli_distribution coin(p);
  std::vector<Observation> out;
  out.reserve(n);
  for (std::size_t t = 0; t < n; ++t) out.push_back(at(t, coin(rng) ? "a" : "b"));
  return out;
}

// E[log2(1 + K)] for K geometric on {0,1,...} with success probability p.
double geometric_log_mean(double p) {
  double s = 0.0;
  double tail = 1.0;
  for (std::uint64_t n = 0; tail > 1e-15; ++n) {
    const double pn = p * std::pow(1.0 - p, static_cast<double>(n));
    s += pn * std::log2(static_cast<double>(n) + 1.0);
    tail -= pn;
  }
  return s;
}

}  // namespace

TEST(ExpectedPosition, Examples) {
  EXPECT_DOUBLE_EQ(expected_position(0.5), 1.0);
  EXPECT_NEAR(expected_position(0.1), 9.0, 1e-12);
  EXPECT_EQ(expected_position(1.0), 0.0);
  EXPECT_THROW(expected_position(0.0), Error);
  EXPECT_THROW(expected_position(1.5), Error);
}

TEST(ExpectedPosition, MatchesSeries) {
  for (double p : {0.02, 0.05, 0.1, 0.3, 0.5, 0.9}) {
    double series = 0.0;
    // Stop once the remainder of the mean, (1-p)^n (n + 1/p - 1), is below 1e-12.
    for (std::uint64_t n = 0;; ++n) {
      const double tail = std::pow(1.0 - p, static_cast<double>(n));
      if (tail * (static_cast<double>(n) + 1.0 / p) < 1e-12) break;
      series += static_cast<double>(n) * p * tail;
    }
    EXPECT_NEAR(series, expected_position(p), 1e-9) << p;
  }
}

TEST(LtmComplexity, FloorAndInfinity) {
  EXPECT_NEAR(ltm_complexity(0.0, std::ldexp(1.0, -20)).value(), 20.0, 1e-12);
  EXPECT_FALSE(ltm_complexity(0.0, 0.0).is_finite());
  EXPECT_EQ(ltm_complexity(1.0).value(), 0.0);
  EXPECT_NEAR(ltm_complexity(0.25, 0.5).value(), 1.0, 1e-12);
  EXPECT_THROW(ltm_complexity(1.2), Error);
}

TEST(IsStable, Examples) {
  const std::vector<double> flat(10, 0.3);
  EXPECT_TRUE(is_stable(flat, 10, 1e-9));
  const std::vector<double> jump{0.1, 0.5};
  EXPECT_FALSE(is_stable(jump, 2, 0.1));
  EXPECT_TRUE(is_stable(jump, 1, 0.0));
  try {
    is_stable(jump, 3, 0.1);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::insufficient_history);
  }
}

TEST(Smoothing, AutomaticFloor) {
  EXPECT_DOUBLE_EQ(Smoothing::automatic().floor(8, 2), 0.1);
  EXPECT_DOUBLE_EQ(Smoothing::automatic().floor(0, 0), 1.0);
  EXPECT_EQ(Smoothing::off().floor(100, 3), 0.0);
  EXPECT_DOUBLE_EQ(Smoothing::fixed(0.01).floor(100, 3), 0.01);
  EXPECT_THROW(Smoothing::fixed(0.0), Error);
}

TEST(FirEstimator, CountsOverWindow) {
  FirEstimator fir(4);
  const char* seq[] = {"a", "b", "a", "a", "c", "c"};
  for (std::uint64_t t = 0; t < 6; ++t) fir.update(at(t, seq[t]));
  // window holds a, a, c, c
  EXPECT_DOUBLE_EQ(fir.rate(SymbolId("a")), 0.5);
  EXPECT_DOUBLE_EQ(fir.rate(SymbolId("b")), 0.0);
  EXPECT_DOUBLE_EQ(fir.rate(SymbolId("c")), 0.5);
  EXPECT_EQ(fir.estimate(SymbolId("c")).support_count, 2u);
  const auto tracked = fir.tracked();
  EXPECT_EQ(tracked.size(), 2u);
  fir.register_symbol(SymbolId("b"));
  fir.register_symbol(SymbolId("z"));
  EXPECT_EQ(fir.tracked().size(), 4u);
}

TEST(FirEstimator, PartialWindowDividesByN) {
  FirEstimator fir(10);
  fir.update(at(0, "a"));
  fir.update(at(1, "a"));
  EXPECT_DOUBLE_EQ(fir.rate(SymbolId("a")), 0.2);
}

TEST(FirEstimator, RejectsNonMonotonicTime) {
  FirEstimator fir(3);
  fir.update(at(5, "a"));
  try {
    fir.update(at(5, "b"));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::non_monotonic_time);
  }
  EXPECT_DOUBLE_EQ(fir.rate(SymbolId("a")), 1.0 / 3.0);
}

TEST(FirEstimator, MassIsConserved) {
  const std::size_t n = 50;
  FirEstimator fir(n);
  std::mt19937_64 rng(9);
  std::uniform_int_distribution<int> pick(0, 6);
  for (std::uint64_t t = 0; t < 500; ++t) {
    fir.update({t, SymbolId(std::to_string(pick(rng)))});
    std::uint64_t counted = 0;
    for (const auto& s : fir.tracked()) counted += fir.estimate(s).support_count;
    // Integer counts: exact partition of the (partial) window.
    ASSERT_EQ(counted, std::min<std::uint64_t>(t + 1, n));
  }
  double total = 0.0;
  for (const auto& s : fir.tracked()) total += fir.rate(s);
  EXPECT_NEAR(total, 1.0, 1e-12);
}

TEST(IirEstimator, ClosedFormRun) {
  IirEstimator iir(0.9);
  for (std::uint64_t t = 1; t <= 30; ++t) {
    iir.update(at(t, "A"));
    EXPECT_NEAR(iir.rate(SymbolId("A")), 1.0 - std::pow(0.9, static_cast<double>(t)), 1e-12) << t;
  }
}

TEST(IirEstimator, MassConvergesToOne) {
  const double alpha = 0.95;
  IirEstimator iir(alpha);
  std::mt19937_64 rng(2);
  std::uniform_int_distribution<int> pick(0, 9);
  for (std::uint64_t t = 0; t < 400; ++t) {
    iir.update({t, SymbolId(std::to_string(pick(rng)))});
    double total = 0.0;
    for (const auto& e : iir.entries()) total += e.w;
    ASSERT_NEAR(total, 1.0 - std::pow(alpha, static_cast<double>(t + 1)), 1e-12) << t;
  }
}

TEST(IirEstimator, PruneDropsFadedSymbols) {
  IirEstimator iir(0.5, Smoothing::fixed(0.01), true);
  iir.update(at(0, "old"));
  for (std::uint64_t t = 1; t < 20; ++t) iir.update(at(t, "new"));
  EXPECT_EQ(iir.tracked().size(), 1u);
  EXPECT_EQ(iir.rate(SymbolId("old")), 0.0);
  EXPECT_NEAR(iir.complexity(SymbolId("old")).value(), std::log2(100.0), 1e-12);
}

TEST(Estimators, ConsistentOnBernoulli) {
  int fir_ok = 0;
  int iir_ok = 0;
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const auto events = bernoulli(0.3, 30000, seed);
    FirEstimator fir(10000);
    IirEstimator iir(0.999);
    for (const auto& o : events) {
      fir.update(o);
      iir.update(o);
    }
    fir_ok += std::abs(fir.rate(SymbolId("a")) - 0.3) < 0.02;
    iir_ok += std::abs(iir.rate(SymbolId("a")) - 0.3) < 0.02;
  }
  EXPECT_GE(fir_ok, 9);
  EXPECT_GE(iir_ok, 9);
}

TEST(StabilityMonitor, IirStableAfterBurnIn) {
  const double alpha = 0.999;
  const auto burn_in = static_cast<std::size_t>(10.0 / (1.0 - alpha));
  int stable = 0;
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    IirEstimator iir(alpha);
    StabilityMonitor monitor(100, 0.05);
    const auto events = bernoulli(0.3, burn_in + 100, seed);
    for (const auto& o : events) {
      iir.update(o);
      monitor.sample(iir);
    }
    stable += monitor.stable(SymbolId("a")).value_or(false) && monitor.stable(SymbolId("b")).value_or(false);
  }
  EXPECT_EQ(stable, 10);
}

TEST(StabilityMonitor, UnknownUntilFilled) {
  IirEstimator iir(0.9);
  StabilityMonitor monitor(5, 0.1);
  iir.update(at(0, "a"));
  monitor.sample(iir);
  EXPECT_FALSE(monitor.stable(SymbolId("a")).has_value());
}

// Pre-move positions when x (probability p) is interleaved with symbols that
// never repeat: the number of items above x is geometric with mean 1/p - 1.
TEST(JensenGap, GeometricPositions) {
  for (double p : {0.05, 0.1, 0.2, 0.5}) {
    std::mt19937_64 rng(17);
    std::bernoulli_distribution is_x(p);
    std::uint64_t since = 0;
    bool seen = false;
    double log_sum = 0.0;
    double count = 0.0;
    for (int i = 0; i < 400000; ++i) {
      if (is_x(rng)) {
        if (seen) {
          log_sum += std::log2(static_cast<double>(since) + 1.0);
          count += 1.0;
        }
        seen = true;
        since = 0;
      } else {
        ++since;
      }
    }
    const double mean_log = log_sum / count;
    const double bound = std::log2(1.0 + expected_position(p));
    EXPECT_LE(mean_log, bound) << p;
    EXPECT_NEAR(mean_log, geometric_log_mean(p), 0.02) << p;
    // The gap grows toward Euler's constant / ln 2 as p -> 0.
    EXPECT_LT(bound - mean_log, std::numbers::egamma / std::numbers::ln2) << p;
  }
  EXPECT_NEAR(std::log2(2.0) - geometric_log_mean(0.5), 0.2675, 1e-3);
  EXPECT_GT(-std::log2(0.05) - geometric_log_mean(0.05), 0.5);
}

TEST(AnyEstimator, ForwardsToImplementation) {
  AnyEstimator any = FirEstimator(2);
  any.update(at(0, "a"));
  EXPECT_EQ(any.kind(), EstimatorKind::fir);
  EXPECT_DOUBLE_EQ(any.rate(SymbolId("a")), 0.5);
  ASSERT_NE(any.fir(), nullptr);
  EXPECT_EQ(any.iir(), nullptr);
  EXPECT_THROW(any.check_time(at(0, "b")), Error);
}
