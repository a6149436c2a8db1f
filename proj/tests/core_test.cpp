#include <cmath>
#include <limits>
#include <random>

#include <gtest/gtest.h>

#include "surprise/core.hpp"

using namespace surprise;

namespace {

std::vector<SymbolId> ids(std::initializer_list<const char*> names) {
  std::vector<SymbolId> out;
  for (const char* n : names) out.emplace_back(n);
  return out;
}

template <typename Fn>
ErrorKind kind_of(Fn&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.kind();
  }
  ADD_FAILURE() << "expected an Error";
  return ErrorKind::invalid_argument;
}

}  // namespace

TEST(BitLength, RejectsNegativeAndNan) {
  EXPECT_EQ(kind_of([] { BitLength(-1.0); }), ErrorKind::invalid_argument);
  EXPECT_EQ(kind_of([] { BitLength(std::nan("")); }), ErrorKind::invalid_argument);
  EXPECT_NO_THROW(BitLength(std::numeric_limits<double>::infinity()));
}

TEST(BitLength, NegativeZeroIsZero) {
  const BitLength z(-0.0);
  EXPECT_FALSE(std::signbit(z.value()));
  EXPECT_EQ(z, BitLength(0.0));
}

TEST(BitLength, InfinityAbsorbsAddition) {
  const auto s = BitLength(3.0) + BitLength::infinite();
  EXPECT_FALSE(s.is_finite());
  EXPECT_LT(BitLength(3.0), BitLength::infinite());
}

TEST(Unexpectedness, ClampsAtZero) {
  const auto u = Unexpectedness::between(BitLength(2.0), BitLength(5.0));
  EXPECT_DOUBLE_EQ(u.raw, -3.0);
  EXPECT_DOUBLE_EQ(u.clamped(), 0.0);
  EXPECT_THROW(Unexpectedness::between(BitLength::infinite(), BitLength(1.0)), Error);
}

TEST(BitsFromProbability, Examples) {
  EXPECT_NEAR(bits_from_probability(0.01).value(), 6.643856189774724, 1e-12);
  EXPECT_EQ(bits_from_probability(1.0).value(), 0.0);
  EXPECT_FALSE(bits_from_probability(0.0).is_finite());
  EXPECT_EQ(kind_of([] { bits_from_probability(1.5); }), ErrorKind::invalid_argument);
  EXPECT_EQ(kind_of([] { bits_from_probability(-0.1); }), ErrorKind::invalid_argument);
}

TEST(BitsFromProbability, RoundTripsIntegerLengths) {
  for (int l = 0; l <= 60; ++l) {
    const double p = std::ldexp(1.0, -l);
    EXPECT_EQ(bits_from_probability(p).value(), static_cast<double>(l)) << l;
  }
}

TEST(BitsFromProbability, RoundTripsRandomProbabilities) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> unit(1e-12, 1.0);
  for (int i = 0; i < 1000; ++i) {
    const double p = unit(rng);
    EXPECT_NEAR(std::exp2(-bits_from_probability(p).value()) / p, 1.0, 1e-12);
  }
}

TEST(DiscreteDistribution, Validates) {
  EXPECT_NO_THROW(DiscreteDistribution(ids({"a", "b"}), {0.25, 0.75}));
  EXPECT_EQ(kind_of([] { DiscreteDistribution(ids({"a", "b"}), {0.5, 0.6}); }),
            ErrorKind::improper_distribution);
  EXPECT_EQ(kind_of([] { DiscreteDistribution(ids({"a", "a"}), {0.5, 0.5}); }),
            ErrorKind::invalid_argument);
  EXPECT_EQ(kind_of([] { DiscreteDistribution(ids({"a", "b"}), {-0.1, 1.1}); }),
            ErrorKind::invalid_argument);
  EXPECT_ANY_THROW(DiscreteDistribution(ids({"a"}), {0.5, 0.5}));
}

TEST(DiscreteDistribution, UniformAndLookup) {
  const auto u = DiscreteDistribution::uniform(ids({"x", "y", "z", "w"}));
  EXPECT_EQ(u.size(), 4u);
  EXPECT_DOUBLE_EQ(u.mass(2), 0.25);
  EXPECT_EQ(u.index_of(SymbolId("z")), 2u);
  EXPECT_FALSE(u.index_of(SymbolId("q")).has_value());
}

TEST(CodeLengthTable, KraftSums) {
  const CodeLengthTable complete(ids({"a", "b", "c"}), {1, 2, 2});
  EXPECT_DOUBLE_EQ(complete.kraft_sum(), 1.0);
  EXPECT_TRUE(complete.is_complete());
  const CodeLengthTable over(ids({"a", "b", "c"}), {1, 1, 1});
  EXPECT_DOUBLE_EQ(over.kraft_sum(), 1.5);
  EXPECT_FALSE(over.is_proper());
  EXPECT_THROW(CodeLengthTable(ids({"a"}), {-1.0}), Error);
  EXPECT_THROW(CodeLengthTable(ids({"a"}), {std::numeric_limits<double>::infinity()}), Error);
}

TEST(DistributionFromCode, NormalizeOrReject) {
  const CodeLengthTable over(ids({"a", "b", "c"}), {1, 1, 1});
  const auto d = distribution_from_code(over, Normalization::normalize);
  for (std::size_t i = 0; i < 3; ++i) EXPECT_NEAR(d.mass(i), 1.0 / 3.0, 1e-15);
  EXPECT_EQ(kind_of([&] { distribution_from_code(over); }), ErrorKind::kraft_violation);

  const CodeLengthTable under(ids({"a", "b"}), {2, 2});
  EXPECT_EQ(kind_of([&] { distribution_from_code(under); }), ErrorKind::improper_distribution);
  const auto half = distribution_from_code(under, Normalization::normalize);
  EXPECT_DOUBLE_EQ(half.mass(0), 0.5);
}

TEST(DistributionFromCode, InvertsBitsFromProbability) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> unit(0.01, 1.0);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<double> w(8);
    double total = 0;
    for (double& x : w) total += (x = unit(rng));
    std::vector<SymbolId> s;
    std::vector<double> lengths;
    for (std::size_t i = 0; i < w.size(); ++i) {
      w[i] /= total;
      s.emplace_back("s" + std::to_string(i));
      lengths.push_back(bits_from_probability(w[i]).value());
    }
    const auto back = distribution_from_code(CodeLengthTable(s, lengths));
    for (std::size_t i = 0; i < w.size(); ++i) EXPECT_NEAR(back.mass(i), w[i], 1e-12);
  }
}

TEST(Error, KindNamesAndLines) {
  const Error e(ErrorKind::non_monotonic_time, "late");
  EXPECT_EQ(to_string(e.kind()), "non-monotonic-time");
  EXPECT_NE(std::string(e.what()).find("non-monotonic-time"), std::string::npos);
  EXPECT_FALSE(e.line().has_value());
  EXPECT_EQ(e.with_line(7).line(), 7u);
}
