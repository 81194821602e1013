#include <cmath>
#include <cstring>
#include <limits>
#include <random>
#include <vector>

#include <gtest/gtest.h>

#include "stolz/sequence.hpp"

namespace stolz {
namespace {

Sequence cubic_ratio() {
  return {[](Index j) {
            const double x = static_cast<double>(j);
            return x * x / (1.0 + x * x * x);
          },
          "j^2/(1+j^3)"};
}

TEST(SequenceTest, TermExamples) {
  EXPECT_EQ(Sequence::constant(1.0).term(7), 1.0);
  EXPECT_DOUBLE_EQ(cubic_ratio().term(2), 4.0 / 9.0);
  EXPECT_EQ(Sequence::identity().term(10), 10.0);
}

TEST(SequenceTest, RejectsNonPositiveIndex) {
  const auto seq = Sequence::identity();
  EXPECT_THROW(seq.term(0), IndexError);
  EXPECT_THROW(seq.term(-3), IndexError);
}

TEST(SequenceTest, EvaluationIsBitIdentical) {
  const auto seq = cubic_ratio();
  for (Index j = 1; j < 1000; j += 37) {
    const double first = seq.term(j);
    const double second = seq.term(j);
    EXPECT_EQ(std::memcmp(&first, &second, sizeof(double)), 0);
  }
}

TEST(SequenceTest, DataBackedReportsLastIndex) {
  const auto seq = Sequence::from_values({1.0, 0.5, 0.25}, "halving");
  EXPECT_EQ(seq.term(2), 0.5);
  try {
    seq.term(4);
    FAIL() << "expected IndexError";
  } catch (const IndexError& e) {
    EXPECT_EQ(e.index(), 4);
    EXPECT_NE(std::string(e.what()).find("3"), std::string::npos);
  }
}

TEST(SequenceTest, Combinators) {
  const auto j = Sequence::identity();
  const auto one = Sequence::constant(1.0);
  EXPECT_EQ((3.0 * j).term(4), 12.0);
  EXPECT_EQ((j + one).term(4), 5.0);
  EXPECT_EQ((j - one).term(4), 3.0);
  EXPECT_EQ((j * j).term(4), 16.0);
  EXPECT_EQ((one / j).term(4), 0.25);
  EXPECT_THROW((one / Sequence::constant(0.0)).term(1), EvaluationError);
}

TEST(PartialSumSeriesTest, PartialSumExamples) {
  PartialSumSeries ones(Sequence::constant(1.0));
  EXPECT_EQ(ones.partial_sum(5), 5.0);

  PartialSumSeries ids(Sequence::identity());
  EXPECT_EQ(ids.partial_sum(4), 10.0);

  PartialSumSeries cubic(cubic_ratio());
  const double oracle = 0.5 + 4.0 / 9.0 + 9.0 / 28.0;
  EXPECT_NEAR(cubic.partial_sum(3), oracle, 1e-15);
  EXPECT_NEAR(cubic.partial_sum(3), 1.265873, 1e-6);
  EXPECT_EQ(cubic.value(0), 0.0);
  EXPECT_THROW(cubic.partial_sum(0), IndexError);
}

TEST(PartialSumSeriesTest, FiniteDifferenceExamples) {
  PartialSumSeries ones(Sequence::constant(1.0));
  EXPECT_EQ(ones.finite_difference(9), 1.0);

  PartialSumSeries ids(Sequence::identity());
  EXPECT_EQ(ids.finite_difference(4), 4.0);
  EXPECT_EQ(ids.finite_difference(1), 1.0);

  PartialSumSeries cubic(cubic_ratio());
  EXPECT_NEAR(cubic.finite_difference(2), 4.0 / 9.0, 1e-15);
}

TEST(PartialSumSeriesTest, TailSumExamples) {
  PartialSumSeries ones(Sequence::constant(1.0));
  EXPECT_EQ(ones.tail_sum(3, 8), 5.0);

  PartialSumSeries ids(Sequence::identity());
  EXPECT_EQ(ids.tail_sum(2, 4), 7.0);

  PartialSumSeries cubic(cubic_ratio());
  EXPECT_NEAR(cubic.tail_sum(1, 3), 4.0 / 9.0 + 9.0 / 28.0, 1e-15);
  EXPECT_NEAR(cubic.tail_sum(1, 3), 0.765873, 1e-6);

  EXPECT_EQ(ids.tail_sum(4, 4), 0.0);
  EXPECT_THROW(ids.tail_sum(5, 4), RangeError);
  EXPECT_THROW(ids.tail_sum(0, 4), RangeError);
}

TEST(PartialSumSeriesTest, DecompositionIdentity) {
  // Tails keep their own precision, so F_m + t can round to a neighbour of
  // F_n. Most cases are still exact and none drift past two ulps.
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> scale(0.1, 10.0);
  std::uniform_int_distribution<Index> index(1, 5000);
  int exact = 0;
  constexpr int kTrials = 2000;
  for (int trial = 0; trial < kTrials; ++trial) {
    const double c = scale(rng);
    const double p = scale(rng) / 5.0;
    PartialSumSeries series(
        {[c, p](Index j) { return c / std::pow(static_cast<double>(j), p); }, "c/j^p"});
    Index m = index(rng);
    Index n = index(rng);
    if (m > n) std::swap(m, n);
    const double total = series.partial_sum(n);
    const double rebuilt = series.partial_sum(m) + series.tail_sum(m, n);
    const double ulp = std::nextafter(total, INFINITY) - total;
    ASSERT_LE(std::fabs(rebuilt - total), 2.0 * ulp) << "m=" << m << " n=" << n;
    exact += rebuilt == total;
  }
  EXPECT_GT(exact, kTrials * 7 / 10);
}

TEST(PartialSumSeriesTest, SingleTermTailIsTheTerm) {
  std::mt19937_64 rng(13);
  std::uniform_real_distribution<double> u(1e-3, 1.0);
  std::vector<double> values(5000);
  for (auto& v : values) v = 50.0 * u(rng);
  PartialSumSeries series(Sequence::from_values(values, "random"));
  for (Index n = 2; n <= 5000; ++n) {
    ASSERT_EQ(series.tail_sum(n - 1, n), values[static_cast<std::size_t>(n - 1)]) << n;
  }
}

TEST(PartialSumSeriesTest, DecompositionIdentityIsExactOnIntegers) {
  PartialSumSeries ids(Sequence::identity());
  for (Index m = 1; m <= 300; m += 7) {
    for (Index n = m; n <= 2000; n += 13) {
      ASSERT_EQ(ids.partial_sum(n), ids.partial_sum(m) + ids.tail_sum(m, n));
    }
  }
}

TEST(PartialSumSeriesTest, PositiveTermsGiveStrictlyIncreasingSums) {
  const std::vector<Sequence> sequences = {
      cubic_ratio(),
      {[](Index j) { return 1.0 / static_cast<double>(j); }, "1/j"},
      {[](Index j) { return 1.5 + std::sin(static_cast<double>(j)); }, "1.5+sin j"},
      {[](Index j) { return 1.0 / (static_cast<double>(j) * j); }, "1/j^2"},
  };
  for (const auto& seq : sequences) {
    PartialSumSeries series(seq);
    double previous = series.value(0);
    for (Index n = 1; n <= 20000; ++n) {
      const double v = series.value(n);
      ASSERT_GT(v, previous) << seq.description() << " at n=" << n;
      previous = v;
    }
  }
}

TEST(PartialSumSeriesTest, DifferenceRecoversTermWithinTwoUlp) {
  const std::vector<Sequence> sequences = {
      cubic_ratio(),
      {[](Index j) { return 1.0 / std::sqrt(static_cast<double>(j)); }, "1/sqrt j"},
      {[](Index j) { return 2.0 + std::cos(0.001 * static_cast<double>(j)); }, "2+cos"},
  };
  constexpr Index kN = 1'000'000;
  for (const auto& seq : sequences) {
    PartialSumSeries series(seq);
    series.extend_to(kN);
    for (Index n = 2; n <= kN; ++n) {
      const double value = series.value(n);
      const double ulp = std::nextafter(value, INFINITY) - value;
      const double diff = series.finite_difference(n) - seq.term(n);
      ASSERT_LE(std::fabs(diff), 2.0 * ulp) << seq.description() << " at n=" << n;
    }
  }
}

TEST(PartialSumSeriesTest, CompensationBeatsNaiveSummation) {
  // 0.1 has no exact binary representation; naive sums drift linearly.
  PartialSumSeries series(Sequence::constant(0.1));
  double naive = 0.0;
  for (int i = 0; i < 1'000'000; ++i) naive += 0.1;
  const double exact = 100000.0;
  EXPECT_LT(std::fabs(series.value(1'000'000) - exact), std::fabs(naive - exact));
  EXPECT_NEAR(series.value(1'000'000), exact, 1e-9);
}

TEST(LogProductAccumulatorTest, IdentityFactor) {
  LogProductAccumulator acc;
  acc = acc.push(2.0);
  const double before = acc.log_value();
  acc = acc.push(1.0);
  EXPECT_EQ(acc.log_value(), before);
}

TEST(LogProductAccumulatorTest, TelescopingProduct) {
  LogProductAccumulator acc;
  for (int j = 1; j <= 3; ++j) acc = acc.push(1.0 - 1.0 / (j + 1.0));
  EXPECT_NEAR(acc.log_value(), std::log(0.25), 1e-15);
  EXPECT_TRUE(acc.sign_valid());
}

TEST(LogProductAccumulatorTest, NonPositiveFactorPoisons) {
  LogProductAccumulator acc;
  acc = acc.push(0.0);
  EXPECT_FALSE(acc.sign_valid());
  acc = acc.push(2.0);
  EXPECT_FALSE(acc.sign_valid());
  EXPECT_TRUE(std::isnan(acc.value()));
  EXPECT_FALSE(LogProductAccumulator{}.push(-1.0).sign_valid());
  EXPECT_FALSE(LogProductAccumulator{}.push_one_minus(1.0).sign_valid());
}

TEST(LogProductAccumulatorTest, MatchesDirectProduct) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> factor(0.5, 1.5);
  for (int trial = 0; trial < 20; ++trial) {
    LogProductAccumulator acc;
    long double direct = 1.0L;
    for (int n = 1; n <= 10000; ++n) {
      const double x = factor(rng);
      acc = acc.push(x);
      direct *= x;
      if (n % 500 == 0 && std::isnormal(static_cast<double>(direct))) {
        const double expected = static_cast<double>(direct);
        ASSERT_NEAR(acc.value() / expected, 1.0, 1e-12) << "n=" << n;
      }
    }
  }
}

}  // namespace
}  // namespace stolz
