#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "rnelab/parallel.hpp"
#include "rnelab/rng.hpp"
#include "rnelab/stats.hpp"

using namespace rnelab;

// Known-answer vectors published with the Random123 reference implementation.
TEST(Philox, KnownAnswerVectors) {
  using C = Philox4x32::Counter;
  using K = Philox4x32::Key;
  EXPECT_EQ(Philox4x32::generate(C{0, 0, 0, 0}, K{0, 0}),
            (C{0x6627e8d5, 0xe169c58d, 0xbc57ac4c, 0x9b00dbd8}));
  EXPECT_EQ(Philox4x32::generate(C{0xffffffff, 0xffffffff, 0xffffffff, 0xffffffff}, K{0xffffffff, 0xffffffff}),
            (C{0x408f276d, 0x41c83b0e, 0xa20bc7c6, 0x6d5451fd}));
  EXPECT_EQ(Philox4x32::generate(C{0x243f6a88, 0x85a308d3, 0x13198a2e, 0x03707344}, K{0xa4093822, 0x299f31d0}),
            (C{0xd16cfe09, 0x94fdcceb, 0x5001e420, 0x24126ea1}));
}

TEST(GaussianStream, ReproducibleAndIndependentOfOtherStreams) {
  GaussianStream a(42, 7), b(42, 7), c(42, 8);
  bool differs = false;
  for (int i = 0; i < 100; ++i) {
    const double x = a.normal();
    EXPECT_EQ(x, b.normal());
    differs = differs || x != c.normal();
  }
  EXPECT_TRUE(differs);
}

TEST(GaussianStream, Moments) {
  GaussianStream g(1, 0);
  stats::MeanAccumulator m, m4;
  for (int i = 0; i < 200000; ++i) {
    const double z = g.normal();
    m.add(z);
    m4.add(z * z * z * z);
  }
  EXPECT_NEAR(m.mean(), 0.0, 4.0 * std::sqrt(1.0 / 200000));
  EXPECT_NEAR(m.variance(), 1.0, 0.01);
  EXPECT_NEAR(m4.mean(), 3.0, 0.06);
}

TEST(GaussianStream, UniformStaysOpen) {
  GaussianStream g(3, 3);
  for (int i = 0; i < 100000; ++i) {
    const double u = g.uniform();
    ASSERT_GT(u, 0.0);
    ASSERT_LT(u, 1.0);
  }
}

TEST(DeriveSeed, TagsSeparateStreams) {
  EXPECT_NE(derive_seed(5, 1), derive_seed(5, 2));
  EXPECT_NE(derive_seed(5, 1), derive_seed(6, 1));
  EXPECT_EQ(derive_seed(5, 1), derive_seed(5, 1));
}

TEST(CompensatedSum, RecoversCancelledTerms) {
  stats::CompensatedSum s;
  for (double x : {1.0, 1e100, 1.0, -1e100}) s.add(x);
  EXPECT_EQ(s.value(), 2.0);
}

TEST(MeanAccumulator, SmallSample) {
  stats::MeanAccumulator m;
  for (double x : {1.0, 2.0, 3.0, 4.0}) m.add(x);
  EXPECT_DOUBLE_EQ(m.mean(), 2.5);
  EXPECT_DOUBLE_EQ(m.variance(), 5.0 / 3.0);
  EXPECT_DOUBLE_EQ(m.standard_error(), std::sqrt(5.0 / 12.0));
}

TEST(Normal, ReferenceValues) {
  EXPECT_NEAR(stats::normal_cdf(1.96), 0.9750021048517795, 1e-15);
  EXPECT_NEAR(stats::normal_cdf(-1.0), 0.15865525393145707, 1e-15);
  EXPECT_NEAR(stats::normal_cdf(-10.0), 7.619853024160527e-24, 1e-36);
  EXPECT_NEAR(stats::normal_pdf(1.0, 0.0, 2.0), 0.17603266338214976, 1e-15);
  EXPECT_NEAR(stats::normal_log_pdf(1.0, 0.0, 2.0), std::log(0.17603266338214976), 1e-13);
}

TEST(Kolmogorov, SurvivalFunction) {
  EXPECT_NEAR(stats::kolmogorov_q(1.0), 0.26999967167735456, 1e-12);
  EXPECT_NEAR(stats::kolmogorov_q(1.3580986393), 0.05, 1e-6);
  EXPECT_NEAR(stats::kolmogorov_q(0.0), 1.0, 1e-12);
}

TEST(KsTest, AcceptsMatchingRejectsShifted) {
  GaussianStream g(9, 0);
  std::vector<double> xs(5000);
  for (auto& x : xs) x = g.normal();
  const auto ok = stats::ks_test(xs, [](double x) { return stats::normal_cdf(x); });
  EXPECT_GT(ok.p_value, 0.01);
  EXPECT_EQ(ok.n, xs.size());
  const auto bad = stats::ks_test(xs, [](double x) { return stats::normal_cdf(x, 0.1, 1.0); });
  EXPECT_LT(bad.p_value, 1e-3);
}

TEST(KsTest, ExactStatisticOnTinySample) {
  // D for {0.1, 0.5, 0.9} against U(0,1): max(1/3 - 0.1, 0.5 - 1/3, 0.9 - 2/3, 1 - 0.9) = 0.2333
  const auto r = stats::ks_test({0.9, 0.1, 0.5}, [](double x) { return x; });
  EXPECT_NEAR(r.statistic, 0.7 / 3.0, 1e-15);
}

TEST(ParallelFor, ResultsIndependentOfWorkerCount) {
  for (unsigned w : {1u, 3u, 8u}) {
    std::vector<int> out(101, 0);
    parallel_for(out.size(), w, [&](std::size_t i) { out[i] = static_cast<int>(i * i); });
    for (std::size_t i = 0; i < out.size(); ++i) ASSERT_EQ(out[i], static_cast<int>(i * i));
  }
}

TEST(ParallelFor, RethrowsWorkerException) {
  EXPECT_THROW(parallel_for(10, 4, [](std::size_t i) {
                 if (i == 7) throw std::runtime_error("boom");
               }),
               std::runtime_error);
}
