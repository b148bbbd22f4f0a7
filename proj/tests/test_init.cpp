#include <gtest/gtest.h>

#include <set>

#include "narrownet/error.hpp"
#include "narrownet/init.hpp"
#include "narrownet/linalg.hpp"
#include "oracles.hpp"

using namespace narrownet;

namespace {

double sample_variance(std::span<const double> xs) {
  double mean = 0;
  for (double x : xs) mean += x;
  mean /= xs.size();
  double s = 0;
  for (double x : xs) s += (x - mean) * (x - mean);
  return s / (xs.size() - 1);
}

}  // namespace

TEST(Rng, DeterministicStreams) {
  Rng a(Seed{42}), b(Seed{42}), c(Seed{43});
  int differ = 0;
  for (int i = 0; i < 100; ++i) {
    const double x = a.normal();
    EXPECT_EQ(x, b.normal());
    differ += x != c.normal();
  }
  EXPECT_GT(differ, 95);
}

TEST(Rng, UniformInUnitIntervalAndNormalMoments) {
  Rng r(Seed{7});
  double lo = 1, hi = 0;
  for (int i = 0; i < 100000; ++i) {
    const double u = r.uniform();
    ASSERT_GE(u, 0.0);
    ASSERT_LT(u, 1.0);
    lo = std::min(lo, u);
    hi = std::max(hi, u);
  }
  EXPECT_LT(lo, 1e-3);
  EXPECT_GT(hi, 1 - 1e-3);
  std::vector<double> xs(200000);
  for (double& x : xs) x = r.normal();
  double mean = 0;
  for (double x : xs) mean += x;
  mean /= xs.size();
  EXPECT_NEAR(mean, 0.0, 0.01);
  EXPECT_NEAR(sample_variance(xs), 1.0, 0.01);
}

TEST(DeriveSeed, DistinctStreamsAndStable) {
  std::set<std::uint64_t> seen;
  for (std::uint64_t parent = 0; parent < 20; ++parent)
    for (std::uint64_t s = 0; s < 20; ++s) seen.insert(derive_seed(Seed{parent}, s).value);
  EXPECT_EQ(seen.size(), 400u);
  EXPECT_EQ(derive_seed(Seed{5}, 1), derive_seed(Seed{5}, 1));
}

TEST(LecunInit, VarianceWithinFivePercent) {
  const Params p = lecun_init(100, 1000, Head::plain, Seed{1});
  EXPECT_NEAR(sample_variance(p.w().data()), 1.0 / 100, 0.05 / 100);
  EXPECT_EQ(p.v().size(), 1000u);
  EXPECT_NEAR(sample_variance(p.v().data()), 1.0 / 1000, 0.1 / 1000);
}

TEST(LecunInit, SameSeedIdenticalDifferentSeedsDiffer) {
  EXPECT_EQ(lecun_init(7, 6, Head::paired, Seed{3}), lecun_init(7, 6, Head::paired, Seed{3}));
  for (std::uint64_t s = 0; s < 10; ++s) {
    const Params a = lecun_init(10, 20, Head::plain, Seed{2 * s});
    const Params b = lecun_init(10, 20, Head::plain, Seed{2 * s + 1});
    std::size_t total = 0, differ = 0;
    for (std::size_t i = 0; i < a.w().size(); ++i, ++total) differ += a.w().data()[i] != b.w().data()[i];
    for (std::size_t i = 0; i < a.v().size(); ++i, ++total) differ += a.v()[i] != b.v()[i];
    EXPECT_GE(differ, 0.99 * total);
  }
}

TEST(LecunInit, PairedOddWidthRejected) {
  EXPECT_THROW(lecun_init(3, 5, Head::paired, Seed{0}), Error);
}

TEST(MirroredInit, CopiesColumnsAndNegatesPlainOuterWeights) {
  for (Head head : {Head::plain, Head::paired}) {
    const Params p = mirrored_lecun_init(6, 10, head, Seed{9});
    for (std::size_t t = 0; t < 6; ++t)
      for (std::size_t j = 0; j < 5; ++j) EXPECT_EQ(p.w()(t, j + 5), p.w()(t, j));
    if (head == Head::plain) {
      ASSERT_EQ(p.v().size(), 10u);
      for (std::size_t j = 0; j < 5; ++j) EXPECT_EQ(p.v()[j + 5], -p.v()[j]);
    } else {
      EXPECT_EQ(p.v().size(), 5u);
    }
  }
}

TEST(MirroredInit, OddWidthCitesEvenRequirement) {
  for (Head head : {Head::plain, Head::paired}) {
    try {
      mirrored_lecun_init(3, 5, head, Seed{0});
      FAIL();
    } catch (const Error& e) {
      EXPECT_NE(std::string(e.what()).find("width m is an even number"), std::string::npos);
    }
  }
}

TEST(MirroredInit, ZeroOutputOverRandomConfigs) {
  std::mt19937_64 gen(21);
  std::uniform_int_distribution<std::size_t> dd(2, 100), mm(1, 64), nn(1, 500);
  for (int rep = 0; rep < 50; ++rep) {
    const std::size_t d = dd(gen), m = 2 * mm(gen), n = nn(gen);
    const DenseMatrix x = oracle::random_matrix(n, d, gen);
    for (Head head : {Head::plain, Head::paired}) {
      const Params p = mirrored_lecun_init(d, m, head, Seed{gen()});
      double worst = 0;
      for (std::size_t i = 0; i < n; ++i) worst = std::max(worst, std::abs(oracle::scalar_forward(p, ActivationKind::tanh, x, i)));
      EXPECT_LE(worst, 1e-12) << "d=" << d << " m=" << m << " n=" << n;
    }
  }
}
