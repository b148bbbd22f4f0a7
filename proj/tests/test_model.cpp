#include <gtest/gtest.h>

#include "narrownet/error.hpp"
#include "narrownet/init.hpp"
#include "narrownet/model.hpp"
#include "oracles.hpp"

using namespace narrownet;

namespace {

Params random_params(std::size_t d, std::size_t m, Head head, std::mt19937_64& gen) {
  return Params(oracle::random_matrix(d, m, gen), oracle::random_vector(outer_length(head, m), gen),
                head);
}

constexpr ActivationKind kAllKinds[] = {ActivationKind::tanh, ActivationKind::sigmoid,
                                        ActivationKind::softplus};

}  // namespace

TEST(Activation, ValuesAndDerivatives) {
  for (ActivationKind k : kAllKinds) {
    const Activation act{k};
    for (double z : {-30.0, -3.0, -0.5, 0.0, 0.7, 4.0, 40.0}) {
      EXPECT_LE(oracle::rel_err(act.value(z), oracle::sigma(k, z)), 1e-14) << to_string(k) << ' ' << z;
      const double h = 1e-5;
      const double fd = (oracle::sigma(k, z + h) - oracle::sigma(k, z - h)) / (2 * h);
      EXPECT_NEAR(act.derivative(z), fd, 1e-8);
      double v = 0, dv = 0;
      act.evaluate(z, v, dv);
      EXPECT_EQ(v, act.value(z));
      EXPECT_EQ(dv, act.derivative(z));
    }
  }
}

TEST(Activation, SoftplusStableForLargeInput) {
  const Activation act{ActivationKind::softplus};
  EXPECT_DOUBLE_EQ(act.value(800.0), 800.0);
  EXPECT_GT(act.value(-800.0), -1e-300);
  EXPECT_TRUE(std::isfinite(act.value(800.0)));
}

TEST(Activation, ParseRoundTripAndWarnings) {
  for (ActivationKind k : kAllKinds) EXPECT_EQ(parse_activation(to_string(k)), k);
  EXPECT_THROW(parse_activation("relu"), Error);
  EXPECT_TRUE(activation_warnings(Activation{ActivationKind::tanh}).empty());
  EXPECT_FALSE(activation_warnings(Activation{ActivationKind::softplus}).empty());
  EXPECT_FALSE(activation_warnings(Activation{ActivationKind::sigmoid}).empty());
}

TEST(Params, PairedOddWidthRejected) {
  try {
    Params(DenseMatrix(2, 3), DenseVector(1), Head::paired);
    FAIL();
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("width m is an even number"), std::string::npos);
  }
  EXPECT_THROW(Params(DenseMatrix(2, 4), DenseVector(4), Head::paired), Error);
  EXPECT_NO_THROW(Params(DenseMatrix(2, 3), DenseVector(3), Head::plain));
}

TEST(Forward, PairCancellation) {
  std::mt19937_64 gen(10);
  DenseMatrix w(3, 2);
  const DenseVector col = oracle::random_vector(3, gen);
  for (std::size_t t = 0; t < 3; ++t) w(t, 0) = w(t, 1) = col[t];
  const Params p(w, DenseVector{1.7}, Head::paired);
  const DenseVector f = forward(p, Activation{}, oracle::random_matrix(5, 3, gen));
  for (double x : f) EXPECT_EQ(x, 0.0);
  const DenseMatrix phi = feature_matrix(p, Activation{}, oracle::random_matrix(5, 3, gen));
  for (std::size_t i = 0; i < 5; ++i) EXPECT_EQ(phi(i, 0), 0.0);
}

TEST(Forward, ClosedFormPaired) {
  const Params p(DenseMatrix{{1, -1}}, DenseVector{1}, Head::paired);
  const DenseVector f = forward(p, Activation{}, DenseMatrix{{1}});
  EXPECT_DOUBLE_EQ(f[0], 2 * std::tanh(1.0));
}

TEST(Forward, MatchesScalarOracle) {
  std::mt19937_64 gen(11);
  for (Head head : {Head::plain, Head::paired}) {
    for (ActivationKind k : kAllKinds) {
      const Params p = random_params(4, 6, head, gen);
      const DenseMatrix x = oracle::random_matrix(5, 4, gen);
      const DenseVector f = forward(p, Activation{k}, x);
      for (std::size_t i = 0; i < 5; ++i)
        EXPECT_LE(oracle::rel_err(f[i], oracle::scalar_forward(p, k, x, i)), 1e-13);
    }
  }
}

TEST(Forward, LinearInOuterWeights) {
  std::mt19937_64 gen(12);
  std::uniform_real_distribution<double> ud(-10, 10);
  for (Head head : {Head::plain, Head::paired}) {
    const Params p = random_params(3, 4, head, gen);
    const DenseMatrix x = oracle::random_matrix(7, 3, gen);
    const DenseVector f = forward(p, Activation{}, x);
    for (int rep = 0; rep < 20; ++rep) {
      const double alpha = ud(gen);
      DenseVector v = p.v();
      for (double& e : v) e *= alpha;
      const DenseVector g = forward(Params(p.w(), v, head), Activation{}, x);
      for (std::size_t i = 0; i < 7; ++i) EXPECT_NEAR(g[i], alpha * f[i], 1e-12 * std::max(1.0, std::abs(alpha * f[i])));
    }
  }
}

TEST(Forward, PairedHalfSwapNegatesExactly) {
  std::mt19937_64 gen(13);
  for (ActivationKind k : kAllKinds) {
    const Params p = random_params(4, 8, Head::paired, gen);
    DenseMatrix swapped(4, 8);
    for (std::size_t t = 0; t < 4; ++t)
      for (std::size_t j = 0; j < 8; ++j) swapped(t, j) = p.w()(t, (j + 4) % 8);
    const DenseMatrix x = oracle::random_matrix(6, 4, gen);
    const DenseVector f = forward(p, Activation{k}, x);
    const DenseVector g = forward(Params(swapped, p.v(), Head::paired), Activation{k}, x);
    for (std::size_t i = 0; i < 6; ++i) EXPECT_EQ(g[i], -f[i]);
  }
}

TEST(FeatureMatrix, ZeroWeightsTanh) {
  const Params p(DenseMatrix(3, 4), DenseVector(4, 1.0), Head::plain);
  std::mt19937_64 gen(14);
  const DenseMatrix phi = feature_matrix(p, Activation{}, oracle::random_matrix(5, 3, gen));
  for (double x : phi.data()) EXPECT_EQ(x, 0.0);
}

TEST(FeatureMatrix, TimesOuterWeightsIsForward) {
  std::mt19937_64 gen(15);
  for (Head head : {Head::plain, Head::paired}) {
    const Params p = random_params(4, 6, head, gen);
    const DenseMatrix x = oracle::random_matrix(9, 4, gen);
    const DenseMatrix phi = feature_matrix(p, Activation{}, x);
    ASSERT_EQ(phi.cols(), p.v().size());
    const DenseVector f = forward(p, Activation{}, x);
    for (std::size_t i = 0; i < 9; ++i) {
      double s = 0;
      for (std::size_t j = 0; j < phi.cols(); ++j) s += phi(i, j) * p.v()[j];
      EXPECT_NEAR(s, f[i], 1e-12);
    }
  }
}

TEST(Jacobian, PairedSingleSampleClosedForm) {
  const double w1 = 0.4, w2 = -1.3, v1 = 0.8, x = 1.7;
  const Params p(DenseMatrix{{w1, w2}}, DenseVector{v1}, Head::paired);
  const DenseMatrix j = jacobian_w(p, Activation{}, DenseMatrix{{x}});
  auto dt = [](double z) { return 1 - std::tanh(z) * std::tanh(z); };
  EXPECT_NEAR(j(0, 0), v1 * dt(w1 * x) * x, 1e-15);
  EXPECT_NEAR(j(0, 1), -v1 * dt(w2 * x) * x, 1e-15);
}

TEST(Jacobian, MatchesFiniteDifferencesEveryActivation) {
  std::mt19937_64 gen(16);
  const double h = 1e-6;
  for (Head head : {Head::plain, Head::paired}) {
    for (ActivationKind k : kAllKinds) {
      const Params p = random_params(3, 4, head, gen);
      const DenseMatrix x = oracle::random_matrix(5, 3, gen);
      const DenseMatrix jac = jacobian_w(p, Activation{k}, x);
      ASSERT_EQ(jac.rows(), 5u);
      ASSERT_EQ(jac.cols(), 12u);
      for (std::size_t j = 0; j < 4; ++j)
        for (std::size_t t = 0; t < 3; ++t) {
          DenseMatrix wp = p.w(), wm = p.w();
          wp(t, j) += h;
          wm(t, j) -= h;
          const Params pp(wp, p.v(), head), pm(wm, p.v(), head);
          for (std::size_t i = 0; i < 5; ++i) {
            const double fd = (oracle::scalar_forward(pp, k, x, i) - oracle::scalar_forward(pm, k, x, i)) / (2 * h);
            const double an = jac(i, j * 3 + t);
            EXPECT_LE(std::abs(an - fd) / std::max({1.0, std::abs(an), std::abs(fd)}), 1e-5);
          }
        }
    }
  }
}

TEST(Jacobian, MirroredBlocksNegateAndSqrt2Identity) {
  std::mt19937_64 gen(17);
  for (Head head : {Head::plain, Head::paired}) {
    for (std::uint64_t s = 0; s < 5; ++s) {
      const std::size_t d = 5, m = 6;
      const Params p = mirrored_lecun_init(d, m, head, Seed{s});
      const DenseMatrix x = oracle::random_matrix(10, d, gen);
      const DenseMatrix jac = jacobian_w(p, Activation{}, x);
      for (std::size_t i = 0; i < 10; ++i)
        for (std::size_t c = 0; c < m / 2 * d; ++c) EXPECT_EQ(jac(i, c + m / 2 * d), -jac(i, c));
      const double full = min_singular_value(jac);
      const double half = min_singular_value(first_half_blocks(jac, d, m));
      EXPECT_LE(oracle::rel_err(full, std::sqrt(2.0) * half), 1e-9);
    }
  }
}

TEST(SquareSubJacobian, FirstColumnsOfJacobian) {
  std::mt19937_64 gen(18);
  const Params p = random_params(4, 4, Head::paired, gen);
  const DenseMatrix x = oracle::random_matrix(4, 4, gen);
  const DenseMatrix jac = jacobian_w(p, Activation{}, x);
  EXPECT_EQ(square_sub_jacobian(p, Activation{}, x), column_slice(jac, 0, 4));
}

TEST(SquareSubJacobian, IndexArithmeticOracle) {
  // n = 6, d = 4: k1 = 1 full block (w_1) plus k2 = 2 coordinates of w_2.
  std::mt19937_64 gen(19);
  const Params p = random_params(4, 4, Head::paired, gen);
  const DenseMatrix x = oracle::random_matrix(6, 4, gen);
  const DenseMatrix jac = jacobian_w(p, Activation{}, x);
  const DenseMatrix sub = square_sub_jacobian(p, Activation{}, x);
  ASSERT_EQ(sub.rows(), 6u);
  ASSERT_EQ(sub.cols(), 6u);
  std::vector<std::pair<std::size_t, std::size_t>> unit_coord;
  for (std::size_t j = 0; j < 4 && unit_coord.size() < 6; ++j)
    for (std::size_t t = 0; t < 4 && unit_coord.size() < 6; ++t) unit_coord.emplace_back(j, t);
  EXPECT_EQ(unit_coord.back(), (std::pair<std::size_t, std::size_t>{1, 1}));
  for (std::size_t c = 0; c < 6; ++c)
    for (std::size_t i = 0; i < 6; ++i)
      EXPECT_EQ(sub(i, c), jac(i, unit_coord[c].first * 4 + unit_coord[c].second));
}

TEST(SquareSubJacobian, PreconditionViolated) {
  std::mt19937_64 gen(20);
  const Params p = random_params(2, 4, Head::paired, gen);
  EXPECT_THROW(square_sub_jacobian(p, Activation{}, oracle::random_matrix(5, 2, gen)), PreconditionError);
}
