#include <gtest/gtest.h>

#include "narrownet/constraints.hpp"
#include "narrownet/dataset.hpp"
#include "narrownet/error.hpp"
#include "narrownet/init.hpp"
#include "narrownet/trainer.hpp"
#include "oracles.hpp"

using namespace narrownet;

namespace {

TrainConfig pgd_config(const Params& p0, double eps, double lr, double mu, std::size_t iters) {
  TrainConfig c;
  c.regime = Regime::mirrored_pgd;
  c.lr_w = c.lr_v = lr;
  c.momentum = mu;
  c.max_iters = iters;
  c.kkt_tol = 0.0;
  c.track_lambda_min = false;
  ConstraintSpec s;
  s.epsilon = eps;
  s.anchor_w0 = p0.w();
  c.constraint = s;
  return c;
}

// Hand-derived gradients for the d = 1, m = 2 paired network
// f(x) = v (tanh(a x) - tanh(b x)).
struct Tiny {
  double a, b, v;
};

Tiny tiny_grad(const Tiny& p, const std::vector<double>& x, const std::vector<double>& y) {
  Tiny g{0, 0, 0};
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double ta = std::tanh(p.a * x[i]), tb = std::tanh(p.b * x[i]);
    const double r = y[i] - p.v * (ta - tb);
    g.v -= r * (ta - tb);
    g.a -= r * p.v * (1 - ta * ta) * x[i];
    g.b += r * p.v * (1 - tb * tb) * x[i];
  }
  return g;
}

}  // namespace

TEST(Regime, NamesRoundTripAndHeads) {
  for (Regime r : {Regime::mirrored_pgd, Regime::regular_gd, Regime::regular_pgd_ablation})
    EXPECT_EQ(parse_regime(to_string(r)), r);
  EXPECT_THROW(parse_regime("sgd"), Error);
  EXPECT_EQ(regime_head(Regime::mirrored_pgd), Head::paired);
  EXPECT_EQ(regime_head(Regime::regular_gd), Head::plain);
  EXPECT_FALSE(uses_projection(Regime::regular_gd));
  EXPECT_TRUE(uses_projection(Regime::regular_pgd_ablation));
}

TEST(Train, StartAtGlobalMinimumStopsImmediately) {
  const Dataset base = make_synthetic(20, 5, Seed{1});
  const Dataset data = with_targets(base, DenseVector(20, 0.0));
  const Params p0 = mirrored_lecun_init(5, 4, Head::paired, Seed{2});
  TrainConfig c = pgd_config(p0, 1.0, 1e-2, 0.9, 100);
  c.kkt_tol = 1e-10;
  const TrainResult r = train(p0, data, c);
  EXPECT_LE(r.trace.iterations, 1u);
  EXPECT_EQ(r.trace.final_loss, 0.0);
  EXPECT_EQ(r.trace.final_grad_mapping_norm, 0.0);
  EXPECT_EQ(r.trace.stop_reason, StopReason::kkt_tol);
}

TEST(Train, SingleStepMatchesHandOracle) {
  const std::vector<double> x{0.7, -1.2, 0.3}, y{0.5, -0.1, 0.9};
  const Tiny p{0.4, -0.9, 0.35};
  const double lr = 1e-3;
  const Tiny g = tiny_grad(p, x, y);
  const Tiny expect{p.a - lr * g.a, p.b - lr * g.b, std::max(p.v - lr * g.v, 0.001)};

  const Params p0(DenseMatrix{{p.a, p.b}}, DenseVector{p.v}, Head::paired);
  const Dataset data{DenseMatrix{{x[0]}, {x[1]}, {x[2]}}, DenseVector{y[0], y[1], y[2]}, "tiny"};
  const TrainResult r = train(p0, data, pgd_config(p0, 100.0, lr, 0.0, 1));
  ASSERT_EQ(r.trace.iterations, 1u);
  EXPECT_NEAR(r.params.w()(0, 0), expect.a, 1e-12);
  EXPECT_NEAR(r.params.w()(0, 1), expect.b, 1e-12);
  EXPECT_NEAR(r.params.v()[0], expect.v, 1e-12);
}

TEST(Train, MomentumStepsMatchHandOracle) {
  const std::vector<double> x{0.7, -1.2, 0.3}, y{0.5, -0.1, 0.9};
  Tiny p{0.4, -0.9, 0.35}, buf{0, 0, 0};
  const double lr = 5e-2, mu = 0.9;
  for (int step = 0; step < 5; ++step) {
    const Tiny g = tiny_grad(p, x, y);
    buf = {mu * buf.a + g.a, mu * buf.b + g.b, mu * buf.v + g.v};
    p = {p.a - lr * buf.a, p.b - lr * buf.b, std::max(p.v - lr * buf.v, 0.001)};
  }
  const Params p0(DenseMatrix{{0.4, -0.9}}, DenseVector{0.35}, Head::paired);
  const Dataset data{DenseMatrix{{x[0]}, {x[1]}, {x[2]}}, DenseVector{y[0], y[1], y[2]}, "tiny"};
  const TrainResult r = train(p0, data, pgd_config(p0, 100.0, lr, mu, 5));
  EXPECT_NEAR(r.params.w()(0, 0), p.a, 1e-12);
  EXPECT_NEAR(r.params.w()(0, 1), p.b, 1e-12);
  EXPECT_NEAR(r.params.v()[0], p.v, 1e-12);
}

TEST(Train, IteratesStayFeasible) {
  const Dataset data = make_synthetic(30, 6, Seed{3});
  const Params p0 = mirrored_lecun_init(6, 8, Head::paired, Seed{4});
  TrainConfig c = pgd_config(p0, 0.3, 0.1, 0.9, 400);
  c.checkpoint_every = 10;
  const TrainResult r = train(p0, data, c);
  ASSERT_EQ(r.trace.checkpoints.size(), 41u);
  for (const auto& cp : r.trace.checkpoints) EXPECT_TRUE(cp.feasible) << cp.iter;
  EXPECT_TRUE(is_feasible(r.params, *c.constraint).feasible);
  EXPECT_GT(r.trace.proj_w_activations, 0u);
  EXPECT_LT(r.trace.final_loss, r.trace.initial_loss);
}

TEST(Train, UnconstrainedGradientDescentDecreasesLoss) {
  const Dataset data = make_synthetic(30, 6, Seed{5});
  const Params p0 = lecun_init(6, 8, Head::plain, Seed{6});
  TrainConfig c;
  c.regime = Regime::regular_gd;
  c.lr_w = c.lr_v = 5e-3;
  c.max_iters = 500;
  c.track_lambda_min = true;
  const TrainResult r = train(p0, data, c);
  EXPECT_EQ(r.trace.stop_reason, StopReason::max_iters);
  EXPECT_EQ(r.trace.iterations, 500u);
  EXPECT_LT(r.trace.final_loss, 0.5 * r.trace.initial_loss);
  EXPECT_EQ(r.trace.checkpoints.front().iter, 0u);
  EXPECT_EQ(r.trace.checkpoints.back().iter, 500u);
  for (const auto& cp : r.trace.checkpoints) ASSERT_TRUE(cp.lambda_min.has_value());
  EXPECT_EQ(r.trace.proj_w_activations, 0u);
}

TEST(Train, AblationLeavesOuterWeightsFree) {
  const Dataset data = make_synthetic(30, 6, Seed{7});
  const Params p0 = lecun_init(6, 8, Head::plain, Seed{8});
  TrainConfig c;
  c.regime = Regime::regular_pgd_ablation;
  c.lr_w = c.lr_v = 0.05;
  c.max_iters = 50;
  c.track_lambda_min = false;
  ConstraintSpec s;
  s.epsilon = 0.1;
  s.anchor_w0 = p0.w();
  s.constrain_v = false;
  c.constraint = s;
  const TrainResult r = train(p0, data, c);
  bool negative = false;
  for (double e : r.params.v()) negative = negative || e < 0;
  EXPECT_TRUE(negative);
  EXPECT_EQ(r.trace.v_boundary_hits, 0u);
  EXPECT_GT(r.trace.proj_w_activations, 0u);
}

TEST(Train, HugeStepIsNonFinite) {
  const Dataset data = make_synthetic(30, 6, Seed{9});
  const Params p0 = lecun_init(6, 8, Head::plain, Seed{10});
  TrainConfig c;
  c.regime = Regime::regular_gd;
  c.lr_w = c.lr_v = 1e6;
  c.max_iters = 200;
  c.track_lambda_min = false;
  const TrainResult r = train(p0, data, c);
  EXPECT_EQ(r.trace.stop_reason, StopReason::non_finite);
  EXPECT_LT(r.trace.iterations, 200u);
}

TEST(Train, DeterministicBitPattern) {
  const Dataset data = make_synthetic(30, 6, Seed{11});
  const Params p0 = mirrored_lecun_init(6, 8, Head::paired, Seed{12});
  const TrainConfig c = pgd_config(p0, 0.5, 0.05, 0.9, 300);
  const TrainResult a = train(p0, data, c), b = train(p0, data, c);
  EXPECT_EQ(std::bit_cast<std::uint64_t>(a.trace.final_loss), std::bit_cast<std::uint64_t>(b.trace.final_loss));
  EXPECT_EQ(a.params, b.params);
}

TEST(Train, WrongHeadForRegimeRejected) {
  const Dataset data = make_synthetic(10, 3, Seed{13});
  const Params p0 = lecun_init(3, 4, Head::plain, Seed{14});
  TrainConfig c;
  c.regime = Regime::mirrored_pgd;
  EXPECT_THROW(train(p0, data, c), PreconditionError);
}

TEST(TrainConfig, CheckpointDefaultAndValidation) {
  TrainConfig c;
  c.max_iters = 20000;
  EXPECT_EQ(c.effective_checkpoint_every(), 1000u);
  c.max_iters = 5;
  EXPECT_EQ(c.effective_checkpoint_every(), 1u);
  c.lr_w = -1;
  EXPECT_THROW(c.validate(), Error);
}

TEST(Train, MappingNormMostlyDecreasesOnConvergingRun) {
  const Dataset data = make_synthetic(200, 50, Seed{15});
  const Params p0 = mirrored_lecun_init(50, 8, Head::paired, Seed{16});
  TrainConfig c = pgd_config(p0, 1000.0, 0.01, 0.9, 20000);
  c.kkt_tol = 1e-10;
  c.checkpoint_every = 50;
  const TrainResult r = train(p0, data, c);
  EXPECT_EQ(r.trace.stop_reason, StopReason::kkt_tol);
  std::size_t pairs = 0, down = 0;
  for (std::size_t k = 1; k < r.trace.checkpoints.size(); ++k, ++pairs)
    down += r.trace.checkpoints[k].grad_mapping_norm <= r.trace.checkpoints[k - 1].grad_mapping_norm;
  ASSERT_GT(pairs, 3u);
  EXPECT_GE(down, 0.9 * pairs) << down << " of " << pairs;
}

TEST(BestOfGrid, SingletonEqualsTrain) {
  const Dataset data = make_synthetic(20, 4, Seed{17});
  const Params p0 = mirrored_lecun_init(4, 6, Head::paired, Seed{18});
  const TrainConfig c = pgd_config(p0, 0.5, 0.05, 0.9, 100);
  const GridChoice g = best_of_grid(p0, data, c, {0.05}, {0.05});
  const TrainResult r = train(p0, data, c);
  EXPECT_EQ(g.result.params, r.params);
  EXPECT_EQ(g.result.trace.final_loss, r.trace.final_loss);
  EXPECT_EQ(g.finite_runs, 1u);
}

TEST(BestOfGrid, SkipsDivergentStep) {
  const Dataset data = make_synthetic(20, 4, Seed{19});
  const Params p0 = lecun_init(4, 6, Head::plain, Seed{20});
  TrainConfig c;
  c.regime = Regime::regular_gd;
  c.max_iters = 200;
  c.track_lambda_min = false;
  // A huge hidden-layer step only saturates tanh; the outer layer is linear and blows up.
  const GridChoice g = best_of_grid(p0, data, c, {1e-2}, {1e-2, 1e7});
  EXPECT_EQ(g.lr_v, 1e-2);
  EXPECT_EQ(g.finite_runs, 1u);
  EXPECT_NE(g.result.trace.stop_reason, StopReason::non_finite);
  EXPECT_THROW(best_of_grid(p0, data, c, {1e7}, {1e7}), GridError);
}

TEST(BestOfGrid, ChosenIsNoWorseThanAnyCellAndJobsAgree) {
  const Dataset data = make_synthetic(40, 10, Seed{21});
  const Params p0 = mirrored_lecun_init(10, 8, Head::paired, Seed{22});
  const TrainConfig c = pgd_config(p0, 1.0, 1e-3, 0.9, 300);
  const std::vector<double> grid{1e-3, 1e-2, 1e-1};
  const GridChoice serial = best_of_grid(p0, data, c, grid, grid, 1);
  const GridChoice threaded = best_of_grid(p0, data, c, grid, grid, 3);
  EXPECT_EQ(serial.result.params, threaded.result.params);
  EXPECT_EQ(serial.lr_w, threaded.lr_w);
  for (double lw : {1e-3, 1e-1})
    for (double lv : {1e-2}) {
      TrainConfig one = c;
      one.lr_w = lw;
      one.lr_v = lv;
      EXPECT_LE(serial.result.trace.final_loss, train(p0, data, one).trace.final_loss);
    }
}
