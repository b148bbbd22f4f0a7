#include "narrownet/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "narrownet/error.hpp"
#include "narrownet/format.hpp"
#include "narrownet/objective.hpp"
#include "narrownet/parallel.hpp"

namespace narrownet {

std::string_view to_string(Regime regime) {
  switch (regime) {
    case Regime::mirrored_pgd: return "mirrored_pgd";
    case Regime::regular_gd: return "regular_gd";
    case Regime::regular_pgd_ablation: return "regular_pgd_ablation";
  }
  return "unknown";
}

Regime parse_regime(std::string_view name) {
  if (name == "mirrored_pgd") return Regime::mirrored_pgd;
  if (name == "regular_gd") return Regime::regular_gd;
  if (name == "regular_pgd_ablation") return Regime::regular_pgd_ablation;
  throw PreconditionError("unknown regime '" + std::string(name) +
                          "' (expected mirrored_pgd, regular_gd or regular_pgd_ablation)");
}

bool uses_projection(Regime regime) { return regime != Regime::regular_gd; }

Head regime_head(Regime regime) {
  return regime == Regime::mirrored_pgd ? Head::paired : Head::plain;
}

bool regime_is_mirrored(Regime regime) { return regime == Regime::mirrored_pgd; }

std::string_view to_string(StopReason reason) {
  switch (reason) {
    case StopReason::max_iters: return "max_iters";
    case StopReason::kkt_tol: return "kkt_tol";
    case StopReason::non_finite: return "non_finite";
  }
  return "unknown";
}

void TrainConfig::validate() const {
  if (!(lr_w > 0.0) || !(lr_v > 0.0)) throw PreconditionError("learning rates must be > 0");
  if (!(momentum >= 0.0 && momentum < 1.0)) throw PreconditionError("momentum must lie in [0, 1)");
  if (!(kkt_tol >= 0.0)) throw PreconditionError("kkt_tol must be >= 0");
  if (uses_projection(regime) && !constraint) {
    throw PreconditionError(std::string(to_string(regime)) + " needs a constraint");
  }
  if (!uses_projection(regime) && constraint) {
    throw PreconditionError("regular_gd takes no constraint");
  }
  if (constraint) constraint->validate();
}

std::size_t TrainConfig::effective_checkpoint_every() const {
  if (checkpoint_every > 0) return checkpoint_every;
  return max_iters >= 20 ? max_iters / 20 : 1;
}

namespace {

void check_params_for_regime(const Params& params, const TrainConfig& config) {
  if (params.head() != regime_head(config.regime)) {
    throw PreconditionError(std::string(to_string(config.regime)) + " trains the " +
                            std::string(to_string(regime_head(config.regime))) + " head, got " +
                            std::string(to_string(params.head())));
  }
  if (config.constraint) {
    const auto& a = config.constraint->anchor_w0;
    if (a.rows() != params.d() || a.cols() != params.m()) {
      throw DimensionError("constraint anchor is " + a.shape() + " but hidden weights are " +
                           params.w().shape());
    }
  }
}

bool finite_gradients(const Gradients& g) {
  return all_finite(g.grad_w.data()) && all_finite(g.grad_v.data());
}

}  // namespace

TrainResult train(const Params& params0, const Dataset& data, const TrainConfig& config) {
  config.validate();
  check_params_for_regime(params0, config);
  if (data.d() != params0.d()) {
    throw DimensionError("train: inputs are " + data.x.shape() + " but hidden weights are " +
                         params0.w().shape());
  }

  TrainResult result{params0, {}};
  Params& params = result.params;
  TrainTrace& trace = result.trace;
  const std::optional<ConstraintSpec>& spec = config.constraint;

  if (config.regime == Regime::mirrored_pgd && spec && spec->constrain_v) {
    ProjectionEvent event;
    params.mutable_v() = project_v(params.v(), *spec, &event);
    trace.initial_v_projection = event.v_floor_active || event.v_ratio_active;
  }

  LossEvaluator evaluator(data, config.activation, params.m(), params.head());
  Gradients g;
  DenseMatrix buf_w(params.d(), params.m());
  DenseVector buf_v(params.v().size());
  const std::size_t every = config.effective_checkpoint_every();
  const double mu = config.momentum;

  auto record = [&](std::size_t iter, double loss_value, double mapping) {
    Checkpoint cp;
    cp.iter = iter;
    cp.loss = loss_value;
    cp.grad_mapping_norm = mapping;
    if (config.track_lambda_min) {
      cp.lambda_min = min_singular_value(jacobian_w(params, config.activation, data.x));
    }
    cp.feasible = spec ? is_feasible(params, *spec).feasible : true;
    trace.checkpoints.push_back(cp);
  };

  for (std::size_t iter = 0;; ++iter) {
    const double loss_value = evaluator.evaluate(params, &g);
    if (iter == 0) trace.initial_loss = loss_value;
    const double limit = config.divergence_factor * std::max(1.0, trace.initial_loss);
    if (!std::isfinite(loss_value) || !finite_gradients(g) || loss_value > limit) {
      trace.stop_reason = StopReason::non_finite;
      trace.final_loss = loss_value;
      trace.final_grad_mapping_norm = std::numeric_limits<double>::quiet_NaN();
      trace.iterations = iter;
      break;
    }
    const double mapping = gradient_mapping_norm(params, g.grad_w, g.grad_v, spec, config.lr_w);
    const bool converged = mapping <= config.kkt_tol;
    const bool exhausted = iter >= config.max_iters;
    if (converged || exhausted || iter % every == 0) record(iter, loss_value, mapping);
    if (converged || exhausted) {
      trace.stop_reason = converged ? StopReason::kkt_tol : StopReason::max_iters;
      trace.final_loss = loss_value;
      trace.final_grad_mapping_norm = mapping;
      trace.iterations = iter;
      break;
    }

    auto v = params.mutable_v().data();
    for (std::size_t j = 0; j < v.size(); ++j) {
      buf_v[j] = mu * buf_v[j] + g.grad_v[j];
      v[j] -= config.lr_v * buf_v[j];
    }
    auto w = params.mutable_w().data();
    auto gw = g.grad_w.data();
    auto bw = buf_w.data();
    for (std::size_t i = 0; i < w.size(); ++i) {
      bw[i] = mu * bw[i] + gw[i];
      w[i] -= config.lr_w * bw[i];
    }
    if (spec) {
      ProjectionEvent event;
      if (spec->constrain_v) params.mutable_v() = project_v(params.v(), *spec, &event);
      bool moved = false;
      params.mutable_w() = project_w(params.w(), *spec, &moved);
      if (moved) ++trace.proj_w_activations;
      if (event.v_floor_active) ++trace.v_boundary_hits;
      if (event.v_ratio_active) ++trace.v_ratio_clamps;
    }
  }
  return result;
}

std::vector<double> default_lr_grid() { return {1e-4, 1e-3, 5e-3, 1e-2, 5e-2, 1e-1, 5e-1}; }

namespace {

bool better(const GridChoice& a, const GridChoice& b) {
  if (a.result.trace.final_loss != b.result.trace.final_loss)
    return a.result.trace.final_loss < b.result.trace.final_loss;
  if (a.result.trace.final_grad_mapping_norm != b.result.trace.final_grad_mapping_norm)
    return a.result.trace.final_grad_mapping_norm < b.result.trace.final_grad_mapping_norm;
  if (a.lr_w != b.lr_w) return a.lr_w < b.lr_w;
  return a.lr_v < b.lr_v;
}

}  // namespace

GridChoice best_of_grid(const Params& params0, const Dataset& data, const TrainConfig& base,
                        const std::vector<double>& lr_grid_w,
                        const std::vector<double>& lr_grid_v, std::size_t jobs) {
  if (lr_grid_w.empty() || lr_grid_v.empty()) {
    throw PreconditionError("best_of_grid: learning-rate grids must be nonempty");
  }
  const std::size_t cells = lr_grid_w.size() * lr_grid_v.size();
  std::vector<std::optional<GridChoice>> runs(cells);
  parallel_for(cells, jobs, [&](std::size_t idx) {
    TrainConfig config = base;
    config.lr_w = lr_grid_w[idx / lr_grid_v.size()];
    config.lr_v = lr_grid_v[idx % lr_grid_v.size()];
    runs[idx] = GridChoice{train(params0, data, config), config.lr_w, config.lr_v, 0};
  });

  std::optional<GridChoice> best;
  std::size_t finite = 0;
  for (auto& run : runs) {
    if (run->result.trace.stop_reason == StopReason::non_finite) continue;
    ++finite;
    if (!best || better(*run, *best)) best = std::move(*run);
  }
  if (!best) {
    std::string grid = "lr_w {";
    for (double lr : lr_grid_w) grid += " " + format_double(lr);
    grid += " } x lr_v {";
    for (double lr : lr_grid_v) grid += " " + format_double(lr);
    grid += " }";
    throw GridError("best_of_grid: every run diverged over " + grid);
  }
  best->finite_runs = finite;
  return std::move(*best);
}

}  // namespace narrownet
