#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string_view>
#include <vector>

#include "narrownet/constraints.hpp"
#include "narrownet/dataset.hpp"
#include "narrownet/init.hpp"
#include "narrownet/model.hpp"

namespace narrownet {

enum class Regime {
  mirrored_pgd,          ///< paired head, mirrored init, projected w and v
  regular_gd,            ///< plain head, LeCun init, no projection
  regular_pgd_ablation,  ///< plain head, LeCun init, hidden weights projected
};

std::string_view to_string(Regime regime);
Regime parse_regime(std::string_view name);

/// Whether a regime projects onto a constraint set.
bool uses_projection(Regime regime);
/// Head and initialization a regime trains.
Head regime_head(Regime regime);
bool regime_is_mirrored(Regime regime);

struct TrainConfig {
  Regime regime = Regime::mirrored_pgd;
  Activation activation;
  double lr_w = 1e-3;
  double lr_v = 1e-3;
  double momentum = 0.9;
  std::size_t max_iters = 20000;
  double kkt_tol = 1e-10;
  /// 0 picks max_iters / 20.
  std::size_t checkpoint_every = 0;
  /// Compute the Jacobian's smallest singular value at checkpoints.
  bool track_lambda_min = true;
  /// A loss above this multiple of max(1, initial loss) counts as divergence.
  double divergence_factor = 1e8;
  Seed seed;
  std::optional<ConstraintSpec> constraint;

  /// Throws PreconditionError for inconsistent settings.
  void validate() const;
  std::size_t effective_checkpoint_every() const;
};

enum class StopReason { max_iters, kkt_tol, non_finite };

std::string_view to_string(StopReason reason);

struct Checkpoint {
  std::size_t iter = 0;
  double loss = 0.0;
  double grad_mapping_norm = 0.0;
  std::optional<double> lambda_min;
  bool feasible = true;
};

struct TrainTrace {
  std::vector<Checkpoint> checkpoints;
  StopReason stop_reason = StopReason::max_iters;
  /// Parameter updates performed.
  std::size_t iterations = 0;
  double initial_loss = 0.0;
  double final_loss = 0.0;
  double final_grad_mapping_norm = 0.0;
  /// Updates after which project_w moved w.
  std::size_t proj_w_activations = 0;
  /// Updates after which the v floor clamp engaged (the boundary v >= zeta).
  std::size_t v_boundary_hits = 0;
  /// Updates after which the v ratio clamp engaged.
  std::size_t v_ratio_clamps = 0;
  /// Whether the one-time projection before the first update changed v.
  bool initial_v_projection = false;
};

struct TrainResult {
  Params params;
  TrainTrace trace;
};

/// Full-batch (projected) gradient descent with heavy-ball momentum.
///
/// Per update: b <- momentum * b + grad, theta <- theta - lr * b, v before w,
/// each followed by its projection in projecting regimes. Momentum buffers
/// hold raw gradients and are never projected. mirrored_pgd projects v once
/// before the first update. Stops when the gradient-mapping norm (probe step
/// lr_w) is <= kkt_tol, after max_iters updates, or on a non-finite or
/// divergent loss.
TrainResult train(const Params& params0, const Dataset& data, const TrainConfig& config);

/// Paper learning-rate grid for both step sizes.
std::vector<double> default_lr_grid();

struct GridChoice {
  TrainResult result;
  double lr_w = 0.0;
  double lr_v = 0.0;
  std::size_t finite_runs = 0;
};

/// Trains one run per (lr_w, lr_v) pair from the same params0 and keeps the
/// smallest final loss; ties go to the smaller gradient-mapping norm, then the
/// smaller lr_w, then the smaller lr_v. Runs diverging or going non-finite are
/// never chosen; if all do, GridError lists the grid. `jobs` bounds the
/// worker threads; the choice does not depend on it.
GridChoice best_of_grid(const Params& params0, const Dataset& data, const TrainConfig& base,
                        const std::vector<double>& lr_grid_w,
                        const std::vector<double>& lr_grid_v, std::size_t jobs = 1);

}  // namespace narrownet
