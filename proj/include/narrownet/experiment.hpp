#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "narrownet/dataset.hpp"
#include "narrownet/trainer.hpp"

namespace narrownet {

/// One Figure-2 style sweep: widths x epsilons x regimes x seed replicates,
/// each cell trained with best_of_grid over the learning-rate grids.
struct GridSpec {
  std::size_t n = 200;
  std::size_t d = 50;
  std::vector<std::size_t> widths{8, 16, 32, 64};
  std::vector<double> epsilons{0.5, 1.0, 2.0, 1000.0};
  std::vector<Regime> regimes{Regime::mirrored_pgd, Regime::regular_gd,
                              Regime::regular_pgd_ablation};
  std::size_t seeds = 3;
  Seed base_seed{0};
  std::vector<double> lr_grid_w = default_lr_grid();
  std::vector<double> lr_grid_v = default_lr_grid();
  double momentum = 0.9;
  std::size_t max_iters = 20000;
  double kkt_tol = 1e-10;
  double zeta = 0.001;
  double kappa = 1.0;
  Activation activation;

  std::size_t cell_count() const {
    return widths.size() * epsilons.size() * regimes.size() * seeds;
  }
};

/// n=200, d=50, widths {8,16,32,64}, epsilon {0.5,1,2,1000}, all regimes, 3 seeds.
GridSpec desk_preset();
/// n=1000, d=200, widths {20,...,1200}, the full epsilon list, 200000 iterations.
GridSpec paper_preset();

/// Seed of replicate `index`: the dataset is drawn from derive_seed(seed, 0)
/// and the initialization from derive_seed(seed, 1).
Seed replicate_seed(Seed base, std::size_t index);

struct GridRow {
  std::string run_id;
  Regime regime = Regime::mirrored_pgd;
  std::size_t n = 0;
  std::size_t d = 0;
  std::size_t m = 0;
  double epsilon = 0.0;
  double zeta = 0.0;
  double kappa = 0.0;
  std::uint64_t seed = 0;
  double lr_w = 0.0;
  double lr_v = 0.0;
  double momentum = 0.0;
  std::size_t iters = 0;
  StopReason stop_reason = StopReason::max_iters;
  double loss_init = 0.0;
  double loss_final = 0.0;
  double loss_rel = 0.0;
  double lambda_min_final = 0.0;
  double kkt_residual_final = 0.0;
  std::size_t v_boundary_hits = 0;
  std::size_t proj_w_activations = 0;
  /// Not serialized: final params satisfy the regime's constraint.
  bool feasible_final = true;
  /// Not serialized: m >= 2n/d fails for a mirrored cell.
  bool below_width_threshold = false;
};

/// Exact results-CSV header.
inline constexpr const char* kGridCsvHeader =
    "run_id,regime,n,d,m,epsilon,zeta,kappa,seed,lr_w,lr_v,momentum,iters,stop_reason,"
    "loss_init,loss_final,loss_rel,lambda_min_final,kkt_residual_final,v_boundary_hits,"
    "proj_w_activations";

std::string grid_csv_line(const GridRow& row);

struct GridCell {
  Regime regime;
  std::size_t m;
  double epsilon;
  std::size_t replicate;
};

/// Cells in serialization order: regime, width, epsilon, replicate.
std::vector<GridCell> grid_cells(const GridSpec& spec);

/// Trains one cell from an explicit replicate seed (the CSV seed column).
GridRow run_grid_cell_with_seed(const GridSpec& spec, Regime regime, std::size_t m,
                                double epsilon, Seed replicate, std::size_t jobs = 1);

/// Trains one cell. A cell whose whole learning-rate grid diverges yields a
/// non_finite row with NaN losses instead of an exception.
GridRow run_grid_cell(const GridSpec& spec, const GridCell& cell, std::size_t jobs = 1);

struct GridResult {
  std::vector<GridRow> rows;
  std::size_t failed_cells = 0;  ///< rows with stop_reason non_finite
};

/// Runs every cell on up to `jobs` workers. Rows are appended to `csv` (header
/// first) in cell order as soon as all earlier rows are done, and flushed per
/// row, so the file is byte-identical for any job count and a crash leaves a
/// valid prefix. regular_gd ignores epsilon, so its cells share one run per
/// (width, replicate).
GridResult run_figure2_grid(const GridSpec& spec, std::ostream* csv, std::size_t jobs = 1,
                            const std::function<void(const GridRow&)>& on_row = {});

/// Zero-output and rank certificate at mirrored initialization.
struct Theorem1Seed {
  std::uint64_t seed = 0;
  double max_abs_output = 0.0;
  /// Smallest singular value of the square sub-Jacobian; NaN when out of scope.
  double lambda_min_sub = 0.0;
  double lambda_min_full = 0.0;
  double lambda_min_first_half = 0.0;
  /// |full - sqrt(2) * first_half| / (sqrt(2) * first_half).
  double sqrt2_identity_error = 0.0;
  bool pass = false;
};

struct Theorem1Report {
  std::size_t n = 0, d = 0, m = 0;
  ActivationKind activation = ActivationKind::tanh;
  bool in_scope = true;  ///< m d >= 2 n
  std::vector<Theorem1Seed> seeds;
  double min_lambda_sub = 0.0;
  double median_lambda_sub = 0.0;
  double max_abs_output = 0.0;
  std::vector<std::string> warnings;
  bool pass = false;
};

inline constexpr double kZeroOutputTol = 1e-12;
inline constexpr double kRankTol = 1e-10;
inline constexpr double kSqrt2IdentityTol = 1e-9;

/// Per seed: fresh data (unit-norm Gaussian rows) and a paired mirrored init.
/// Odd m raises PreconditionError. Out-of-scope sizes (m d < 2 n) are run and
/// flagged; only the zero-output and sqrt(2) checks apply to them.
Theorem1Report certify_theorem1(std::size_t n, std::size_t d, std::size_t m, std::size_t n_seeds,
                                ActivationKind activation, Seed base = Seed{0});

struct Theorem3Run {
  double epsilon = 0.0;
  std::uint64_t seed = 0;
  GridRow row;
  double epsilon_squared = 0.0;
  bool pass = false;
};

struct Theorem3Options {
  double zeta = 0.001;
  double kappa = 1.0;
  std::size_t max_iters = 20000;
  double kkt_tol = 1e-10;
  double momentum = 0.9;
  double rel_loss_tol = 1e-3;
  double lambda_tol = 1e-8;
  std::vector<double> lr_grid_w = default_lr_grid();
  std::vector<double> lr_grid_v = default_lr_grid();
  Activation activation;
  std::size_t jobs = 1;
};

struct Theorem3Report {
  std::size_t m = 0;
  std::vector<Theorem3Run> runs;
  /// Mean final loss per epsilon is non-increasing as epsilon grows.
  bool loss_trend_ok = false;
  bool pass = false;
};

/// Trains mirrored_pgd (best of the learning-rate grid) for every
/// (epsilon, seed). A run passes when it stopped on kkt_tol or max_iters,
/// reached relative loss <= rel_loss_tol, never hit the v floor, and ended
/// with lambda_min(J) > lambda_tol.
Theorem3Report certify_theorem3(const Dataset& data, std::size_t m,
                                const std::vector<double>& epsilons,
                                const std::vector<std::uint64_t>& seeds,
                                const Theorem3Options& options = {});

}  // namespace narrownet
