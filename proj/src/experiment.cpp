#include "narrownet/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <mutex>
#include <ostream>
#include <sstream>

#include "narrownet/error.hpp"
#include "narrownet/format.hpp"
#include "narrownet/objective.hpp"
#include "narrownet/parallel.hpp"

namespace narrownet {

GridSpec desk_preset() { return GridSpec{}; }

GridSpec paper_preset() {
  GridSpec spec;
  spec.n = 1000;
  spec.d = 200;
  spec.widths = {20, 40, 80, 100, 200, 400, 800, 1000, 1200};
  spec.epsilons = {0.1, 0.2, 0.4, 0.8, 1.0, 2.0, 4.0, 8.0, 10.0, 1000.0};
  spec.max_iters = 200000;
  return spec;
}

Seed replicate_seed(Seed base, std::size_t index) { return derive_seed(base, index); }

std::string grid_csv_line(const GridRow& r) {
  std::ostringstream out;
  out << r.run_id << ',' << to_string(r.regime) << ',' << r.n << ',' << r.d << ',' << r.m << ','
      << format_double(r.epsilon) << ',' << format_double(r.zeta) << ','
      << format_double(r.kappa) << ',' << r.seed << ',' << format_double(r.lr_w) << ','
      << format_double(r.lr_v) << ',' << format_double(r.momentum) << ',' << r.iters << ','
      << to_string(r.stop_reason) << ',' << format_double(r.loss_init) << ','
      << format_double(r.loss_final) << ',' << format_double(r.loss_rel) << ','
      << format_double(r.lambda_min_final) << ',' << format_double(r.kkt_residual_final) << ','
      << r.v_boundary_hits << ',' << r.proj_w_activations;
  return out.str();
}

std::vector<GridCell> grid_cells(const GridSpec& spec) {
  std::vector<GridCell> cells;
  cells.reserve(spec.cell_count());
  for (Regime regime : spec.regimes)
    for (std::size_t m : spec.widths)
      for (double eps : spec.epsilons)
        for (std::size_t rep = 0; rep < spec.seeds; ++rep) cells.push_back({regime, m, eps, rep});
  return cells;
}

namespace {

std::string run_id(Regime regime, std::size_t m, double eps, std::uint64_t seed) {
  return std::string(to_string(regime)) + "-m" + std::to_string(m) + "-eps" +
         format_double(eps) + "-s" + std::to_string(seed);
}

TrainConfig cell_config(const GridSpec& spec, Regime regime, double epsilon, const Params& p0,
                        Seed seed) {
  TrainConfig config;
  config.regime = regime;
  config.activation = spec.activation;
  config.momentum = spec.momentum;
  config.max_iters = spec.max_iters;
  config.kkt_tol = spec.kkt_tol;
  config.track_lambda_min = false;
  config.seed = seed;
  if (uses_projection(regime)) {
    ConstraintSpec c;
    c.epsilon = epsilon;
    c.zeta = spec.zeta;
    c.kappa = spec.kappa;
    c.anchor_w0 = p0.w();
    c.constrain_v = regime == Regime::mirrored_pgd;
    config.constraint = std::move(c);
  }
  return config;
}

}  // namespace

GridRow run_grid_cell_with_seed(const GridSpec& spec, Regime regime, std::size_t m,
                                double epsilon, Seed replicate, std::size_t jobs) {
  const Dataset data = make_synthetic(spec.n, spec.d, derive_seed(replicate, 0));
  const Head head = regime_head(regime);
  const Seed init_seed = derive_seed(replicate, 1);
  const Params p0 = regime_is_mirrored(regime) ? mirrored_lecun_init(spec.d, m, head, init_seed)
                                               : lecun_init(spec.d, m, head, init_seed);
  const TrainConfig config = cell_config(spec, regime, epsilon, p0, replicate);

  GridRow row;
  row.run_id = run_id(regime, m, epsilon, replicate.value);
  row.regime = regime;
  row.n = spec.n;
  row.d = spec.d;
  row.m = m;
  row.epsilon = epsilon;
  row.zeta = regime == Regime::mirrored_pgd ? spec.zeta : 0.0;
  row.kappa = regime == Regime::mirrored_pgd ? spec.kappa : ConstraintSpec::unbounded;
  row.seed = replicate.value;
  row.momentum = spec.momentum;
  row.below_width_threshold = regime_is_mirrored(regime) && m * spec.d < 2 * spec.n;

  constexpr double nan = std::numeric_limits<double>::quiet_NaN();
  try {
    GridChoice best = best_of_grid(p0, data, config, spec.lr_grid_w, spec.lr_grid_v, jobs);
    const TrainTrace& trace = best.result.trace;
    row.lr_w = best.lr_w;
    row.lr_v = best.lr_v;
    row.iters = trace.iterations;
    row.stop_reason = trace.stop_reason;
    row.loss_init = trace.initial_loss;
    row.loss_final = trace.final_loss;
    row.loss_rel = trace.initial_loss > 0.0 ? trace.final_loss / trace.initial_loss : 0.0;
    row.lambda_min_final =
        min_singular_value(jacobian_w(best.result.params, spec.activation, data.x));
    row.kkt_residual_final = trace.final_grad_mapping_norm;
    row.v_boundary_hits = trace.v_boundary_hits;
    row.proj_w_activations = trace.proj_w_activations;
    row.feasible_final = config.constraint
                             ? is_feasible(best.result.params, *config.constraint).feasible
                             : true;
  } catch (const GridError&) {
    row.stop_reason = StopReason::non_finite;
    row.loss_init = loss(p0, spec.activation, data);
    row.loss_final = nan;
    row.loss_rel = nan;
    row.lambda_min_final = nan;
    row.kkt_residual_final = nan;
    row.feasible_final = false;
  }
  return row;
}

GridRow run_grid_cell(const GridSpec& spec, const GridCell& cell, std::size_t jobs) {
  return run_grid_cell_with_seed(spec, cell.regime, cell.m, cell.epsilon,
                                 replicate_seed(spec.base_seed, cell.replicate), jobs);
}

GridResult run_figure2_grid(const GridSpec& spec, std::ostream* csv, std::size_t jobs,
                            const std::function<void(const GridRow&)>& on_row) {
  const std::vector<GridCell> cells = grid_cells(spec);

  // regular_gd never reads epsilon: one task per (width, replicate).
  std::vector<std::size_t> task_of_cell(cells.size());
  std::vector<std::size_t> task_cell;
  std::map<std::pair<std::size_t, std::size_t>, std::size_t> regular_task;
  for (std::size_t c = 0; c < cells.size(); ++c) {
    const GridCell& cell = cells[c];
    if (cell.regime == Regime::regular_gd) {
      auto key = std::make_pair(cell.m, cell.replicate);
      auto it = regular_task.find(key);
      if (it != regular_task.end()) {
        task_of_cell[c] = it->second;
        continue;
      }
      regular_task.emplace(key, task_cell.size());
    }
    task_of_cell[c] = task_cell.size();
    task_cell.push_back(c);
  }

  std::vector<std::optional<GridRow>> task_rows(task_cell.size());
  GridResult result;
  result.rows.reserve(cells.size());
  std::mutex commit_mutex;
  std::size_t committed = 0;

  if (csv != nullptr) {
    *csv << kGridCsvHeader << '\n';
    csv->flush();
  }

  auto commit_ready = [&] {
    while (committed < cells.size() && task_rows[task_of_cell[committed]]) {
      GridRow row = *task_rows[task_of_cell[committed]];
      const GridCell& cell = cells[committed];
      row.epsilon = cell.epsilon;
      row.run_id = run_id(cell.regime, cell.m, cell.epsilon, row.seed);
      if (row.stop_reason == StopReason::non_finite) ++result.failed_cells;
      if (csv != nullptr) {
        *csv << grid_csv_line(row) << '\n';
        csv->flush();
        if (!*csv) throw Error("run_figure2_grid: failed writing results CSV");
      }
      if (on_row) on_row(row);
      result.rows.push_back(std::move(row));
      ++committed;
    }
  };

  parallel_for(task_cell.size(), jobs, [&](std::size_t t) {
    GridRow row = run_grid_cell(spec, cells[task_cell[t]], 1);
    std::lock_guard lock(commit_mutex);
    task_rows[t] = std::move(row);
    commit_ready();
  });
  return result;
}

namespace {

double median(std::vector<double> values) {
  if (values.empty()) return std::numeric_limits<double>::quiet_NaN();
  std::sort(values.begin(), values.end());
  const std::size_t mid = values.size() / 2;
  return values.size() % 2 == 1 ? values[mid] : 0.5 * (values[mid - 1] + values[mid]);
}

}  // namespace

Theorem1Report certify_theorem1(std::size_t n, std::size_t d, std::size_t m, std::size_t n_seeds,
                                ActivationKind activation, Seed base) {
  require_even_width(Head::paired, m);
  Theorem1Report report;
  report.n = n;
  report.d = d;
  report.m = m;
  report.activation = activation;
  report.in_scope = m * d >= 2 * n;
  const Activation act{activation};
  report.warnings = activation_warnings(act);
  if (!report.in_scope) {
    report.warnings.push_back("outside Theorem 1 scope: m d = " + std::to_string(m * d) +
                              " < 2 n = " + std::to_string(2 * n) +
                              "; the rank certificate is skipped");
  }

  std::vector<double> subs;
  report.pass = true;
  for (std::size_t s = 0; s < n_seeds; ++s) {
    const Seed rep = replicate_seed(base, s);
    const Dataset data = make_synthetic(n, d, derive_seed(rep, 0));
    const Params p = mirrored_lecun_init(d, m, Head::paired, derive_seed(rep, 1));

    Theorem1Seed out;
    out.seed = rep.value;
    for (double f : forward(p, act, data.x)) out.max_abs_output = std::max(out.max_abs_output, std::abs(f));
    const DenseMatrix jac = jacobian_w(p, act, data.x);
    out.lambda_min_full = min_singular_value(jac);
    out.lambda_min_first_half = min_singular_value(first_half_blocks(jac, d, m));
    const double expected = std::sqrt(2.0) * out.lambda_min_first_half;
    // A numerically singular J has no meaningful relative error; compare
    // absolutely against the rank tolerance instead.
    const bool singular = expected <= kRankTol;
    out.sqrt2_identity_error = singular ? std::abs(out.lambda_min_full - expected)
                                        : std::abs(out.lambda_min_full - expected) / expected;
    out.pass = out.max_abs_output <= kZeroOutputTol;
    if (report.in_scope) {
      out.pass = out.pass && out.sqrt2_identity_error <= (singular ? kRankTol : kSqrt2IdentityTol);
      out.lambda_min_sub = min_singular_value(square_sub_jacobian(p, act, data.x));
      subs.push_back(out.lambda_min_sub);
      out.pass = out.pass && out.lambda_min_sub > kRankTol;
    } else {
      out.lambda_min_sub = std::numeric_limits<double>::quiet_NaN();
    }
    report.max_abs_output = std::max(report.max_abs_output, out.max_abs_output);
    report.pass = report.pass && out.pass;
    report.seeds.push_back(out);
  }
  if (!subs.empty()) {
    report.min_lambda_sub = *std::min_element(subs.begin(), subs.end());
    report.median_lambda_sub = median(subs);
  } else {
    report.min_lambda_sub = report.median_lambda_sub = std::numeric_limits<double>::quiet_NaN();
  }
  return report;
}

Theorem3Report certify_theorem3(const Dataset& data, std::size_t m,
                                const std::vector<double>& epsilons,
                                const std::vector<std::uint64_t>& seeds,
                                const Theorem3Options& options) {
  require_even_width(Head::paired, m);
  Theorem3Report report;
  report.m = m;
  GridSpec spec;
  spec.n = data.n();
  spec.d = data.d();
  spec.zeta = options.zeta;
  spec.kappa = options.kappa;
  spec.max_iters = options.max_iters;
  spec.kkt_tol = options.kkt_tol;
  spec.momentum = options.momentum;
  spec.activation = options.activation;

  report.pass = true;
  for (double eps : epsilons) {
    for (std::uint64_t seed : seeds) {
      const Params p0 = mirrored_lecun_init(data.d(), m, Head::paired, Seed{seed});
      const TrainConfig config = cell_config(spec, Regime::mirrored_pgd, eps, p0, Seed{seed});

      Theorem3Run run;
      run.epsilon = eps;
      run.seed = seed;
      run.epsilon_squared = eps * eps;
      GridRow& row = run.row;
      row.run_id = run_id(Regime::mirrored_pgd, m, eps, seed);
      row.regime = Regime::mirrored_pgd;
      row.n = data.n();
      row.d = data.d();
      row.m = m;
      row.epsilon = eps;
      row.zeta = options.zeta;
      row.kappa = options.kappa;
      row.seed = seed;
      row.momentum = options.momentum;
      try {
        GridChoice best = best_of_grid(p0, data, config, options.lr_grid_w, options.lr_grid_v,
                                       options.jobs);
        const TrainTrace& trace = best.result.trace;
        row.lr_w = best.lr_w;
        row.lr_v = best.lr_v;
        row.iters = trace.iterations;
        row.stop_reason = trace.stop_reason;
        row.loss_init = trace.initial_loss;
        row.loss_final = trace.final_loss;
        row.loss_rel = trace.initial_loss > 0.0 ? trace.final_loss / trace.initial_loss : 0.0;
        row.lambda_min_final =
            min_singular_value(jacobian_w(best.result.params, options.activation, data.x));
        row.kkt_residual_final = trace.final_grad_mapping_norm;
        row.v_boundary_hits = trace.v_boundary_hits;
        row.proj_w_activations = trace.proj_w_activations;
        row.feasible_final = is_feasible(best.result.params, *config.constraint).feasible;
        const bool stopped_ok =
            trace.stop_reason == StopReason::max_iters ||
            (trace.stop_reason == StopReason::kkt_tol && trace.final_grad_mapping_norm <= options.kkt_tol);
        run.pass = stopped_ok && row.loss_rel <= options.rel_loss_tol && row.v_boundary_hits == 0 &&
                   row.lambda_min_final > options.lambda_tol;
      } catch (const GridError&) {
        row.stop_reason = StopReason::non_finite;
        row.loss_final = row.loss_rel = std::numeric_limits<double>::quiet_NaN();
        run.pass = false;
      }
      report.pass = report.pass && run.pass;
      report.runs.push_back(std::move(run));
    }
  }

  std::vector<double> sorted = epsilons;
  std::sort(sorted.begin(), sorted.end());
  std::vector<double> mean_loss;
  for (double eps : sorted) {
    double sum = 0.0;
    std::size_t count = 0;
    for (const auto& run : report.runs) {
      if (run.epsilon == eps) {
        sum += run.row.loss_final;
        ++count;
      }
    }
    mean_loss.push_back(count ? sum / static_cast<double>(count) : 0.0);
  }
  report.loss_trend_ok = true;
  for (std::size_t k = 1; k < mean_loss.size(); ++k) {
    const double prev = mean_loss[k - 1];
    if (!(mean_loss[k] <= prev + 1e-12 * std::max(1.0, std::abs(prev)))) report.loss_trend_ok = false;
  }
  report.pass = report.pass && report.loss_trend_ok;
  return report;
}

}  // namespace narrownet
