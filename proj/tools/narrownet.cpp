// narrownet: train narrow one-hidden-layer networks and certify their landscape.
//
// Exit codes: 0 ok, 1 runtime/I-O failure, 2 invalid configuration,
// 3 training stopped on a non-finite loss, 4 figure2 cells failed,
// 5 a certificate failed, 6 gradient check failed.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "narrownet/config.hpp"
#include "narrownet/experiment.hpp"
#include "narrownet/format.hpp"
#include "narrownet/gradcheck.hpp"
#include "narrownet/objective.hpp"
#include "narrownet/trainer.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace narrownet;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitRuntime = 1;
constexpr int kExitInvalid = 2;
constexpr int kExitNonFinite = 3;
constexpr int kExitGridFailures = 4;
constexpr int kExitCertificate = 5;
constexpr int kExitGradcheck = 6;

struct Common {
  std::string config_path;
  std::string out_dir = "out";
  std::optional<std::uint64_t> seed;
  std::size_t jobs = 1;
};

std::size_t default_jobs() {
  if (const char* env = std::getenv("NARROWNET_JOBS")) {
    try {
      const long long v = std::stoll(env);
      if (v >= 1) return static_cast<std::size_t>(v);
    } catch (const std::exception&) {
    }
  }
  return 1;
}

void add_common(CLI::App* app, Common& c, bool with_config = true) {
  if (with_config) app->add_option("--config", c.config_path, "JSON run configuration");
  app->add_option("--out", c.out_dir, "output directory")->capture_default_str();
  app->add_option("--seed", c.seed, "top-level seed (overrides the config)");
  app->add_option("--jobs", c.jobs, "worker threads (default: $NARROWNET_JOBS or 1)")
      ->check(CLI::PositiveNumber);
}

std::ofstream open_output(const fs::path& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write '" + path.string() + "'");
  return out;
}

void write_json(const fs::path& path, const json& doc) {
  auto out = open_output(path);
  out << doc.dump(2) << '\n';
}

std::string join(const std::vector<double>& values) {
  std::string s;
  for (double v : values) s += (s.empty() ? "" : ",") + format_double(v);
  return s;
}

RunConfig resolve_config(const Common& c) {
  RunConfig config = c.config_path.empty() ? RunConfig{} : load_run_config(c.config_path);
  if (c.seed) {
    config.seed = *c.seed;
    config.grid.base_seed = Seed{*c.seed};
  }
  return config;
}

int cmd_train(const Common& c) {
  const RunConfig config = resolve_config(c);
  const TrainSection& t = config.train;
  const Head head = regime_head(t.regime);
  require_even_width(head, t.m);
  if (regime_is_mirrored(t.regime) && t.m * t.d < 2 * t.n) {
    std::cout << "warning: m = " << t.m << " is below 2n/d = "
              << static_cast<double>(2 * t.n) / static_cast<double>(t.d)
              << "; the full-rank guarantee does not apply\n";
  }
  for (const auto& w : activation_warnings(Activation{t.activation})) std::cout << "warning: " << w << '\n';

  const Seed top{config.seed};
  const Dataset data = make_synthetic(t.n, t.d, derive_seed(top, 0));
  const Params p0 = regime_is_mirrored(t.regime) ? mirrored_lecun_init(t.d, t.m, head, derive_seed(top, 1))
                                                 : lecun_init(t.d, t.m, head, derive_seed(top, 1));
  TrainConfig tc = make_train_config(t, top);
  if (tc.constraint) tc.constraint->anchor_w0 = p0.w();

  fs::create_directories(c.out_dir);
  write_json(fs::path(c.out_dir) / "resolved_config.json", to_json(config));

  const TrainResult result = train(p0, data, tc);
  {
    auto out = open_output(fs::path(c.out_dir) / "trace.csv");
    out << "iter,loss,grad_mapping_norm,lambda_min,feasible\n";
    for (const auto& cp : result.trace.checkpoints) {
      out << cp.iter << ',' << format_double(cp.loss) << ',' << format_double(cp.grad_mapping_norm)
          << ',' << (cp.lambda_min ? format_double(*cp.lambda_min) : "") << ','
          << (cp.feasible ? 1 : 0) << '\n';
    }
  }
  {
    json w = json::array();
    for (std::size_t k = 0; k < result.params.d(); ++k) {
      auto row = result.params.w().row(k);
      w.push_back(std::vector<double>(row.begin(), row.end()));
    }
    json doc{{"head", std::string(to_string(result.params.head()))},
             {"d", result.params.d()},
             {"m", result.params.m()},
             {"w", w},
             {"v", std::vector<double>(result.params.v().begin(), result.params.v().end())}};
    write_json(fs::path(c.out_dir) / "params.json", doc);
  }

  const TrainTrace& tr = result.trace;
  std::cout << to_string(t.regime) << ": " << tr.iterations << " updates, stop " << to_string(tr.stop_reason)
            << ", loss " << format_double(tr.initial_loss) << " -> " << format_double(tr.final_loss)
            << ", gradient mapping " << format_double(tr.final_grad_mapping_norm) << '\n';
  if (tr.stop_reason == StopReason::non_finite) {
    std::cerr << "training diverged (non-finite or exploding loss); lower the step sizes\n";
    return kExitNonFinite;
  }
  return kExitOk;
}

int cmd_figure2(const Common& c, const std::string& preset, bool dry_run) {
  RunConfig config;
  if (!c.config_path.empty()) {
    if (!preset.empty()) throw ConfigError("--preset and --config are mutually exclusive");
    config = load_run_config(c.config_path);
  } else if (preset.empty() || preset == "desk") {
    config.grid = desk_preset();
  } else if (preset == "paper") {
    config.grid = paper_preset();
  } else {
    throw ConfigError("unknown preset '" + preset + "' (expected desk or paper)");
  }
  if (c.seed) config.seed = *c.seed;
  config.grid.base_seed = Seed{config.seed};
  const GridSpec& g = config.grid;

  json resolved{{"schema_version", kConfigSchemaVersion},
                {"seed", config.seed},
                {"preset", preset.empty() && c.config_path.empty() ? "desk" : preset},
                {"grid", to_json(g)}};
  std::cout << "figure2 grid: n=" << g.n << ", d=" << g.d << ", widths " << json(g.widths).dump()
            << ", epsilons " << json(g.epsilons).dump() << ", " << g.regimes.size() << " regimes, "
            << g.seeds << " seeds, " << g.max_iters << " iterations, " << g.cell_count()
            << " cells\n";
  if (dry_run) {
    std::cout << resolved.dump(2) << '\n';
    return kExitOk;
  }

  fs::create_directories(c.out_dir);
  write_json(fs::path(c.out_dir) / "resolved_config.json", resolved);
  auto csv = open_output(fs::path(c.out_dir) / "figure2.csv");
  std::size_t done = 0;
  const GridResult result = run_figure2_grid(g, &csv, c.jobs, [&](const GridRow& row) {
    ++done;
    std::cout << "[" << done << "/" << g.cell_count() << "] " << row.run_id << "  rel loss "
              << format_double(row.loss_rel) << "  lambda_min " << format_double(row.lambda_min_final)
              << (row.below_width_threshold ? "  (m < 2n/d)" : "") << '\n';
  });
  if (result.failed_cells > 0) {
    std::cerr << result.failed_cells << " of " << result.rows.size()
              << " cells diverged at every learning rate\n";
    return kExitGridFailures;
  }
  return kExitOk;
}

struct CertifyFlags {
  int theorem = 1;
  std::optional<std::size_t> n, d, m, seeds, max_iters;
  std::string activation = "tanh";
  std::vector<double> epsilons{0.25, 0.5, 1.0};
};

int certify_one(const Common& c, const CertifyFlags& f) {
  const std::uint64_t top = c.seed.value_or(0);
  const ActivationKind kind = parse_activation(f.activation);
  fs::create_directories(c.out_dir);

  if (f.theorem == 1) {
    const std::size_t n = f.n.value_or(40), d = f.d.value_or(10), m = f.m.value_or(8);
    const std::size_t seeds = f.seeds.value_or(20);
    write_json(fs::path(c.out_dir) / "resolved_config.json",
               json{{"schema_version", kConfigSchemaVersion}, {"command", "certify"}, {"theorem", 1},
                    {"seed", top}, {"n", n}, {"d", d}, {"m", m}, {"seeds", seeds},
                    {"activation", f.activation}});
    const Theorem1Report r = certify_theorem1(n, d, m, seeds, kind, Seed{top});
    auto csv = open_output(fs::path(c.out_dir) / "certify_theorem1.csv");
    csv << "seed,max_abs_output,lambda_min_sub,lambda_min_full,lambda_min_first_half,"
           "sqrt2_identity_error,pass\n";
    for (const auto& s : r.seeds) {
      csv << s.seed << ',' << format_double(s.max_abs_output) << ',' << format_double(s.lambda_min_sub)
          << ',' << format_double(s.lambda_min_full) << ',' << format_double(s.lambda_min_first_half)
          << ',' << format_double(s.sqrt2_identity_error) << ',' << (s.pass ? 1 : 0) << '\n';
    }
    std::cout << "rank certificate at mirrored init: n=" << n << " d=" << d << " m=" << m << " ("
              << to_string(kind) << "), " << seeds << " seeds\n";
    for (const auto& w : r.warnings) std::cout << "warning: " << w << '\n';
    std::cout << "  max |f(x; theta0)|      " << format_double(r.max_abs_output) << "  (tol "
              << format_double(kZeroOutputTol) << ")\n";
    if (r.in_scope) {
      std::cout << "  lambda_min(sub-Jacobian) min " << format_double(r.min_lambda_sub) << ", median "
                << format_double(r.median_lambda_sub) << "  (tol " << format_double(kRankTol) << ")\n";
    }
    std::vector<std::uint64_t> failing;
    for (const auto& s : r.seeds)
      if (!s.pass) failing.push_back(s.seed);
    if (!failing.empty()) {
      std::cout << "FAILED seeds:";
      for (auto s : failing) std::cout << ' ' << s;
      std::cout << '\n';
      return kExitCertificate;
    }
    std::cout << "PASS\n";
    return kExitOk;
  }

  const std::size_t n = f.n.value_or(200), d = f.d.value_or(50), m = f.m.value_or(8);
  const std::size_t seeds = f.seeds.value_or(3);
  Theorem3Options opt;
  opt.max_iters = f.max_iters.value_or(20000);
  opt.activation = Activation{kind};
  opt.jobs = c.jobs;
  const Dataset data = make_synthetic(n, d, derive_seed(replicate_seed(Seed{top}, 0), 0));
  std::vector<std::uint64_t> init_seeds;
  for (std::size_t s = 0; s < seeds; ++s) init_seeds.push_back(derive_seed(Seed{top}, 1000 + s).value);
  write_json(fs::path(c.out_dir) / "resolved_config.json",
             json{{"schema_version", kConfigSchemaVersion}, {"command", "certify"}, {"theorem", 3},
                  {"seed", top}, {"n", n}, {"d", d}, {"m", m}, {"seeds", seeds},
                  {"init_seeds", init_seeds}, {"epsilons", f.epsilons}, {"max_iters", opt.max_iters},
                  {"zeta", opt.zeta}, {"kappa", opt.kappa}, {"kkt_tol", opt.kkt_tol},
                  {"momentum", opt.momentum}, {"lr_grid_w", opt.lr_grid_w}, {"lr_grid_v", opt.lr_grid_v},
                  {"activation", f.activation}});
  const Theorem3Report r = certify_theorem3(data, m, f.epsilons, init_seeds, opt);
  auto csv = open_output(fs::path(c.out_dir) / "certify_theorem3.csv");
  csv << kGridCsvHeader << ",epsilon_squared,pass\n";
  std::cout << "KKT-point certificate: mirrored_pgd, n=" << n << " d=" << d << " m=" << m
            << ", epsilons " << join(f.epsilons) << '\n';
  std::cout << std::left << std::setw(8) << "eps" << std::setw(22) << "seed" << std::setw(14) << "loss"
            << std::setw(14) << "rel loss" << std::setw(14) << "eps^2" << std::setw(14) << "kkt res"
            << std::setw(14) << "lambda_min" << std::setw(8) << "v hits" << "pass\n";
  std::vector<std::uint64_t> failing;
  for (const auto& run : r.runs) {
    csv << grid_csv_line(run.row) << ',' << format_double(run.epsilon_squared) << ','
        << (run.pass ? 1 : 0) << '\n';
    std::cout << std::setw(8) << format_double(run.epsilon) << std::setw(22) << run.seed << std::setw(14)
              << format_double(run.row.loss_final) << std::setw(14) << format_double(run.row.loss_rel)
              << std::setw(14) << format_double(run.epsilon_squared) << std::setw(14)
              << format_double(run.row.kkt_residual_final) << std::setw(14)
              << format_double(run.row.lambda_min_final) << std::setw(8) << run.row.v_boundary_hits
              << (run.pass ? "yes" : "no") << '\n';
    if (!run.pass) failing.push_back(run.seed);
  }
  std::cout << "final loss non-increasing in epsilon: " << (r.loss_trend_ok ? "yes" : "no") << '\n';
  if (!r.pass) {
    std::cout << "FAILED";
    if (!failing.empty()) {
      std::cout << " seeds:";
      for (auto s : failing) std::cout << ' ' << s;
    }
    std::cout << '\n';
    return kExitCertificate;
  }
  std::cout << "PASS\n";
  return kExitOk;
}

int cmd_gradcheck(const Common& c, const std::string& head, const std::string& activation,
                  std::size_t instances, double corrupt) {
  GradcheckOptions opt;
  if (!head.empty()) opt.heads = {parse_head(head)};
  if (!activation.empty()) opt.activations = {parse_activation(activation)};
  opt.instances = instances;
  opt.seed = Seed{c.seed.value_or(0)};
  opt.corrupt_derivative = corrupt;
  fs::create_directories(c.out_dir);
  std::vector<std::string> heads, acts;
  for (Head h : opt.heads) heads.emplace_back(to_string(h));
  for (ActivationKind a : opt.activations) acts.emplace_back(to_string(a));
  write_json(fs::path(c.out_dir) / "resolved_config.json",
             json{{"schema_version", kConfigSchemaVersion}, {"command", "gradcheck"},
                  {"seed", opt.seed.value}, {"heads", heads}, {"activations", acts},
                  {"instances", opt.instances}, {"n", opt.n}, {"d", opt.d}, {"m", opt.m},
                  {"tolerance", opt.tolerance}, {"corrupt_derivative", opt.corrupt_derivative}});

  const GradcheckReport r = run_gradcheck(opt);
  auto csv = open_output(fs::path(c.out_dir) / "gradcheck.csv");
  csv << "head,activation,instance,quantity,row,col,analytic,numeric,rel_error\n";
  for (const auto& e : r.per_case) {
    csv << to_string(e.head) << ',' << to_string(e.activation) << ',' << e.instance << ',' << e.quantity
        << ',' << e.row << ',' << e.col << ',' << format_double(e.analytic) << ','
        << format_double(e.numeric) << ',' << format_double(e.rel_error) << '\n';
    std::cout << std::left << std::setw(8) << to_string(e.head) << std::setw(10) << to_string(e.activation)
              << "max rel error " << format_double(e.rel_error) << '\n';
  }
  std::cout << r.compared << " coordinates compared, worst " << format_double(r.worst.rel_error)
            << " (tolerance " << format_double(opt.tolerance) << ")\n";
  if (!r.pass) {
    const auto& w = r.worst;
    std::cerr << "gradient check FAILED: " << to_string(w.head) << '/' << to_string(w.activation)
              << " instance " << w.instance << ' ' << w.quantity << '(' << w.row << ',' << w.col
              << ") analytic " << format_double(w.analytic) << " vs numeric " << format_double(w.numeric)
              << '\n';
    return kExitGradcheck;
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"narrownet: narrow-network training with mirrored init and projected GD"};
  app.require_subcommand(1);
  Common common;
  common.jobs = default_jobs();

  auto* train_cmd = app.add_subcommand("train", "train one network and write its trace");
  add_common(train_cmd, common);

  std::string preset;
  auto* fig_cmd = app.add_subcommand("figure2", "run the width x epsilon x regime grid");
  add_common(fig_cmd, common);
  fig_cmd->add_option("--preset", preset, "desk or paper");
  bool dry_run = false;
  fig_cmd->add_flag("--dry-run", dry_run, "print the resolved grid and exit");

  CertifyFlags cert;
  auto* cert_cmd = app.add_subcommand("certify", "numerically certify the rank / KKT-point claims");
  add_common(cert_cmd, common, false);
  cert_cmd->add_option("--theorem", cert.theorem, "1 (rank at init) or 3 (KKT points)")
      ->required()
      ->check(CLI::IsMember({1, 3}));
  cert_cmd->add_option("--n", cert.n, "samples");
  cert_cmd->add_option("--d", cert.d, "input dimension");
  cert_cmd->add_option("--m", cert.m, "width (even)");
  cert_cmd->add_option("--seeds", cert.seeds, "seed replicates");
  cert_cmd->add_option("--activation", cert.activation, "tanh, sigmoid or softplus")->capture_default_str();
  cert_cmd->add_option("--epsilons", cert.epsilons, "constraint radii (theorem 3)")->delimiter(',');
  cert_cmd->add_option("--max-iters", cert.max_iters, "iteration budget (theorem 3)");

  std::string gc_head, gc_activation;
  std::size_t gc_instances = 10;
  double gc_corrupt = 0.0;
  auto* gc_cmd = app.add_subcommand("gradcheck", "finite-difference check of gradients and Jacobian");
  add_common(gc_cmd, common, false);
  gc_cmd->add_option("--head", gc_head, "plain or paired (default both)");
  gc_cmd->add_option("--activation", gc_activation, "tanh, sigmoid or softplus (default all)");
  gc_cmd->add_option("--instances", gc_instances, "random instances per case")->capture_default_str();
  gc_cmd->add_option("--corrupt-derivative", gc_corrupt, "test hook: perturb analytic derivatives")
      ->group("");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitInvalid;
  }

  try {
    if (*train_cmd) return cmd_train(common);
    if (*fig_cmd) return cmd_figure2(common, preset, dry_run);
    if (*cert_cmd) return certify_one(common, cert);
    if (*gc_cmd) return cmd_gradcheck(common, gc_head, gc_activation, gc_instances, gc_corrupt);
  } catch (const ConfigError& e) {
    std::cerr << "invalid configuration: " << e.what() << '\n';
    return kExitInvalid;
  } catch (const PreconditionError& e) {
    std::cerr << "invalid configuration: " << e.what() << '\n';
    return kExitInvalid;
  } catch (const DimensionError& e) {
    std::cerr << "invalid configuration: " << e.what() << '\n';
    return kExitInvalid;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
  return kExitOk;
}
