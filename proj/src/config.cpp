#include "narrownet/config.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

namespace narrownet {

using nlohmann::json;

namespace {

void reject_unknown(const json& obj, const std::string& where, const std::set<std::string>& known) {
  if (!obj.is_object()) throw ConfigError(where + ": expected an object");
  for (const auto& item : obj.items()) {
    if (!known.contains(item.key())) {
      throw ConfigError("unknown key '" + (where.empty() ? "" : where + ".") + item.key() + "'");
    }
  }
}

template <typename T>
void read(const json& obj, const std::string& where, const char* key, T& out) {
  if (!obj.contains(key)) return;
  try {
    out = obj.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(where + "." + key + ": " + e.what());
  }
}

void read_count(const json& obj, const std::string& where, const char* key, std::size_t& out) {
  if (!obj.contains(key)) return;
  const json& v = obj.at(key);
  if (!v.is_number_integer() || v.get<long long>() < 0) {
    throw ConfigError(where + "." + key + ": expected a non-negative integer");
  }
  out = v.get<std::size_t>();
}

template <typename Parse, typename T>
void read_enum(const json& obj, const std::string& where, const char* key, Parse parse, T& out) {
  if (!obj.contains(key)) return;
  try {
    out = parse(obj.at(key).get<std::string>());
  } catch (const std::exception& e) {
    throw ConfigError(where + "." + key + ": " + e.what());
  }
}

TrainSection parse_train(const json& obj) {
  const std::string where = "train";
  reject_unknown(obj, where,
                 {"n", "d", "m", "activation", "regime", "lr_w", "lr_v", "momentum", "max_iters",
                  "kkt_tol", "checkpoint_every", "track_lambda_min", "divergence_factor",
                  "constraint"});
  TrainSection t;
  read_count(obj, where, "n", t.n);
  read_count(obj, where, "d", t.d);
  read_count(obj, where, "m", t.m);
  read_enum(obj, where, "activation", parse_activation, t.activation);
  read_enum(obj, where, "regime", parse_regime, t.regime);
  read(obj, where, "lr_w", t.lr_w);
  read(obj, where, "lr_v", t.lr_v);
  read(obj, where, "momentum", t.momentum);
  read_count(obj, where, "max_iters", t.max_iters);
  read(obj, where, "kkt_tol", t.kkt_tol);
  read_count(obj, where, "checkpoint_every", t.checkpoint_every);
  read(obj, where, "track_lambda_min", t.track_lambda_min);
  read(obj, where, "divergence_factor", t.divergence_factor);
  if (obj.contains("constraint")) {
    const json& c = obj.at("constraint");
    reject_unknown(c, "train.constraint", {"epsilon", "zeta", "kappa"});
    read(c, "train.constraint", "epsilon", t.epsilon);
    read(c, "train.constraint", "zeta", t.zeta);
    if (c.contains("kappa") && c.at("kappa").is_string() &&
        c.at("kappa").get<std::string>() == "unbounded") {
      t.kappa = ConstraintSpec::unbounded;
    } else {
      read(c, "train.constraint", "kappa", t.kappa);
    }
  }
  return t;
}

GridSpec parse_grid(const json& obj) {
  const std::string where = "grid";
  reject_unknown(obj, where,
                 {"n", "d", "widths", "epsilons", "regimes", "seeds", "lr_grid_w", "lr_grid_v",
                  "momentum", "max_iters", "kkt_tol", "zeta", "kappa", "activation"});
  GridSpec g = desk_preset();
  read_count(obj, where, "n", g.n);
  read_count(obj, where, "d", g.d);
  read(obj, where, "widths", g.widths);
  read(obj, where, "epsilons", g.epsilons);
  if (obj.contains("regimes")) {
    g.regimes.clear();
    std::vector<std::string> names;
    read(obj, where, "regimes", names);
    for (const auto& name : names) {
      try {
        g.regimes.push_back(parse_regime(name));
      } catch (const std::exception& e) {
        throw ConfigError(where + ".regimes: " + e.what());
      }
    }
  }
  read_count(obj, where, "seeds", g.seeds);
  read(obj, where, "lr_grid_w", g.lr_grid_w);
  read(obj, where, "lr_grid_v", g.lr_grid_v);
  read(obj, where, "momentum", g.momentum);
  read_count(obj, where, "max_iters", g.max_iters);
  read(obj, where, "kkt_tol", g.kkt_tol);
  read(obj, where, "zeta", g.zeta);
  read(obj, where, "kappa", g.kappa);
  ActivationKind kind = g.activation.kind;
  read_enum(obj, where, "activation", parse_activation, kind);
  g.activation = Activation{kind};
  return g;
}

void validate(const RunConfig& c) {
  if (c.schema_version != kConfigSchemaVersion) {
    throw ConfigError("schema_version " + std::to_string(c.schema_version) +
                      " is not supported (expected " + std::to_string(kConfigSchemaVersion) + ")");
  }
  const TrainSection& t = c.train;
  if (t.n == 0 || t.d == 0 || t.m == 0) throw ConfigError("train: n, d and m must be >= 1");
  if (!(t.lr_w > 0.0) || !(t.lr_v > 0.0)) throw ConfigError("train: learning rates must be > 0");
  if (!(t.momentum >= 0.0 && t.momentum < 1.0)) throw ConfigError("train.momentum must lie in [0, 1)");
  if (!(t.epsilon > 0.0)) throw ConfigError("train.constraint.epsilon must be > 0");
  if (!(t.zeta > 0.0)) throw ConfigError("train.constraint.zeta must be > 0");
  if (!(t.kappa >= 1.0)) throw ConfigError("train.constraint.kappa must be >= 1");
  const GridSpec& g = c.grid;
  if (g.widths.empty() || g.epsilons.empty() || g.regimes.empty() || g.seeds == 0) {
    throw ConfigError("grid: widths, epsilons, regimes and seeds must be nonempty");
  }
  if (g.lr_grid_w.empty() || g.lr_grid_v.empty()) throw ConfigError("grid: learning-rate grids must be nonempty");
  for (double lr : g.lr_grid_w)
    if (!(lr > 0.0)) throw ConfigError("grid.lr_grid_w: learning rates must be > 0");
  for (double lr : g.lr_grid_v)
    if (!(lr > 0.0)) throw ConfigError("grid.lr_grid_v: learning rates must be > 0");
  for (double eps : g.epsilons)
    if (!(eps > 0.0)) throw ConfigError("grid.epsilons: values must be > 0");
}

}  // namespace

RunConfig parse_run_config(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    // nlohmann reports "at line L, column C" for syntax errors.
    throw ConfigError(std::string("config parse error: ") + e.what());
  }
  reject_unknown(doc, "", {"schema_version", "seed", "train", "grid"});
  RunConfig c;
  read(doc, "config", "schema_version", c.schema_version);
  read(doc, "config", "seed", c.seed);
  if (doc.contains("train")) c.train = parse_train(doc.at("train"));
  if (doc.contains("grid")) c.grid = parse_grid(doc.at("grid"));
  c.grid.base_seed = Seed{c.seed};
  validate(c);
  return c;
}

RunConfig load_run_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_run_config(buf.str());
}

namespace {

json number_or_unbounded(double x) {
  if (std::isinf(x)) return "unbounded";
  return x;
}

}  // namespace

json to_json(const TrainSection& t) {
  return json{{"n", t.n},
              {"d", t.d},
              {"m", t.m},
              {"activation", std::string(to_string(t.activation))},
              {"regime", std::string(to_string(t.regime))},
              {"lr_w", t.lr_w},
              {"lr_v", t.lr_v},
              {"momentum", t.momentum},
              {"max_iters", t.max_iters},
              {"kkt_tol", t.kkt_tol},
              {"checkpoint_every", t.checkpoint_every},
              {"track_lambda_min", t.track_lambda_min},
              {"divergence_factor", t.divergence_factor},
              {"constraint",
               {{"epsilon", t.epsilon}, {"zeta", t.zeta}, {"kappa", number_or_unbounded(t.kappa)}}}};
}

json to_json(const GridSpec& g) {
  std::vector<std::string> regimes;
  for (Regime r : g.regimes) regimes.emplace_back(to_string(r));
  return json{{"n", g.n},
              {"d", g.d},
              {"widths", g.widths},
              {"epsilons", g.epsilons},
              {"regimes", regimes},
              {"seeds", g.seeds},
              {"lr_grid_w", g.lr_grid_w},
              {"lr_grid_v", g.lr_grid_v},
              {"momentum", g.momentum},
              {"max_iters", g.max_iters},
              {"kkt_tol", g.kkt_tol},
              {"zeta", g.zeta},
              {"kappa", g.kappa},
              {"activation", std::string(to_string(g.activation.kind))}};
}

json to_json(const RunConfig& c) {
  return json{{"schema_version", c.schema_version},
              {"seed", c.seed},
              {"train", to_json(c.train)},
              {"grid", to_json(c.grid)}};
}

TrainConfig make_train_config(const TrainSection& t, Seed seed) {
  TrainConfig config;
  config.regime = t.regime;
  config.activation = Activation{t.activation};
  config.lr_w = t.lr_w;
  config.lr_v = t.lr_v;
  config.momentum = t.momentum;
  config.max_iters = t.max_iters;
  config.kkt_tol = t.kkt_tol;
  config.checkpoint_every = t.checkpoint_every;
  config.track_lambda_min = t.track_lambda_min;
  config.divergence_factor = t.divergence_factor;
  config.seed = seed;
  if (uses_projection(t.regime)) {
    ConstraintSpec c;
    c.epsilon = t.epsilon;
    c.zeta = t.zeta;
    c.kappa = t.kappa;
    c.constrain_v = t.regime == Regime::mirrored_pgd;
    config.constraint = std::move(c);
  }
  return config;
}

}  // namespace narrownet
