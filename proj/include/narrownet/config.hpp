#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "narrownet/error.hpp"
#include "narrownet/experiment.hpp"
#include "narrownet/trainer.hpp"

namespace narrownet {

/// Malformed or invalid run configuration; the message carries the location.
class ConfigError : public Error {
 public:
  using Error::Error;
};

inline constexpr int kConfigSchemaVersion = 1;

/// Settings of the `train` command.
struct TrainSection {
  std::size_t n = 200;
  std::size_t d = 50;
  std::size_t m = 8;
  ActivationKind activation = ActivationKind::tanh;
  Regime regime = Regime::mirrored_pgd;
  double lr_w = 1e-3;
  double lr_v = 1e-3;
  double momentum = 0.9;
  std::size_t max_iters = 20000;
  double kkt_tol = 1e-10;
  std::size_t checkpoint_every = 0;
  bool track_lambda_min = true;
  double divergence_factor = 1e8;
  double epsilon = 1.0;
  double zeta = 0.001;
  double kappa = 1.0;
};

/// Structured run configuration (JSON). Schema, version 1:
///
///   { "schema_version": 1, "seed": 0,
///     "train":  { "n", "d", "m", "activation", "regime", "lr_w", "lr_v",
///                 "momentum", "max_iters", "kkt_tol", "checkpoint_every",
///                 "track_lambda_min", "divergence_factor",
///                 "constraint": { "epsilon", "zeta", "kappa" } },
///     "grid":   { "n", "d", "widths", "epsilons", "regimes", "seeds",
///                 "lr_grid_w", "lr_grid_v", "momentum", "max_iters",
///                 "kkt_tol", "zeta", "kappa", "activation" } }
///
/// Every field is optional and defaults as in TrainSection / desk_preset().
/// Unknown keys are rejected.
struct RunConfig {
  int schema_version = kConfigSchemaVersion;
  std::uint64_t seed = 0;
  TrainSection train;
  GridSpec grid = desk_preset();
};

/// Parses and validates; errors name the line/column or the offending key.
RunConfig parse_run_config(const std::string& text);
RunConfig load_run_config(const std::string& path);

/// Fully resolved configuration, defaults included.
nlohmann::json to_json(const RunConfig& config);
nlohmann::json to_json(const GridSpec& grid);
nlohmann::json to_json(const TrainSection& train);

/// TrainConfig for the train section; the constraint anchor is left empty.
TrainConfig make_train_config(const TrainSection& train, Seed seed);

}  // namespace narrownet
