#pragma once

#include <cstddef>
#include <iosfwd>
#include <string>

#include "narrownet/init.hpp"
#include "narrownet/linalg.hpp"

namespace narrownet {

/// n input rows (n x d) with one scalar target each.
struct Dataset {
  DenseMatrix x;
  DenseVector y;
  /// Generator name and seed, e.g. "synthetic(n=200,d=50,seed=7)".
  std::string provenance;

  std::size_t n() const noexcept { return x.rows(); }
  std::size_t d() const noexcept { return x.cols(); }
};

/// Gaussian rows normalized to unit Euclidean norm, targets y_i = (sum_k x_ik)^2.
Dataset make_synthetic(std::size_t n, std::size_t d, Seed seed);

/// Same inputs with targets replaced by y.
Dataset with_targets(const Dataset& data, DenseVector y);

/// CSV snapshot: d feature columns x0..x{d-1} then y, one row per sample in
/// generation order, values in shortest round-trip form.
void write_dataset_csv(std::ostream& out, const Dataset& data);

}  // namespace narrownet
