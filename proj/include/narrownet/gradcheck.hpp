#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "narrownet/init.hpp"
#include "narrownet/model.hpp"

namespace narrownet {

struct GradcheckOptions {
  std::vector<Head> heads{Head::plain, Head::paired};
  std::vector<ActivationKind> activations{ActivationKind::tanh, ActivationKind::sigmoid,
                                          ActivationKind::softplus};
  std::size_t instances = 10;
  std::size_t n = 8;
  std::size_t d = 4;
  std::size_t m = 6;
  Seed seed{0};
  double tolerance = 1e-5;
  /// Negative-control hook: added to every analytic derivative.
  double corrupt_derivative = 0.0;
};

/// One compared coordinate.
struct GradcheckEntry {
  Head head = Head::plain;
  ActivationKind activation = ActivationKind::tanh;
  std::size_t instance = 0;
  std::string quantity;  ///< "grad_w", "grad_v" or "jacobian_w"
  std::size_t row = 0;
  std::size_t col = 0;
  double analytic = 0.0;
  double numeric = 0.0;
  double rel_error = 0.0;
};

struct GradcheckReport {
  std::size_t compared = 0;
  GradcheckEntry worst;
  /// Worst entry per (head, activation), in sweep order.
  std::vector<GradcheckEntry> per_case;
  bool pass = false;
};

/// |a - b| / max(1, |a|, |b|): relative for large values, absolute near zero.
double gradcheck_error(double analytic, double numeric);

/// Compares grad (w and v) and jacobian_w with central finite differences of
/// loss and forward, step 1e-6 * (1 + |theta_k|), on random instances of
/// every requested head and activation.
GradcheckReport run_gradcheck(const GradcheckOptions& options);

}  // namespace narrownet
