#pragma once

#include <vector>

#include "narrownet/dataset.hpp"
#include "narrownet/model.hpp"

namespace narrownet {

/// Gradient of the squared loss, shaped like Params.
struct Gradients {
  DenseMatrix grad_w;  ///< d x m
  DenseVector grad_v;  ///< same length as v
};

/// 0.5 * sum_i (y_i - f(x_i))^2.
double loss(const Params& params, const Activation& act, const Dataset& data);

/// Analytic gradients: grad_w = reshape(J^T (f - y)), grad_v = Phi^T (f - y).
Gradients grad(const Params& params, const Activation& act, const Dataset& data);

/// Reusable loss/gradient evaluator for one dataset and network shape.
///
/// Computes the loss and both gradients in a single pass of O(n m d) work
/// without assembling the Jacobian. Accumulation order is fixed, so results
/// are bitwise reproducible.
class LossEvaluator {
 public:
  LossEvaluator(const Dataset& data, Activation act, std::size_t m, Head head);

  /// Loss at params; fills `out` with gradients when non-null.
  double evaluate(const Params& params, Gradients* out);

  /// Network output from the most recent evaluate().
  const std::vector<double>& last_output() const noexcept { return output_; }

 private:
  const Dataset& data_;
  Activation act_;
  std::size_t m_;
  Head head_;
  std::vector<double> pre_;    // n x m pre-activations
  std::vector<double> value_;  // n x m activations
  std::vector<double> deriv_;  // n x m derivatives
  std::vector<double> coeff_;  // m signed unit coefficients
  std::vector<double> output_;
};

}  // namespace narrownet
