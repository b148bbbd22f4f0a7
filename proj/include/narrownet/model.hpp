#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "narrownet/linalg.hpp"

namespace narrownet {

enum class ActivationKind { tanh, sigmoid, softplus };

std::string_view to_string(ActivationKind kind);
ActivationKind parse_activation(std::string_view name);

/// Smooth activation with an analytic derivative.
struct Activation {
  ActivationKind kind = ActivationKind::tanh;
  /// Added to every derivative evaluation. Only gradient-check negative
  /// controls set this.
  double derivative_perturbation = 0.0;

  double value(double z) const;
  double derivative(double z) const;
  /// value and derivative in one evaluation.
  void evaluate(double z, double& value, double& derivative) const;
};

/// Warnings for activations outside the zero-set clause {z : s(z) = 0} = {0}.
/// tanh passes; sigmoid and softplus are flagged but still usable.
std::vector<std::string> activation_warnings(const Activation& act);

enum class Head {
  plain,   ///< f = sum_j v_j s(w_j . x), v has m entries
  paired,  ///< f = sum_{j<m/2} v_j (s(w_j . x) - s(w_{j+m/2} . x)), v has m/2 entries
};

std::string_view to_string(Head head);
Head parse_head(std::string_view name);

/// Hidden weights w (d x m, column j is hidden unit j) and outer weights v.
class Params {
 public:
  Params() = default;
  /// Throws PreconditionError for an odd paired width and DimensionError when
  /// v does not match the head.
  Params(DenseMatrix w, DenseVector v, Head head);

  const DenseMatrix& w() const noexcept { return w_; }
  const DenseVector& v() const noexcept { return v_; }
  DenseMatrix& mutable_w() noexcept { return w_; }
  DenseVector& mutable_v() noexcept { return v_; }
  Head head() const noexcept { return head_; }
  std::size_t d() const noexcept { return w_.rows(); }
  std::size_t m() const noexcept { return w_.cols(); }

  bool operator==(const Params&) const = default;

 private:
  DenseMatrix w_;
  DenseVector v_;
  Head head_ = Head::plain;
};

/// Expected outer-weight length for a head of width m.
std::size_t outer_length(Head head, std::size_t m);

/// Throws PreconditionError quoting the width-parity assumption for odd paired m.
void require_even_width(Head head, std::size_t m);

/// Signed coefficient c_j multiplying hidden unit j: v_j for the plain head,
/// +v_j / -v_{j-m/2} for the first / second half of the paired head.
std::vector<double> unit_coefficients(const Params& params);

/// Network output for every row of x (n x d).
DenseVector forward(const Params& params, const Activation& act, const DenseMatrix& x);

/// Hidden activations: n x m for the plain head, n x m/2 pair differences for
/// the paired head, so that forward == feature_matrix * v.
DenseMatrix feature_matrix(const Params& params, const Activation& act, const DenseMatrix& x);

/// Jacobian of the output with respect to vec(w) = (w_1, ..., w_m): n x (m d),
/// row i, block j equal to c_j s'(w_j . x_i) x_i.
DenseMatrix jacobian_w(const Params& params, const Activation& act, const DenseMatrix& x);

/// First n columns of jacobian_w (n x n). Requires n <= m d / 2 so only
/// first-half units are touched.
DenseMatrix square_sub_jacobian(const Params& params, const Activation& act, const DenseMatrix& x);

/// Column blocks of the first m/2 hidden units of a Jacobian (n x (m/2) d).
DenseMatrix first_half_blocks(const DenseMatrix& jacobian, std::size_t d, std::size_t m);

}  // namespace narrownet
