#include "narrownet/model.hpp"

#include <algorithm>
#include <cmath>

#include "narrownet/error.hpp"

namespace narrownet {

std::string_view to_string(ActivationKind kind) {
  switch (kind) {
    case ActivationKind::tanh: return "tanh";
    case ActivationKind::sigmoid: return "sigmoid";
    case ActivationKind::softplus: return "softplus";
  }
  return "unknown";
}

ActivationKind parse_activation(std::string_view name) {
  if (name == "tanh") return ActivationKind::tanh;
  if (name == "sigmoid") return ActivationKind::sigmoid;
  if (name == "softplus") return ActivationKind::softplus;
  throw PreconditionError("unknown activation '" + std::string(name) +
                          "' (expected tanh, sigmoid or softplus)");
}

namespace {

double logistic(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

}  // namespace

double Activation::value(double z) const {
  switch (kind) {
    case ActivationKind::tanh: return std::tanh(z);
    case ActivationKind::sigmoid: return logistic(z);
    case ActivationKind::softplus: return std::max(z, 0.0) + std::log1p(std::exp(-std::abs(z)));
  }
  return 0.0;
}

double Activation::derivative(double z) const {
  double val = 0.0;
  double der = 0.0;
  evaluate(z, val, der);
  return der;
}

void Activation::evaluate(double z, double& val, double& der) const {
  switch (kind) {
    case ActivationKind::tanh: {
      const double t = std::tanh(z);
      val = t;
      der = 1.0 - t * t;
      break;
    }
    case ActivationKind::sigmoid: {
      const double s = logistic(z);
      val = s;
      der = s * (1.0 - s);
      break;
    }
    case ActivationKind::softplus: {
      val = std::max(z, 0.0) + std::log1p(std::exp(-std::abs(z)));
      der = logistic(z);
      break;
    }
  }
  der += derivative_perturbation;
}

std::vector<std::string> activation_warnings(const Activation& act) {
  std::vector<std::string> out;
  if (act.kind != ActivationKind::tanh) {
    out.push_back(std::string(to_string(act.kind)) + "(0) = " + std::to_string(act.value(0.0)) +
                  " != 0: the zero set of the activation is not {0}");
  }
  return out;
}

std::string_view to_string(Head head) { return head == Head::plain ? "plain" : "paired"; }

Head parse_head(std::string_view name) {
  if (name == "plain") return Head::plain;
  if (name == "paired") return Head::paired;
  throw PreconditionError("unknown head '" + std::string(name) + "' (expected plain or paired)");
}

std::size_t outer_length(Head head, std::size_t m) { return head == Head::plain ? m : m / 2; }

void require_even_width(Head head, std::size_t m) {
  if (head == Head::paired && m % 2 != 0) {
    throw PreconditionError("paired head requires that its width m is an even number, got m = " +
                            std::to_string(m));
  }
}

Params::Params(DenseMatrix w, DenseVector v, Head head)
    : w_(std::move(w)), v_(std::move(v)), head_(head) {
  require_even_width(head_, w_.cols());
  if (v_.size() != outer_length(head_, w_.cols())) {
    throw DimensionError("Params: " + std::string(to_string(head_)) + " head of width " +
                         std::to_string(w_.cols()) + " needs " +
                         std::to_string(outer_length(head_, w_.cols())) +
                         " outer weights, got " + std::to_string(v_.size()));
  }
}

std::vector<double> unit_coefficients(const Params& params) {
  const std::size_t m = params.m();
  std::vector<double> c(m);
  if (params.head() == Head::plain) {
    for (std::size_t j = 0; j < m; ++j) c[j] = params.v()[j];
  } else {
    const std::size_t half = m / 2;
    for (std::size_t j = 0; j < half; ++j) {
      c[j] = params.v()[j];
      c[j + half] = -params.v()[j];
    }
  }
  return c;
}

namespace {

void check_inputs(const Params& params, const DenseMatrix& x, const char* op) {
  if (x.cols() != params.d()) {
    throw DimensionError(std::string(op) + ": inputs are " + x.shape() +
                         " but hidden weights are " + params.w().shape());
  }
}

}  // namespace

DenseMatrix feature_matrix(const Params& params, const Activation& act, const DenseMatrix& x) {
  check_inputs(params, x, "feature_matrix");
  const DenseMatrix z = matmul(x, params.w());
  const std::size_t n = x.rows();
  const std::size_t m = params.m();
  if (params.head() == Head::plain) {
    DenseMatrix phi(n, m);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < m; ++j) phi(i, j) = act.value(z(i, j));
    return phi;
  }
  const std::size_t half = m / 2;
  DenseMatrix phi(n, half);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < half; ++j)
      phi(i, j) = act.value(z(i, j)) - act.value(z(i, j + half));
  return phi;
}

DenseVector forward(const Params& params, const Activation& act, const DenseMatrix& x) {
  check_inputs(params, x, "forward");
  return matvec(feature_matrix(params, act, x), params.v());
}

DenseMatrix jacobian_w(const Params& params, const Activation& act, const DenseMatrix& x) {
  check_inputs(params, x, "jacobian_w");
  const DenseMatrix z = matmul(x, params.w());
  const std::vector<double> c = unit_coefficients(params);
  const std::size_t n = x.rows();
  const std::size_t d = params.d();
  const std::size_t m = params.m();
  DenseMatrix jac(n, m * d);
  for (std::size_t i = 0; i < n; ++i) {
    auto xi = x.row(i);
    auto out = jac.row(i);
    for (std::size_t j = 0; j < m; ++j) {
      const double scale = c[j] * act.derivative(z(i, j));
      for (std::size_t k = 0; k < d; ++k) out[j * d + k] = scale * xi[k];
    }
  }
  return jac;
}

DenseMatrix square_sub_jacobian(const Params& params, const Activation& act,
                                const DenseMatrix& x) {
  const std::size_t n = x.rows();
  const std::size_t md = params.m() * params.d();
  if (2 * n > md) {
    throw PreconditionError("square_sub_jacobian: needs n <= m d / 2 (m >= 2n/d), got n = " +
                            std::to_string(n) + ", m = " + std::to_string(params.m()) +
                            ", d = " + std::to_string(params.d()));
  }
  return column_slice(jacobian_w(params, act, x), 0, n);
}

DenseMatrix first_half_blocks(const DenseMatrix& jacobian, std::size_t d, std::size_t m) {
  if (jacobian.cols() != m * d) {
    throw DimensionError("first_half_blocks: Jacobian is " + jacobian.shape() +
                         " but m d = " + std::to_string(m * d));
  }
  return column_slice(jacobian, 0, (m / 2) * d);
}

}  // namespace narrownet
