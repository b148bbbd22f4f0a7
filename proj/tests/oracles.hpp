// Independent reference implementations used only by the tests. These are
// deliberately naive so they share no code path with the library.
#pragma once

#include <cmath>
#include <cstddef>
#include <random>
#include <vector>

#include "narrownet/linalg.hpp"
#include "narrownet/model.hpp"

namespace oracle {

using narrownet::DenseMatrix;
using narrownet::DenseVector;

inline DenseMatrix random_matrix(std::size_t r, std::size_t c, std::mt19937_64& gen,
                                 double scale = 1.0) {
  std::normal_distribution<double> nd(0.0, scale);
  DenseMatrix a(r, c);
  for (std::size_t i = 0; i < r; ++i)
    for (std::size_t j = 0; j < c; ++j) a(i, j) = nd(gen);
  return a;
}

inline DenseVector random_vector(std::size_t n, std::mt19937_64& gen, double scale = 1.0) {
  std::normal_distribution<double> nd(0.0, scale);
  DenseVector v(n);
  for (std::size_t i = 0; i < n; ++i) v[i] = nd(gen);
  return v;
}

inline DenseMatrix triple_loop_matmul(const DenseMatrix& a, const DenseMatrix& b) {
  DenseMatrix c(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < b.cols(); ++j) {
      long double s = 0;
      for (std::size_t k = 0; k < a.cols(); ++k) s += (long double)a(i, k) * b(k, j);
      c(i, j) = (double)s;
    }
  return c;
}

// Number of eigenvalues of symmetric g strictly below x, by Sylvester's law of
// inertia applied to an unpivoted LDL^T factorisation of g - xI.
inline int count_below(const DenseMatrix& g, long double x) {
  const std::size_t n = g.rows();
  std::vector<long double> a(n * n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) a[i * n + j] = g(i, j) - (i == j ? x : 0.0L);
  int negatives = 0;
  for (std::size_t k = 0; k < n; ++k) {
    long double pivot = a[k * n + k];
    if (pivot == 0) pivot = -1e-300L;
    if (pivot < 0) ++negatives;
    for (std::size_t i = k + 1; i < n; ++i) {
      const long double f = a[i * n + k] / pivot;
      for (std::size_t j = k + 1; j < n; ++j) a[i * n + j] -= f * a[k * n + j];
    }
  }
  return negatives;
}

// Smallest eigenvalue of a symmetric positive semidefinite matrix by bisection.
inline double smallest_eigenvalue_bisection(const DenseMatrix& g) {
  long double hi = 0;
  for (std::size_t i = 0; i < g.rows(); ++i) {
    long double r = 0;
    for (std::size_t j = 0; j < g.cols(); ++j) r += std::fabs((long double)g(i, j));
    hi = std::max(hi, r);
  }
  long double lo = -1e-30L;
  hi += 1;
  for (int it = 0; it < 400; ++it) {
    const long double mid = (lo + hi) / 2;
    if (count_below(g, mid) >= 1) hi = mid; else lo = mid;
  }
  return (double)((lo + hi) / 2);
}

inline double sigma(narrownet::ActivationKind k, double z) {
  switch (k) {
    case narrownet::ActivationKind::tanh: return std::tanh(z);
    case narrownet::ActivationKind::sigmoid: return 1.0 / (1.0 + std::exp(-z));
    case narrownet::ActivationKind::softplus: return std::log1p(std::exp(z));
  }
  return 0.0;
}

// Network output for one sample, written straight from the definition.
inline double scalar_forward(const narrownet::Params& p, narrownet::ActivationKind k,
                             const DenseMatrix& x, std::size_t i) {
  const std::size_t d = p.d(), m = p.m();
  auto unit = [&](std::size_t j) {
    double z = 0;
    for (std::size_t t = 0; t < d; ++t) z += p.w()(t, j) * x(i, t);
    return sigma(k, z);
  };
  double f = 0;
  if (p.head() == narrownet::Head::plain) {
    for (std::size_t j = 0; j < m; ++j) f += p.v()[j] * unit(j);
  } else {
    for (std::size_t j = 0; j < m / 2; ++j) f += p.v()[j] * (unit(j) - unit(j + m / 2));
  }
  return f;
}

inline double scalar_loss(const narrownet::Params& p, narrownet::ActivationKind k,
                          const DenseMatrix& x, const DenseVector& y) {
  double s = 0;
  for (std::size_t i = 0; i < x.rows(); ++i) {
    const double r = y[i] - scalar_forward(p, k, x, i);
    s += r * r;
  }
  return 0.5 * s;
}

inline double rel_err(double a, double b) {
  return std::abs(a - b) / std::max({1e-300, std::abs(a), std::abs(b)});
}

}  // namespace oracle
