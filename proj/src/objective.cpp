#include "narrownet/objective.hpp"

#include <algorithm>
#include <string>

#include <cblas.h>

#include "narrownet/error.hpp"

namespace narrownet {

LossEvaluator::LossEvaluator(const Dataset& data, Activation act, std::size_t m, Head head)
    : data_(data),
      act_(act),
      m_(m),
      head_(head),
      pre_(data.n() * m),
      value_(data.n() * m),
      deriv_(data.n() * m),
      coeff_(m),
      output_(data.n()) {
  require_even_width(head, m);
  // Callers parallelize across runs; BLAS stays single-threaded so results
  // do not depend on the worker count.
  openblas_set_num_threads(1);
}

double LossEvaluator::evaluate(const Params& params, Gradients* out) {
  const std::size_t n = data_.n();
  const std::size_t d = data_.d();
  const std::size_t m = m_;
  if (params.d() != d || params.m() != m || params.head() != head_) {
    throw DimensionError("loss: parameters " + params.w().shape() + " (" +
                         std::string(to_string(params.head())) + ") do not match data with d = " +
                         std::to_string(d) + " and evaluator width " + std::to_string(m));
  }
  if (data_.y.size() != n) throw DimensionError("loss: target count differs from sample count");

  const auto& w = params.w();
  const auto& v = params.v();
  const std::size_t half = m / 2;
  if (head_ == Head::plain) {
    for (std::size_t j = 0; j < m; ++j) coeff_[j] = v[j];
  } else {
    for (std::size_t j = 0; j < half; ++j) {
      coeff_[j] = v[j];
      coeff_[j + half] = -v[j];
    }
  }

  // pre = x * w (n x m).
  cblas_dgemm(CblasRowMajor, CblasNoTrans, CblasNoTrans, static_cast<int>(n),
              static_cast<int>(m), static_cast<int>(d), 1.0, data_.x.data().data(),
              static_cast<int>(d), w.data().data(), static_cast<int>(m), 0.0, pre_.data(),
              static_cast<int>(m));
  for (std::size_t idx = 0; idx < pre_.size(); ++idx) {
    act_.evaluate(pre_[idx], value_[idx], deriv_[idx]);
  }

  double total = 0.0;
  if (out != nullptr) {
    if (out->grad_w.rows() != d || out->grad_w.cols() != m) out->grad_w = DenseMatrix(d, m);
    if (out->grad_v.size() == v.size()) {
      std::fill(out->grad_v.begin(), out->grad_v.end(), 0.0);
    } else {
      out->grad_v = DenseVector(v.size());
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    const double* a = value_.data() + i * m;
    double f = 0.0;
    if (head_ == Head::plain) {
      for (std::size_t j = 0; j < m; ++j) f += v[j] * a[j];
    } else {
      for (std::size_t j = 0; j < half; ++j) f += v[j] * (a[j] - a[j + half]);
    }
    output_[i] = f;
    const double r = f - data_.y[i];
    total += 0.5 * r * r;
    if (out == nullptr) continue;

    if (head_ == Head::plain) {
      for (std::size_t j = 0; j < m; ++j) out->grad_v[j] += r * a[j];
    } else {
      for (std::size_t j = 0; j < half; ++j) out->grad_v[j] += r * (a[j] - a[j + half]);
    }
    // Reuse the derivative row as r * c_j * s'(z_ij).
    double* t = deriv_.data() + i * m;
    for (std::size_t j = 0; j < m; ++j) t[j] *= r * coeff_[j];
  }
  if (out != nullptr) {
    // grad_w = x^T * t (d x m).
    cblas_dgemm(CblasRowMajor, CblasTrans, CblasNoTrans, static_cast<int>(d),
                static_cast<int>(m), static_cast<int>(n), 1.0, data_.x.data().data(),
                static_cast<int>(d), deriv_.data(), static_cast<int>(m), 0.0,
                out->grad_w.data().data(), static_cast<int>(m));
  }
  return total;
}

double loss(const Params& params, const Activation& act, const Dataset& data) {
  if (params.d() != data.d()) {
    throw DimensionError("loss: inputs are " + data.x.shape() + " but hidden weights are " +
                         params.w().shape());
  }
  LossEvaluator eval(data, act, params.m(), params.head());
  return eval.evaluate(params, nullptr);
}

Gradients grad(const Params& params, const Activation& act, const Dataset& data) {
  if (params.d() != data.d()) {
    throw DimensionError("grad: inputs are " + data.x.shape() + " but hidden weights are " +
                         params.w().shape());
  }
  LossEvaluator eval(data, act, params.m(), params.head());
  Gradients g;
  eval.evaluate(params, &g);
  return g;
}

}  // namespace narrownet
