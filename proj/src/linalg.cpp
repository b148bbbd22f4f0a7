#include "narrownet/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "narrownet/error.hpp"

namespace narrownet {

DenseMatrix::DenseMatrix(std::size_t rows, std::size_t cols, double fill)
    : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

DenseMatrix::DenseMatrix(std::size_t rows, std::size_t cols, std::vector<double> data)
    : rows_(rows), cols_(cols), data_(std::move(data)) {
  if (data_.size() != rows * cols) {
    throw DimensionError("DenseMatrix: " + std::to_string(data_.size()) +
                         " values do not fill a " + shape() + " matrix");
  }
}

DenseMatrix::DenseMatrix(std::initializer_list<std::initializer_list<double>> rows)
    : rows_(rows.size()), cols_(rows.size() == 0 ? 0 : rows.begin()->size()) {
  data_.reserve(rows_ * cols_);
  for (const auto& r : rows) {
    if (r.size() != cols_) throw DimensionError("DenseMatrix: ragged initializer");
    data_.insert(data_.end(), r.begin(), r.end());
  }
}

DenseMatrix DenseMatrix::identity(std::size_t n) {
  DenseMatrix out(n, n);
  for (std::size_t i = 0; i < n; ++i) out(i, i) = 1.0;
  return out;
}

std::string DenseMatrix::shape() const {
  return std::to_string(rows_) + "x" + std::to_string(cols_);
}

bool all_finite(std::span<const double> values) noexcept {
  return std::all_of(values.begin(), values.end(), [](double x) { return std::isfinite(x); });
}

namespace {

void require_finite(std::span<const double> values, const char* op) {
  if (!all_finite(values)) throw Error(std::string(op) + ": result is not finite");
}

}  // namespace

DenseMatrix matmul(const DenseMatrix& a, const DenseMatrix& b) {
  if (a.cols() != b.rows()) {
    throw DimensionError("matmul: cannot multiply " + a.shape() + " by " + b.shape());
  }
  DenseMatrix out(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    auto dst = out.row(i);
    for (std::size_t k = 0; k < a.cols(); ++k) {
      const double aik = a(i, k);
      auto src = b.row(k);
      for (std::size_t j = 0; j < dst.size(); ++j) dst[j] += aik * src[j];
    }
  }
  require_finite(out.data(), "matmul");
  return out;
}

DenseVector matvec(const DenseMatrix& a, const DenseVector& x) {
  if (a.cols() != x.size()) {
    throw DimensionError("matvec: " + a.shape() + " matrix with vector of length " +
                         std::to_string(x.size()));
  }
  DenseVector out(a.rows());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    auto r = a.row(i);
    double acc = 0.0;
    for (std::size_t j = 0; j < r.size(); ++j) acc += r[j] * x[j];
    out[i] = acc;
  }
  require_finite(out.data(), "matvec");
  return out;
}

DenseVector matvec_transposed(const DenseMatrix& a, const DenseVector& x) {
  if (a.rows() != x.size()) {
    throw DimensionError("matvec_transposed: " + a.shape() + " matrix with vector of length " +
                         std::to_string(x.size()));
  }
  DenseVector out(a.cols());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    auto r = a.row(i);
    for (std::size_t j = 0; j < r.size(); ++j) out[j] += r[j] * x[i];
  }
  require_finite(out.data(), "matvec_transposed");
  return out;
}

DenseMatrix transpose(const DenseMatrix& a) {
  DenseMatrix out(a.cols(), a.rows());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) out(j, i) = a(i, j);
  return out;
}

DenseMatrix gram_rows(const DenseMatrix& a) {
  const std::size_t n = a.rows();
  DenseMatrix out(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    auto ri = a.row(i);
    for (std::size_t j = 0; j <= i; ++j) {
      auto rj = a.row(j);
      double acc = 0.0;
      for (std::size_t k = 0; k < ri.size(); ++k) acc += ri[k] * rj[k];
      out(i, j) = acc;
      out(j, i) = acc;
    }
  }
  require_finite(out.data(), "gram_rows");
  return out;
}

DenseMatrix gram_cols(const DenseMatrix& a) { return gram_rows(transpose(a)); }

double fro_norm(const DenseMatrix& a) { return norm2(a.data()); }

double norm2(const DenseVector& v) { return norm2(v.data()); }

double norm2(std::span<const double> v) {
  // Scaled accumulation so huge or tiny entries do not overflow/underflow.
  double scale = 0.0;
  for (double x : v) scale = std::max(scale, std::abs(x));
  if (scale == 0.0 || !std::isfinite(scale)) return scale;
  double acc = 0.0;
  for (double x : v) {
    const double t = x / scale;
    acc += t * t;
  }
  return scale * std::sqrt(acc);
}

DenseMatrix column_slice(const DenseMatrix& a, std::size_t first, std::size_t count) {
  if (first + count > a.cols()) {
    throw DimensionError("column_slice: columns [" + std::to_string(first) + ", " +
                         std::to_string(first + count) + ") out of range for " + a.shape());
  }
  DenseMatrix out(a.rows(), count);
  for (std::size_t i = 0; i < a.rows(); ++i) {
    auto src = a.row(i).subspan(first, count);
    std::copy(src.begin(), src.end(), out.row(i).begin());
  }
  return out;
}

namespace {

double off_diagonal_residual(const DenseMatrix& a) {
  double off = 0.0;
  double total = 0.0;
  for (std::size_t i = 0; i < a.rows(); ++i) {
    for (std::size_t j = 0; j < a.cols(); ++j) {
      const double x = a(i, j) * a(i, j);
      total += x;
      if (i != j) off += x;
    }
  }
  return total == 0.0 ? 0.0 : std::sqrt(off / total);
}

}  // namespace

std::vector<double> symmetric_eigenvalues(const DenseMatrix& input) {
  if (input.rows() != input.cols()) {
    throw DimensionError("symmetric_eigenvalues: matrix is " + input.shape());
  }
  DenseMatrix a = input;
  const std::size_t n = a.rows();
  constexpr double eps = std::numeric_limits<double>::epsilon();

  int sweep = 0;
  for (;; ++sweep) {
    if (sweep >= kMaxEigenSweeps) {
      const double residual = off_diagonal_residual(a);
      throw ConvergenceError("symmetric_eigenvalues: no convergence after " +
                                 std::to_string(kMaxEigenSweeps) + " sweeps (residual " +
                                 std::to_string(residual) + ")",
                             residual);
    }
    bool rotated = false;
    for (std::size_t p = 0; p + 1 < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        const double apq = a(p, q);
        const double app = a(p, p);
        const double aqq = a(q, q);
        if (apq == 0.0 || std::abs(apq) <= eps * std::sqrt(std::abs(app * aqq))) {
          a(p, q) = 0.0;
          a(q, p) = 0.0;
          continue;
        }
        rotated = true;
        const double theta = (aqq - app) / (2.0 * apq);
        const double t = std::copysign(1.0, theta) /
                         (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (std::size_t k = 0; k < n; ++k) {
          const double akp = a(k, p);
          const double akq = a(k, q);
          a(k, p) = c * akp - s * akq;
          a(k, q) = s * akp + c * akq;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double apk = a(p, k);
          const double aqk = a(q, k);
          a(p, k) = c * apk - s * aqk;
          a(q, k) = s * apk + c * aqk;
        }
        a(p, p) = app - t * apq;
        a(q, q) = aqq + t * apq;
        a(p, q) = 0.0;
        a(q, p) = 0.0;
      }
    }
    if (!rotated && off_diagonal_residual(a) <= kEigenResidualTol) break;
  }

  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = a(i, i);
  std::sort(out.begin(), out.end());
  return out;
}

double min_singular_value(const DenseMatrix& a) {
  if (a.rows() == 0 || a.cols() == 0) {
    throw DimensionError("min_singular_value: empty " + a.shape() + " matrix");
  }
  // One-sided Jacobi on the shorter side: rotate vectors until pairwise
  // orthogonal; their norms are then the singular values.
  DenseMatrix u = a.rows() <= a.cols() ? a : transpose(a);
  const std::size_t k = u.rows();
  const std::size_t len = u.cols();
  const double tol = std::sqrt(static_cast<double>(len)) * std::numeric_limits<double>::epsilon();
  // Rows at the rounding-noise floor are numerically zero; rotating them
  // against each other never settles.
  const double noise = fro_norm(u) * static_cast<double>(len) * std::numeric_limits<double>::epsilon();
  const double noise_sq = noise * noise;

  for (int sweep = 0;; ++sweep) {
    bool rotated = false;
    double worst = 0.0;
    for (std::size_t p = 0; p + 1 < k; ++p) {
      for (std::size_t q = p + 1; q < k; ++q) {
        auto up = u.row(p);
        auto uq = u.row(q);
        double alpha = 0.0, beta = 0.0, gamma = 0.0;
        for (std::size_t i = 0; i < len; ++i) {
          alpha += up[i] * up[i];
          beta += uq[i] * uq[i];
          gamma += up[i] * uq[i];
        }
        if (gamma == 0.0 || alpha <= noise_sq || beta <= noise_sq) continue;
        const double cosine = std::abs(gamma) / (std::sqrt(alpha) * std::sqrt(beta));
        worst = std::max(worst, cosine);
        if (cosine <= tol) continue;
        rotated = true;
        const double zeta = (beta - alpha) / (2.0 * gamma);
        const double t = std::copysign(1.0, zeta) / (std::abs(zeta) + std::sqrt(1.0 + zeta * zeta));
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double s = c * t;
        for (std::size_t i = 0; i < len; ++i) {
          const double x = up[i];
          const double y = uq[i];
          up[i] = c * x - s * y;
          uq[i] = s * x + c * y;
        }
      }
    }
    if (!rotated) break;
    if (sweep + 1 >= kMaxEigenSweeps) {
      throw ConvergenceError("min_singular_value: no convergence after " +
                                 std::to_string(kMaxEigenSweeps) + " sweeps (residual " +
                                 std::to_string(worst) + ")",
                             worst);
    }
  }

  double smallest = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < k; ++i) smallest = std::min(smallest, norm2(u.row(i)));
  return smallest;
}

}  // namespace narrownet
