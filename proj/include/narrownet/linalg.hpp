#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <string>
#include <vector>

namespace narrownet {

/// Row-major dense matrix of doubles.
class DenseMatrix {
 public:
  DenseMatrix() = default;
  DenseMatrix(std::size_t rows, std::size_t cols, double fill = 0.0);
  DenseMatrix(std::size_t rows, std::size_t cols, std::vector<double> data);
  DenseMatrix(std::initializer_list<std::initializer_list<double>> rows);

  static DenseMatrix identity(std::size_t n);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  std::size_t size() const noexcept { return data_.size(); }

  double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
  double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

  std::span<double> row(std::size_t i) { return {data_.data() + i * cols_, cols_}; }
  std::span<const double> row(std::size_t i) const { return {data_.data() + i * cols_, cols_}; }

  std::span<double> data() noexcept { return data_; }
  std::span<const double> data() const noexcept { return data_; }

  /// "rows x cols", for error messages.
  std::string shape() const;

  bool operator==(const DenseMatrix&) const = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

/// Dense vector of doubles.
class DenseVector {
 public:
  DenseVector() = default;
  explicit DenseVector(std::size_t len, double fill = 0.0) : data_(len, fill) {}
  explicit DenseVector(std::vector<double> data) : data_(std::move(data)) {}
  DenseVector(std::initializer_list<double> values) : data_(values) {}

  std::size_t size() const noexcept { return data_.size(); }
  bool empty() const noexcept { return data_.empty(); }

  double& operator[](std::size_t i) { return data_[i]; }
  double operator[](std::size_t i) const { return data_[i]; }

  std::span<double> data() noexcept { return data_; }
  std::span<const double> data() const noexcept { return data_; }

  auto begin() noexcept { return data_.begin(); }
  auto end() noexcept { return data_.end(); }
  auto begin() const noexcept { return data_.begin(); }
  auto end() const noexcept { return data_.end(); }

  bool operator==(const DenseVector&) const = default;

 private:
  std::vector<double> data_;
};

bool all_finite(std::span<const double> values) noexcept;

/// a * b. Throws DimensionError naming both shapes when a.cols != b.rows.
DenseMatrix matmul(const DenseMatrix& a, const DenseMatrix& b);

/// a * x.
DenseVector matvec(const DenseMatrix& a, const DenseVector& x);

/// a^T * x.
DenseVector matvec_transposed(const DenseMatrix& a, const DenseVector& x);

DenseMatrix transpose(const DenseMatrix& a);

/// a * a^T (rows x rows).
DenseMatrix gram_rows(const DenseMatrix& a);

/// a^T * a (cols x cols).
DenseMatrix gram_cols(const DenseMatrix& a);

double fro_norm(const DenseMatrix& a);
double norm2(const DenseVector& v);
double norm2(std::span<const double> v);

/// Columns [first, first + count) of a.
DenseMatrix column_slice(const DenseMatrix& a, std::size_t first, std::size_t count);

/// Cap on Jacobi sweeps before ConvergenceError is raised.
inline constexpr int kMaxEigenSweeps = 10000;

/// Relative off-diagonal residual a converged eigensolve must reach.
inline constexpr double kEigenResidualTol = 1e-10;

/// Eigenvalues of a symmetric matrix, ascending, by cyclic Jacobi rotations.
///
/// Rotations are skipped once |a_pq| <= eps * sqrt(|a_pp a_qq|), which keeps
/// small eigenvalues of positive semidefinite input accurate relative to
/// themselves rather than to the largest one. Throws ConvergenceError carrying
/// the off-diagonal residual if kMaxEigenSweeps is exceeded.
std::vector<double> symmetric_eigenvalues(const DenseMatrix& a);

/// Smallest singular value by one-sided (Hestenes) Jacobi on the rows of a, or
/// of a^T when a is tall. Unlike a Gram-matrix eigensolve this keeps small
/// singular values accurate relative to themselves. Throws ConvergenceError
/// after kMaxEigenSweeps sweeps.
double min_singular_value(const DenseMatrix& a);

}  // namespace narrownet
