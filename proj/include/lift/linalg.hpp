#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace lift::linalg {

/// Dense row-major matrix of doubles.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  static Matrix identity(std::size_t n);
  static Matrix from_rows(const std::vector<std::vector<double>>& rows);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }

  double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
  double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

  std::span<double> row(std::size_t i) { return {data_.data() + i * cols_, cols_}; }
  std::span<const double> row(std::size_t i) const { return {data_.data() + i * cols_, cols_}; }

  std::span<double> data() { return data_; }
  std::span<const double> data() const { return data_; }

  Matrix transposed() const;
  double frobenius_norm() const;

  friend bool operator==(const Matrix&, const Matrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

Matrix multiply(const Matrix& a, const Matrix& b);

/// Leading eigenpairs of a symmetric matrix.
struct EigenPair {
  std::vector<double> eigenvalues;  // descending
  Matrix eigenvectors;              // d×k, column j pairs with eigenvalues[j]
};

/// Largest absolute asymmetry |C(i,j) - C(j,i)|.
double asymmetry(const Matrix& c);

/// ‖C·v_j − λ_j·v_j‖₂ for every returned pair.
std::vector<double> residuals(const Matrix& c, const EigenPair& e);

/// Full symmetric eigendecomposition by Householder tridiagonalisation and
/// implicit QL. Returns all d pairs in descending eigenvalue order, with each
/// eigenvector's largest-magnitude component made positive (first index wins
/// ties). Throws lift::Error if the QL sweep fails to converge.
EigenPair symmetric_eigen(const Matrix& c);

/// Top-k eigenpairs of symmetric `c`. Each returned pair satisfies
/// ‖C·v − λ·v‖ ≤ tolerance·max(1, ‖C‖_F); otherwise lift::Error naming the
/// residual is thrown. Requires 1 ≤ k ≤ d and asymmetry ≤ tolerance·max(1,‖C‖_F).
EigenPair top_k_eigen(const Matrix& c, std::size_t k, double tolerance = 1e-10);

}  // namespace lift::linalg
