#include "lift/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "lift/error.hpp"

namespace lift::linalg {

Matrix Matrix::identity(std::size_t n) {
  Matrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

Matrix Matrix::from_rows(const std::vector<std::vector<double>>& rows) {
  const std::size_t r = rows.size();
  const std::size_t c = r == 0 ? 0 : rows.front().size();
  Matrix m(r, c);
  for (std::size_t i = 0; i < r; ++i) {
    if (rows[i].size() != c) throw Error("linalg.shape", "ragged rows in Matrix::from_rows");
    std::copy(rows[i].begin(), rows[i].end(), m.row(i).begin());
  }
  return m;
}

Matrix Matrix::transposed() const {
  Matrix t(cols_, rows_);
  for (std::size_t i = 0; i < rows_; ++i)
    for (std::size_t j = 0; j < cols_; ++j) t(j, i) = (*this)(i, j);
  return t;
}

double Matrix::frobenius_norm() const {
  double s = 0.0;
  for (double x : data_) s += x * x;
  return std::sqrt(s);
}

Matrix multiply(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.rows()) throw Error("linalg.shape", "multiply: inner dimensions differ");
  Matrix out(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    auto o = out.row(i);
    for (std::size_t k = 0; k < a.cols(); ++k) {
      const double aik = a(i, k);
      if (aik == 0.0) continue;
      const auto brow = b.row(k);
      for (std::size_t j = 0; j < b.cols(); ++j) o[j] += aik * brow[j];
    }
  }
  return out;
}

double asymmetry(const Matrix& c) {
  if (c.rows() != c.cols()) return INFINITY;
  double worst = 0.0;
  for (std::size_t i = 0; i < c.rows(); ++i)
    for (std::size_t j = i + 1; j < c.cols(); ++j) worst = std::max(worst, std::abs(c(i, j) - c(j, i)));
  return worst;
}

std::vector<double> residuals(const Matrix& c, const EigenPair& e) {
  const std::size_t d = c.rows();
  std::vector<double> out(e.eigenvalues.size());
  std::vector<double> v(d);
  for (std::size_t j = 0; j < e.eigenvalues.size(); ++j) {
    for (std::size_t i = 0; i < d; ++i) v[i] = e.eigenvectors(i, j);
    double s = 0.0;
    for (std::size_t i = 0; i < d; ++i) {
      const auto row = c.row(i);
      const double cv = std::inner_product(row.begin(), row.end(), v.begin(), 0.0);
      const double r = cv - e.eigenvalues[j] * v[i];
      s += r * r;
    }
    out[j] = std::sqrt(s);
  }
  return out;
}

namespace {

// Householder reduction to tridiagonal form followed by implicit QL, after the
// EISPACK tred2/tql2 pair. The working matrix is stored transposed (w(a, b)
// addresses element [b][a]) so every inner loop walks contiguous memory; on
// exit row i of `w` holds the eigenvector for d[i].
class SymmetricQl {
 public:
  explicit SymmetricQl(const Matrix& c) : n_(c.rows()), w_(c), d_(n_), e_(n_) {}

  void run() {
    tridiagonalize();
    diagonalize();
  }

  const std::vector<double>& values() const { return d_; }
  const Matrix& vectors_by_row() const { return w_; }

 private:
  double& V(std::size_t a, std::size_t b) { return w_(b, a); }

  void tridiagonalize() {
    const std::size_t n = n_;
    for (std::size_t j = 0; j < n; ++j) d_[j] = V(n - 1, j);

    for (std::size_t i = n - 1; i > 0; --i) {
      double scale = 0.0;
      double h = 0.0;
      for (std::size_t k = 0; k < i; ++k) scale += std::abs(d_[k]);
      if (scale == 0.0) {
        e_[i] = d_[i - 1];
        for (std::size_t j = 0; j < i; ++j) {
          d_[j] = V(i - 1, j);
          V(i, j) = 0.0;
          V(j, i) = 0.0;
        }
      } else {
        for (std::size_t k = 0; k < i; ++k) {
          d_[k] /= scale;
          h += d_[k] * d_[k];
        }
        double f = d_[i - 1];
        double g = std::sqrt(h);
        if (f > 0) g = -g;
        e_[i] = scale * g;
        h -= f * g;
        d_[i - 1] = f - g;
        for (std::size_t j = 0; j < i; ++j) e_[j] = 0.0;

        for (std::size_t j = 0; j < i; ++j) {
          f = d_[j];
          V(j, i) = f;
          g = e_[j] + V(j, j) * f;
          double* col = &V(0, j);  // V(k, j) for consecutive k
          for (std::size_t k = j + 1; k <= i - 1; ++k) {
            g += col[k] * d_[k];
            e_[k] += col[k] * f;
          }
          e_[j] = g;
        }
        f = 0.0;
        for (std::size_t j = 0; j < i; ++j) {
          e_[j] /= h;
          f += e_[j] * d_[j];
        }
        const double hh = f / (h + h);
        for (std::size_t j = 0; j < i; ++j) e_[j] -= hh * d_[j];
        for (std::size_t j = 0; j < i; ++j) {
          f = d_[j];
          g = e_[j];
          double* col = &V(0, j);
          for (std::size_t k = j; k <= i - 1; ++k) col[k] -= (f * e_[k] + g * d_[k]);
          d_[j] = V(i - 1, j);
          V(i, j) = 0.0;
        }
      }
      d_[i] = h;
    }

    // Accumulate the transformations.
    for (std::size_t i = 0; i + 1 < n; ++i) {
      V(n - 1, i) = V(i, i);
      V(i, i) = 1.0;
      const double h = d_[i + 1];
      if (h != 0.0) {
        const double* next = &V(0, i + 1);
        for (std::size_t k = 0; k <= i; ++k) d_[k] = next[k] / h;
        for (std::size_t j = 0; j <= i; ++j) {
          double* col = &V(0, j);
          double g = 0.0;
          for (std::size_t k = 0; k <= i; ++k) g += next[k] * col[k];
          for (std::size_t k = 0; k <= i; ++k) col[k] -= g * d_[k];
        }
      }
      for (std::size_t k = 0; k <= i; ++k) V(k, i + 1) = 0.0;
    }
    for (std::size_t j = 0; j < n; ++j) {
      d_[j] = V(n - 1, j);
      V(n - 1, j) = 0.0;
    }
    V(n - 1, n - 1) = 1.0;
    e_[0] = 0.0;
  }

  void diagonalize() {
    const std::size_t n = n_;
    for (std::size_t i = 1; i < n; ++i) e_[i - 1] = e_[i];
    e_[n - 1] = 0.0;

    double f = 0.0;
    double tst1 = 0.0;
    const double eps = std::ldexp(1.0, -52);
    for (std::size_t l = 0; l < n; ++l) {
      tst1 = std::max(tst1, std::abs(d_[l]) + std::abs(e_[l]));
      std::size_t m = l;
      while (m < n) {
        if (std::abs(e_[m]) <= eps * tst1) break;
        ++m;
      }
      if (m > l) {
        int iter = 0;
        do {
          if (++iter > kMaxIterations) {
            throw Error("linalg.no_convergence",
                        "symmetric eigensolver: QL iteration did not converge for eigenvalue " +
                            std::to_string(l) + " (off-diagonal " + std::to_string(std::abs(e_[l])) +
                            ")");
          }
          double g = d_[l];
          double p = (d_[l + 1] - g) / (2.0 * e_[l]);
          double r = std::hypot(p, 1.0);
          if (p < 0) r = -r;
          d_[l] = e_[l] / (p + r);
          d_[l + 1] = e_[l] * (p + r);
          const double dl1 = d_[l + 1];
          double h = g - d_[l];
          for (std::size_t i = l + 2; i < n; ++i) d_[i] -= h;
          f += h;

          p = d_[m];
          double c = 1.0, c2 = 1.0, c3 = 1.0;
          const double el1 = e_[l + 1];
          double s = 0.0, s2 = 0.0;
          for (std::size_t ii = m; ii-- > l;) {
            const std::size_t i = ii;
            c3 = c2;
            c2 = c;
            s2 = s;
            g = c * e_[i];
            h = c * p;
            r = std::hypot(p, e_[i]);
            e_[i + 1] = s * r;
            s = e_[i] / r;
            c = p / r;
            p = c * d_[i] - s * g;
            d_[i + 1] = h + s * (c * g + s * d_[i]);
            double* vi = &V(0, i);
            double* vi1 = &V(0, i + 1);
            for (std::size_t k = 0; k < n; ++k) {
              h = vi1[k];
              vi1[k] = s * vi[k] + c * h;
              vi[k] = c * vi[k] - s * h;
            }
          }
          p = -s * s2 * c3 * el1 * e_[l] / dl1;
          e_[l] = s * p;
          d_[l] = c * p;
        } while (std::abs(e_[l]) > eps * tst1);
      }
      d_[l] += f;
      e_[l] = 0.0;
    }
  }

  static constexpr int kMaxIterations = 60;

  std::size_t n_;
  Matrix w_;
  std::vector<double> d_;
  std::vector<double> e_;
};

void canonicalize_sign(Matrix& vectors, std::size_t col) {
  std::size_t best = 0;
  double best_abs = -1.0;
  for (std::size_t i = 0; i < vectors.rows(); ++i) {
    const double a = std::abs(vectors(i, col));
    if (a > best_abs) {
      best_abs = a;
      best = i;
    }
  }
  if (vectors(best, col) < 0)
    for (std::size_t i = 0; i < vectors.rows(); ++i) vectors(i, col) = -vectors(i, col);
}

}  // namespace

EigenPair symmetric_eigen(const Matrix& c) {
  if (c.rows() != c.cols()) throw Error("linalg.shape", "eigendecomposition needs a square matrix");
  const std::size_t n = c.rows();
  EigenPair out;
  if (n == 0) return out;
  if (n == 1) {
    out.eigenvalues = {c(0, 0)};
    out.eigenvectors = Matrix::identity(1);
    return out;
  }

  SymmetricQl ql(c);
  ql.run();
  const auto& values = ql.values();
  const auto& rows = ql.vectors_by_row();

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return values[a] > values[b]; });

  out.eigenvalues.resize(n);
  out.eigenvectors = Matrix(n, n);
  for (std::size_t j = 0; j < n; ++j) {
    out.eigenvalues[j] = values[order[j]];
    const auto v = rows.row(order[j]);
    for (std::size_t i = 0; i < n; ++i) out.eigenvectors(i, j) = v[i];
    canonicalize_sign(out.eigenvectors, j);
  }
  return out;
}

EigenPair top_k_eigen(const Matrix& c, std::size_t k, double tolerance) {
  if (c.rows() != c.cols()) throw Error("linalg.shape", "top_k_eigen needs a square matrix");
  const std::size_t d = c.rows();
  if (k < 1 || k > d)
    throw Error("linalg.precondition",
                "top_k_eigen: k=" + std::to_string(k) + " outside [1, " + std::to_string(d) + "]");
  const double scale = std::max(1.0, c.frobenius_norm());
  const double asym = asymmetry(c);
  if (!(asym <= tolerance * scale)) {
    std::ostringstream msg;
    msg << "top_k_eigen: matrix is not symmetric (max asymmetry " << asym << ")";
    throw Error("linalg.not_symmetric", msg.str());
  }

  EigenPair full = symmetric_eigen(c);
  EigenPair out;
  out.eigenvalues.assign(full.eigenvalues.begin(), full.eigenvalues.begin() + static_cast<long>(k));
  out.eigenvectors = Matrix(d, k);
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t j = 0; j < k; ++j) out.eigenvectors(i, j) = full.eigenvectors(i, j);

  const auto res = residuals(c, out);
  for (std::size_t j = 0; j < k; ++j) {
    if (!(res[j] <= tolerance * scale)) {
      std::ostringstream msg;
      msg << "top_k_eigen: eigenpair " << j << " residual " << res[j] << " exceeds bound "
          << tolerance * scale;
      throw Error("linalg.no_convergence", msg.str());
    }
  }
  return out;
}

}  // namespace lift::linalg
