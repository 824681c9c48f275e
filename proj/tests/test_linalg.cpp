#include <doctest.h>

#include <cmath>
#include <random>

#include "lift/error.hpp"
#include "lift/linalg.hpp"
#include "oracles.hpp"

using namespace lift;
using linalg::Matrix;

namespace {

Matrix to_matrix(const oracle::Dense& d) { return Matrix::from_rows(d); }

double orthonormality_error(const Matrix& v) {
  double worst = 0.0;
  for (std::size_t a = 0; a < v.cols(); ++a)
    for (std::size_t b = 0; b < v.cols(); ++b) {
      double dot = 0.0;
      for (std::size_t i = 0; i < v.rows(); ++i) dot += v(i, a) * v(i, b);
      worst = std::max(worst, std::abs(dot - (a == b ? 1.0 : 0.0)));
    }
  return worst;
}

}  // namespace

TEST_CASE("identity: eigenvalues are all one") {
  const auto e = linalg::top_k_eigen(Matrix::identity(3), 2);
  REQUIRE(e.eigenvalues.size() == 2);
  CHECK(e.eigenvalues[0] == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(e.eigenvalues[1] == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(orthonormality_error(e.eigenvectors) < 1e-12);
}

TEST_CASE("2x2 hand example") {
  const auto c = Matrix::from_rows({{4, 2}, {2, 4}});
  const auto e = linalg::top_k_eigen(c, 2);
  CHECK(e.eigenvalues[0] == doctest::Approx(6.0).epsilon(1e-14));
  CHECK(e.eigenvalues[1] == doctest::Approx(2.0).epsilon(1e-14));
  const double h = 1.0 / std::sqrt(2.0);
  CHECK(std::abs(e.eigenvectors(0, 0) - h) < 1e-12);
  CHECK(std::abs(e.eigenvectors(1, 0) - h) < 1e-12);
  // (1,-1)/sqrt2 with ties broken towards the first index.
  CHECK(std::abs(e.eigenvectors(0, 1) - h) < 1e-12);
  CHECK(std::abs(e.eigenvectors(1, 1) + h) < 1e-12);
}

TEST_CASE("random symmetric matrices against the Jacobi oracle") {
  std::mt19937_64 rng(6);
  for (int trial = 0; trial < 300; ++trial) {
    const std::size_t d = 1 + rng() % 10;
    const double scale = std::pow(10.0, static_cast<int>(rng() % 7) - 3);
    const auto dense = oracle::random_symmetric(rng, d, scale);
    const auto c = to_matrix(dense);
    const std::size_t k = 1 + rng() % d;
    const auto e = linalg::top_k_eigen(c, k);
    const auto o = oracle::jacobi_eigen(dense);
    const double bound = 1e-10 * std::max(1.0, c.frobenius_norm());
    REQUIRE(e.eigenvalues.size() == k);
    for (std::size_t j = 0; j < k; ++j) {
      CHECK(std::abs(e.eigenvalues[j] - o.values[j]) <= 1e-9 * std::max(1.0, std::abs(o.values[0])));
      if (j > 0) CHECK(e.eigenvalues[j - 1] >= e.eigenvalues[j]);
    }
    for (double r : linalg::residuals(c, e)) CHECK(r <= bound);
    CHECK(orthonormality_error(e.eigenvectors) <= 1e-8);
  }
}

TEST_CASE("sign convention: largest component positive") {
  std::mt19937_64 rng(17);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t d = 2 + rng() % 6;
    const auto e = linalg::symmetric_eigen(to_matrix(oracle::random_symmetric(rng, d)));
    for (std::size_t j = 0; j < d; ++j) {
      std::size_t big = 0;
      for (std::size_t i = 1; i < d; ++i)
        if (std::abs(e.eigenvectors(i, j)) > std::abs(e.eigenvectors(big, j))) big = i;
      CHECK(e.eigenvectors(big, j) > 0);
    }
  }
}

TEST_CASE("degenerate and structured spectra") {
  SUBCASE("zero matrix") {
    const auto e = linalg::top_k_eigen(Matrix(4, 4), 4);
    for (double v : e.eigenvalues) CHECK(v == 0.0);
    CHECK(orthonormality_error(e.eigenvectors) < 1e-12);
  }
  SUBCASE("diagonal with repeats") {
    auto c = Matrix::from_rows({{3, 0, 0, 0}, {0, 1, 0, 0}, {0, 0, 3, 0}, {0, 0, 0, -2}});
    const auto e = linalg::top_k_eigen(c, 4);
    CHECK(e.eigenvalues == std::vector<double>{3, 3, 1, -2});
  }
  SUBCASE("rank one") {
    const std::vector<double> u{1, 2, 3, 4, 5};
    Matrix c(5, 5);
    for (std::size_t i = 0; i < 5; ++i)
      for (std::size_t j = 0; j < 5; ++j) c(i, j) = u[i] * u[j];
    const auto e = linalg::top_k_eigen(c, 2);
    CHECK(e.eigenvalues[0] == doctest::Approx(55.0).epsilon(1e-13));
    CHECK(std::abs(e.eigenvalues[1]) < 1e-12);
  }
  SUBCASE("larger random matrix, 64x64") {
    std::mt19937_64 rng(99);
    const auto dense = oracle::random_symmetric(rng, 64);
    const auto c = to_matrix(dense);
    const auto e = linalg::top_k_eigen(c, 8);
    for (double r : linalg::residuals(c, e)) CHECK(r <= 1e-10 * c.frobenius_norm());
    const auto o = oracle::jacobi_eigen(dense);
    for (std::size_t j = 0; j < 8; ++j) CHECK(std::abs(e.eigenvalues[j] - o.values[j]) < 1e-9);
  }
}

TEST_CASE("precondition errors") {
  CHECK_THROWS_AS(linalg::top_k_eigen(Matrix::from_rows({{1, 2}, {3, 1}}), 1), Error);
  CHECK_THROWS_AS(linalg::top_k_eigen(Matrix::identity(3), 0), Error);
  CHECK_THROWS_AS(linalg::top_k_eigen(Matrix::identity(3), 4), Error);
  CHECK_THROWS_AS(linalg::top_k_eigen(Matrix(2, 3), 1), Error);
  Matrix nan = Matrix::identity(2);
  nan(0, 0) = std::nan("");
  CHECK_THROWS_AS(linalg::top_k_eigen(nan, 1), Error);
}
