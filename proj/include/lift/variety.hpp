#pragma once

#include <span>
#include <string>
#include <vector>

#include "lift/dataset.hpp"
#include "lift/gateway.hpp"
#include "lift/linalg.hpp"

namespace lift {

struct VarietyConfig {
  int reduced_dim = 32;          // clamped to the embedding dimension
  double keep_fraction = 0.20;   // in (0, 1]
  double eigen_tolerance = 1e-10;
  bool whiten = false;           // divide reduced coordinates by sqrt(eigenvalue)
};

void validate(const VarietyConfig& cfg);

/// n×k coordinates of each item in the leading principal directions.
struct ReducedFeatures {
  std::size_t rows = 0;
  std::size_t dims = 0;
  std::vector<double> values;
  std::vector<std::string> row_ids;

  std::span<const double> row(std::size_t i) const { return {values.data() + i * dims, dims}; }
};

/// Mean-centred sample covariance XcᵀXc / (n − 1). Exactly symmetric.
linalg::Matrix covariance(const EmbeddingMatrix& x);

/// R = Xc·V. With `whiten`, column j is divided by sqrt(λ_j) (zeroed when λ_j
/// is numerically zero).
ReducedFeatures project(const EmbeddingMatrix& x, const linalg::EigenPair& e, bool whiten = false);

/// Population variance of each row's k coordinates.
std::vector<double> row_variances(const ReducedFeatures& r);

/// ⌈fraction·n⌉, guarded against floating-point noise in the product.
std::size_t selection_count(std::size_t n, double fraction);

/// Ids of the ⌈fraction·n⌉ highest scores; ties go to the lexicographically
/// smaller id. Returned in descending score order.
std::vector<std::string> select_top_fraction(std::span<const double> scores,
                                             std::span<const std::string> ids, double fraction);

struct VarietyDiagnostic {
  std::string id;
  double row_variance = 0.0;
  bool selected = false;
};

struct VarietyResult {
  Dataset curated;                            // selected records in dataset order
  std::vector<VarietyDiagnostic> diagnostics; // one per record, dataset order
  std::vector<double> eigenvalues;
};

/// covariance → top-k eigenpairs → projection → row variances → top fraction.
/// `x` must hold exactly one row per record of `d` (any order).
VarietyResult variety_curate(const Dataset& d, const EmbeddingMatrix& x, const VarietyConfig& cfg);

}  // namespace lift
