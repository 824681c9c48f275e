#include "lift/variety.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <unordered_map>

#include "lift/error.hpp"

namespace lift {

void validate(const VarietyConfig& cfg) {
  if (cfg.reduced_dim < 2) throw Error("config.variety", "reduced_dim must be >= 2");
  if (!(cfg.keep_fraction > 0.0 && cfg.keep_fraction <= 1.0))
    throw Error("config.variety", "keep_fraction must lie in (0, 1]");
  if (!(cfg.eigen_tolerance > 0.0)) throw Error("config.variety", "eigen_tolerance must be positive");
}

namespace {

std::vector<double> column_means(const EmbeddingMatrix& x) {
  std::vector<double> mean(x.dims, 0.0);
  for (std::size_t r = 0; r < x.rows; ++r) {
    const auto row = x.row(r);
    for (std::size_t j = 0; j < x.dims; ++j) mean[j] += row[j];
  }
  for (double& m : mean) m /= static_cast<double>(x.rows);
  return mean;
}

}  // namespace

linalg::Matrix covariance(const EmbeddingMatrix& x) {
  if (x.rows < 2)
    throw Error("variety.too_few_rows", "covariance needs at least 2 rows, got " + std::to_string(x.rows));
  validate(x);
  const std::size_t n = x.rows;
  const std::size_t d = x.dims;
  const auto mean = column_means(x);

  linalg::Matrix c(d, d);
  std::vector<double> centred(d);
  for (std::size_t r = 0; r < n; ++r) {
    const auto row = x.row(r);
    for (std::size_t j = 0; j < d; ++j) centred[j] = row[j] - mean[j];
    for (std::size_t i = 0; i < d; ++i) {
      const double ci = centred[i];
      if (ci == 0.0) continue;
      double* out = &c(i, 0);
      for (std::size_t j = i; j < d; ++j) out[j] += ci * centred[j];
    }
  }
  const double denom = static_cast<double>(n - 1);
  for (std::size_t i = 0; i < d; ++i) {
    for (std::size_t j = i; j < d; ++j) {
      c(i, j) /= denom;
      c(j, i) = c(i, j);
    }
  }
  return c;
}

ReducedFeatures project(const EmbeddingMatrix& x, const linalg::EigenPair& e, bool whiten) {
  const auto& v = e.eigenvectors;
  if (v.rows() != x.dims || v.cols() != e.eigenvalues.size())
    throw Error("variety.shape", "eigenvector basis is " + std::to_string(v.rows()) + "x" +
                                     std::to_string(v.cols()) + " but embeddings have " +
                                     std::to_string(x.dims) + " dimensions");
  const std::size_t k = v.cols();
  const auto mean = column_means(x);

  ReducedFeatures r;
  r.rows = x.rows;
  r.dims = k;
  r.values.assign(x.rows * k, 0.0);
  r.row_ids = x.row_ids;
  const linalg::Matrix vt = v.transposed();
  std::vector<double> centred(x.dims);
  for (std::size_t i = 0; i < x.rows; ++i) {
    const auto row = x.row(i);
    for (std::size_t j = 0; j < x.dims; ++j) centred[j] = row[j] - mean[j];
    for (std::size_t c = 0; c < k; ++c) {
      const auto basis = vt.row(c);
      r.values[i * k + c] = std::inner_product(centred.begin(), centred.end(), basis.begin(), 0.0);
    }
  }
  if (whiten) {
    const double floor = std::max(1.0, e.eigenvalues.empty() ? 0.0 : std::abs(e.eigenvalues[0])) * 1e-12;
    for (std::size_t c = 0; c < k; ++c) {
      const double lambda = e.eigenvalues[c];
      const double s = lambda > floor ? 1.0 / std::sqrt(lambda) : 0.0;
      for (std::size_t i = 0; i < x.rows; ++i) r.values[i * k + c] *= s;
    }
  }
  return r;
}

std::vector<double> row_variances(const ReducedFeatures& r) {
  if (r.dims < 2) throw Error("variety.degenerate", "row variance needs at least 2 reduced dimensions");
  std::vector<double> out(r.rows);
  const double k = static_cast<double>(r.dims);
  for (std::size_t i = 0; i < r.rows; ++i) {
    const auto row = r.row(i);
    const double mean = std::accumulate(row.begin(), row.end(), 0.0) / k;
    double s = 0.0;
    for (double x : row) s += (x - mean) * (x - mean);
    out[i] = s / k;
  }
  return out;
}

std::size_t selection_count(std::size_t n, double fraction) {
  if (!(fraction > 0.0 && fraction <= 1.0))
    throw Error("variety.precondition", "selection fraction must lie in (0, 1]");
  if (n == 0) return 0;
  const double raw = fraction * static_cast<double>(n);
  const auto m = static_cast<std::size_t>(std::ceil(raw - 1e-9 * std::max(1.0, raw)));
  return std::clamp<std::size_t>(m, 1, n);
}

std::vector<std::string> select_top_fraction(std::span<const double> scores,
                                             std::span<const std::string> ids, double fraction) {
  if (scores.size() != ids.size())
    throw Error("variety.shape", "score and id sequences differ in length");
  const std::size_t m = selection_count(scores.size(), fraction);
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  auto better = [&](std::size_t a, std::size_t b) {
    if (scores[a] != scores[b]) return scores[a] > scores[b];
    return ids[a] < ids[b];
  };
  std::partial_sort(order.begin(), order.begin() + static_cast<long>(m), order.end(), better);
  std::vector<std::string> out;
  out.reserve(m);
  for (std::size_t i = 0; i < m; ++i) out.push_back(ids[order[i]]);
  return out;
}

VarietyResult variety_curate(const Dataset& d, const EmbeddingMatrix& x, const VarietyConfig& cfg) {
  validate(cfg);
  if (x.rows != d.size())
    throw Error("variety.alignment", "embedding rows (" + std::to_string(x.rows) +
                                         ") do not match dataset size (" + std::to_string(d.size()) + ")");
  std::unordered_map<std::string_view, std::size_t> row_of;
  for (std::size_t i = 0; i < x.rows; ++i) row_of.emplace(x.row_ids[i], i);
  for (const auto& r : d.records)
    if (!row_of.contains(r.id))
      throw Error("variety.alignment", "no embedding row for record \"" + r.id + "\"");

  const linalg::Matrix c = covariance(x);
  const std::size_t k = std::min<std::size_t>(static_cast<std::size_t>(cfg.reduced_dim), x.dims);
  const auto eigen = linalg::top_k_eigen(c, k, cfg.eigen_tolerance);
  const auto reduced = project(x, eigen, cfg.whiten);
  const auto variances = row_variances(reduced);

  const auto chosen = select_top_fraction(variances, x.row_ids, cfg.keep_fraction);
  std::unordered_map<std::string_view, bool> is_selected;
  for (const auto& id : chosen) is_selected.emplace(id, true);

  VarietyResult out;
  out.curated.task_profile = d.task_profile;
  out.eigenvalues = eigen.eigenvalues;
  for (const auto& r : d.records) {
    const bool sel = is_selected.contains(r.id);
    out.diagnostics.push_back({r.id, variances[row_of.at(r.id)], sel});
    if (sel) out.curated.records.push_back(r);
  }
  return out;
}

}  // namespace lift
