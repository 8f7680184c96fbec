#include "nrev/metrics.hpp"

#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace nrev {

namespace {

template <typename T>
double rmse_impl(std::span<const T> a, std::span<const T> b) {
  if (a.size() != b.size()) throw std::invalid_argument("rmse: shape mismatch");
  if (a.empty()) throw std::invalid_argument("rmse: empty input");
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = static_cast<double>(a[i]) - static_cast<double>(b[i]);
    acc += d * d;
  }
  return std::sqrt(acc / static_cast<double>(a.size()));
}

// Flat indices surviving an edge trim of k pixels per border.
std::vector<std::size_t> trimmed_indices(std::size_t rows, std::size_t cols, int trim) {
  if (trim < 0) throw std::invalid_argument("compute_metrics: negative edge_trim");
  const auto k = static_cast<std::size_t>(trim);
  std::vector<std::size_t> idx;
  if (rows == 1) {
    if (2 * k >= cols) throw std::invalid_argument("compute_metrics: trim leaves no pixels");
    for (std::size_t c = k; c < cols - k; ++c) idx.push_back(c);
    return idx;
  }
  if (2 * k >= rows || 2 * k >= cols)
    throw std::invalid_argument("compute_metrics: trim leaves no pixels");
  for (std::size_t r = k; r < rows - k; ++r) {
    for (std::size_t c = k; c < cols - k; ++c) idx.push_back(r * cols + c);
  }
  return idx;
}

}  // namespace

double rmse(std::span<const std::int64_t> a, std::span<const std::int64_t> b) {
  return rmse_impl(a, b);
}

double rmse(std::span<const double> a, std::span<const double> b) { return rmse_impl(a, b); }

RecoveryMetrics compute_metrics(std::span<const std::int64_t> truth,
                                std::span<const std::int64_t> measured,
                                const DenoiseResult& result, int edge_trim) {
  const std::size_t n = result.rows * result.cols;
  if (truth.size() != n || measured.size() != n || result.recovered.size() != n)
    throw std::invalid_argument("compute_metrics: shape mismatch");

  const auto idx = trimmed_indices(result.rows, result.cols, edge_trim);
  double acc_noisy = 0.0;
  double acc_recovered = 0.0;
  for (std::size_t i : idx) {
    const double dn = static_cast<double>(measured[i]) - static_cast<double>(truth[i]);
    const double dr = static_cast<double>(result.recovered[i]) - static_cast<double>(truth[i]);
    acc_noisy += dn * dn;
    acc_recovered += dr * dr;
  }
  RecoveryMetrics metrics;
  metrics.rmse_noisy = std::sqrt(acc_noisy / static_cast<double>(idx.size()));
  metrics.rmse_recovered = std::sqrt(acc_recovered / static_cast<double>(idx.size()));
  metrics.improvement_factor = metrics.rmse_recovered == 0.0
                                   ? std::numeric_limits<double>::infinity()
                                   : metrics.rmse_noisy / metrics.rmse_recovered;
  metrics.residual_cost = result.final_cost;
  metrics.budget_used = std::accumulate(result.noise_field.begin(), result.noise_field.end(),
                                        static_cast<std::int64_t>(0));
  metrics.edge_trim = edge_trim;
  return metrics;
}

}  // namespace nrev
