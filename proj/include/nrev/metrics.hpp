#pragma once

#include <cstdint>
#include <span>

#include "nrev/pipeline.hpp"

namespace nrev {

struct RecoveryMetrics {
  double rmse_noisy = 0.0;
  double rmse_recovered = 0.0;
  // rmse_noisy / rmse_recovered; +inf when the recovery is exact.
  double improvement_factor = 0.0;
  double residual_cost = 0.0;
  std::int64_t budget_used = 0;
  int edge_trim = 0;
};

double rmse(std::span<const std::int64_t> a, std::span<const std::int64_t> b);
double rmse(std::span<const double> a, std::span<const double> b);

// Recovery quality of a denoise run against the ground truth. edge_trim
// drops that many pixels from every border before computing the RMSEs
// (residual_cost stays full-frame; it is a property of the run).
RecoveryMetrics compute_metrics(std::span<const std::int64_t> truth,
                                std::span<const std::int64_t> measured,
                                const DenoiseResult& result, int edge_trim = 0);

}  // namespace nrev
