#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "nrev/polynomial.hpp"
#include "nrev/smoothness.hpp"
#include "nrev/solver.hpp"

namespace nrev {

// Photon-count image, row-major. A column is a MeasuredFrame of length rows.
struct Image2D {
  std::size_t rows = 0;
  std::size_t cols = 0;
  IntVec counts;

  std::int64_t at(std::size_t r, std::size_t c) const { return counts[r * cols + c]; }
  std::int64_t& at(std::size_t r, std::size_t c) { return counts[r * cols + c]; }

  MeasuredFrame column(std::size_t c) const;
  void set_column(std::size_t c, std::span<const std::int64_t> values);
};

// How a global noise budget splits across blocks or columns.
enum class BudgetPolicy { uniform, proportional };

struct UnitDiagnostics {
  int pass = 1;   // pass (blocked) or sweep (2D)
  int unit = 0;   // block or column index
  std::int64_t budget = 0;
  double energy = 0.0;        // solver best energy for the unit
  std::int64_t iterations = 0;  // mean-field iterations summed over restarts
};

struct DenoiseResult {
  std::size_t rows = 1;
  std::size_t cols = 0;
  IntVec noise_field;  // sums exactly to the requested budget
  IntVec recovered;    // counts - noise_field; may go negative, kept unclamped
  double final_cost = 0.0;
  std::vector<UnitDiagnostics> diagnostics;
  int passes_completed = 0;
  std::optional<SolveReport> solve;  // full report for single-frame runs
};

struct HardwareProfile {
  int max_modes = 5000;
  std::int64_t max_photons_per_mode = 100;
};

// Nonnegative integers summing exactly to grand_total. uniform: equal real
// shares; proportional: shares scaled to the unit totals (falling back to
// uniform when all totals are zero). Quantized by largest remainder with
// low-index tie-break.
IntVec allocate_budget(std::span<const std::int64_t> totals_per_unit,
                       std::int64_t grand_total, BudgetPolicy policy);

DenoiseResult denoise_1d(const MeasuredFrame& frame, std::int64_t noise_total,
                         BoundaryPolicy boundary, const SolverConfig& config);

// Block decomposition for frames beyond solver reach: pass 1 cuts [0, P)
// into consecutive blocks of block_size (short leftovers merge into a
// neighbor so every block keeps the minimum stencil length), later passes
// shift the boundaries by block_size/2 and re-allocate each new block's
// budget from the current field's block sums. Each block minimizes the
// global interior residuals it owns, with straddling terms held against the
// pass-start field snapshot (Jacobi), so block solves within a pass stay
// independent while seam residuals remain optimized. The global sum is
// preserved exactly across passes.
DenoiseResult denoise_1d_blocked(const MeasuredFrame& frame, std::int64_t noise_total,
                                 int block_size, int passes, BudgetPolicy policy,
                                 const SolverConfig& config);

// Column-by-column 2D sweeps (Gauss-Seidel, left to right): each column's
// cost form is augmented with a variance term against the average of the
// adjacent columns' current recovered estimates, then solved at its fixed
// per-column budget. A column keeps its incumbent assignment whenever the
// incumbent (after local-search polish) beats the fresh solve under the
// same frozen neighbors.
DenoiseResult denoise_2d(const Image2D& image, std::int64_t noise_total, int sweeps,
                         BudgetPolicy policy, double cross_column_weight,
                         const SolverConfig& config);

// The 2D objective at a given noise field: sum of per-column interior
// residuals plus the cross-column variance terms, both computed from the
// field itself. Diagnostic; denoise_2d reports it as final_cost.
double objective_2d(const Image2D& image, std::span<const std::int64_t> noise_field,
                    double cross_column_weight);

// Non-fatal checks against the machine profile (mode count, photons per
// mode). Empty result means the instance fits.
std::vector<std::string> check_hardware_profile(const DenoiseResult& result,
                                                const HardwareProfile& profile = {});
std::vector<std::string> check_hardware_profile(const SumConstrainedPolynomial& poly,
                                                const HardwareProfile& profile = {});

}  // namespace nrev
