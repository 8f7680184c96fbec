#pragma once

#include <cstdint>
#include <functional>
#include <limits>
#include <stdexcept>

#include "nrev/polynomial.hpp"

namespace nrev {

// Knobs of the mean-field loop emulation. Defaults are the reference
// operating point; local_search_moves < 0 resolves to 10 * num_vars.
struct SolverConfig {
  int restarts = 32;
  int max_iterations = 2000;
  double step_size = 0.05;
  double noise_sigma0 = 0.2;      // initial log-domain noise amplitude
  double noise_decay = 0.995;     // geometric decay per iteration, in (0,1]
  double convergence_tol = 1e-9;  // relative energy change over the window
  int convergence_window = 50;
  std::uint64_t seed = 0;
  std::int64_t local_search_moves = -1;
  double dirichlet_concentration = 1.0;
  int threads = 0;  // 0 = hardware concurrency

  // Test instrumentation: called after every renormalization with the
  // current continuous point. Forces serial restart execution when set.
  std::function<void(int restart, int iteration, std::span<const double>)>
      iteration_observer;
};

struct RestartStats {
  double final_energy = std::numeric_limits<double>::infinity();
  int iterations_used = 0;
  bool converged = false;
  bool aborted = false;  // non-finite energy encountered; restart discarded
};

struct SolveReport {
  IntVec best;
  double best_energy = std::numeric_limits<double>::infinity();
  std::vector<RestartStats> per_restart;
  RealVec energy_trace;  // continuous-relaxation energies of the winning restart
  double wall_time = 0.0;
  std::uint64_t seed = 0;
  int best_restart = -1;
};

// All restarts hit non-finite energies; nothing to report.
struct SolverFailure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Minimizes poly over nonnegative integer points with fixed sum. Each
// restart draws a Dirichlet start scaled to the budget, runs multiplicative
// mirror descent with annealed log-domain Gaussian noise,
//
//   w_i = v_i * exp(-eta * g_i + sigma_t * xi_i),   v <- N * w / sum(w),
//
// then quantizes with round_to_integers and polishes with
// integer_local_search. Restart r draws from a substream of (seed, r), so
// reports are bit-identical across reruns and thread counts, and the best
// over the first k restarts is independent of the total restart count.
SolveReport mean_field_solve(const SumConstrainedPolynomial& poly,
                             const SolverConfig& config);

// Largest-remainder quantization: floors, then one unit to each of the
// largest fractional parts (ties to the lower index). Output sums to total
// exactly; requires nonnegative input summing to total within 1e-6 relative.
IntVec round_to_integers(std::span<const double> point, std::int64_t total);

// First-improvement descent over single-unit transfers: scans ordered pairs
// (i, j) in row-major order, applies the first move that strictly lowers the
// energy, rescans; stops when no move improves or max_moves were applied.
IntVec integer_local_search(const SumConstrainedPolynomial& poly, IntVec start,
                            std::int64_t max_moves);

struct BruteForceResult {
  IntVec best;
  double energy = std::numeric_limits<double>::infinity();
  std::uint64_t visited = 0;
};

// Number of weak compositions of n into p parts, i.e. C(n+p-1, p-1),
// saturated at UINT64_MAX on overflow.
std::uint64_t count_compositions(std::int64_t n, int p);

// Exact minimum by enumerating every weak composition in ascending
// lexicographic order (ties therefore resolve to the lexicographically
// smallest assignment). Refuses instances above cap, quoting the count.
BruteForceResult brute_force(const SumConstrainedPolynomial& poly,
                             std::uint64_t cap = 5'000'000);

}  // namespace nrev
