#include "nrev/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "nrev/rng.hpp"

namespace nrev {

MeasuredFrame Image2D::column(std::size_t c) const {
  MeasuredFrame frame;
  frame.counts.resize(rows);
  for (std::size_t r = 0; r < rows; ++r) frame.counts[r] = at(r, c);
  return frame;
}

void Image2D::set_column(std::size_t c, std::span<const std::int64_t> values) {
  if (values.size() != rows) throw std::invalid_argument("set_column: length mismatch");
  for (std::size_t r = 0; r < rows; ++r) at(r, c) = values[r];
}

namespace {

void check_image(const Image2D& image) {
  if (image.rows < 5) throw std::invalid_argument("image needs at least 5 rows");
  if (image.cols < 1) throw std::invalid_argument("image needs at least 1 column");
  if (image.counts.size() != image.rows * image.cols)
    throw std::invalid_argument("image counts size does not match dimensions");
  for (std::int64_t v : image.counts) {
    if (v < 0) throw std::invalid_argument("image counts must be nonnegative");
  }
}

std::int64_t field_sum(std::span<const std::int64_t> v) {
  return std::accumulate(v.begin(), v.end(), static_cast<std::int64_t>(0));
}

std::int64_t total_iterations(const SolveReport& report) {
  std::int64_t iters = 0;
  for (const auto& r : report.per_restart) iters += r.iterations_used;
  return iters;
}

// Consecutive [start, end) blocks covering [0, len): boundaries at
// shift, shift + size, ...; blocks shorter than the stencil minimum merge
// into their neighbor.
std::vector<std::pair<int, int>> make_blocks(int len, int size, int shift) {
  constexpr int kMinBlock = 5;
  std::vector<int> bounds{0};
  for (int b = shift > 0 ? shift : size; b < len; b += size) bounds.push_back(b);
  bounds.push_back(len);
  std::vector<std::pair<int, int>> blocks;
  for (std::size_t k = 0; k + 1 < bounds.size(); ++k)
    blocks.emplace_back(bounds[k], bounds[k + 1]);
  if (blocks.size() > 1 && blocks.front().second - blocks.front().first < kMinBlock) {
    blocks[1].first = blocks.front().first;
    blocks.erase(blocks.begin());
  }
  if (blocks.size() > 1 && blocks.back().second - blocks.back().first < kMinBlock) {
    blocks[blocks.size() - 2].second = blocks.back().second;
    blocks.pop_back();
  }
  return blocks;
}

RealVec recovered_estimate(const MeasuredFrame& frame, std::span<const std::int64_t> noise) {
  RealVec est(frame.counts.size());
  for (std::size_t i = 0; i < est.size(); ++i)
    est[i] = static_cast<double>(frame.counts[i]) - static_cast<double>(noise[i]);
  return est;
}

// Cost of a block over the global interior residuals it owns. Residuals that
// straddle the block boundary keep their out-of-block pixels frozen at the
// given field snapshot, so every seam term is optimized by exactly one block
// against the neighbors' previous-pass estimates.
SumConstrainedPolynomial build_block_cost_form(const MeasuredFrame& frame,
                                               std::span<const std::int64_t> frozen_field,
                                               int start, int end, std::int64_t budget) {
  const int p = frame.size();
  const int width = end - start;
  auto poly = SumConstrainedPolynomial::zero(width, budget);
  const auto& m = frame.counts;
  std::map<std::pair<int, int>, double> quad;
  const int lo = std::max(start, 1);
  const int hi = std::min(end, p - 1);
  for (int i = lo; i < hi; ++i) {
    const int idx[3] = {i - 1, i, i + 1};
    const double coef[3] = {0.5, -1.0, 0.5};
    double a = 0.0;
    int local[3];
    double local_coef[3];
    int terms = 0;
    for (int t = 0; t < 3; ++t) {
      const int j = idx[t];
      // The measured part always lands in the affine constant; the noise
      // variable does too when it lies outside the block.
      a -= coef[t] * static_cast<double>(m[static_cast<std::size_t>(j)]);
      if (j >= start && j < end) {
        local[terms] = j - start;
        local_coef[terms] = coef[t];
        ++terms;
      } else {
        a += coef[t] * static_cast<double>(frozen_field[static_cast<std::size_t>(j)]);
      }
    }
    poly.constant += a * a;
    for (int t = 0; t < terms; ++t)
      poly.linear[static_cast<std::size_t>(local[t])] += 2.0 * a * local_coef[t];
    for (int t1 = 0; t1 < terms; ++t1) {
      for (int t2 = 0; t2 < terms; ++t2) {
        const auto key = std::minmax(local[t1], local[t2]);
        quad[{key.first, key.second}] += local_coef[t1] * local_coef[t2];
      }
    }
  }
  for (const auto& [key, w] : quad) {
    if (w != 0.0) poly.quadratic.push_back({key.first, key.second, w});
  }
  return poly;
}

}  // namespace

IntVec allocate_budget(std::span<const std::int64_t> totals_per_unit,
                       std::int64_t grand_total, BudgetPolicy policy) {
  if (totals_per_unit.empty()) throw std::invalid_argument("allocate_budget: no units");
  if (grand_total < 0) throw std::invalid_argument("allocate_budget: negative total");
  std::int64_t sum = 0;
  for (std::int64_t t : totals_per_unit) {
    if (t < 0) throw std::invalid_argument("allocate_budget: negative unit total");
    sum += t;
  }
  const std::size_t k = totals_per_unit.size();
  RealVec shares(k);
  if (policy == BudgetPolicy::proportional && sum > 0) {
    for (std::size_t i = 0; i < k; ++i)
      shares[i] = static_cast<double>(grand_total) * static_cast<double>(totals_per_unit[i]) /
                  static_cast<double>(sum);
  } else {
    std::fill(shares.begin(), shares.end(),
              static_cast<double>(grand_total) / static_cast<double>(k));
  }
  return round_to_integers(shares, grand_total);
}

DenoiseResult denoise_1d(const MeasuredFrame& frame, std::int64_t noise_total,
                         BoundaryPolicy boundary, const SolverConfig& config) {
  const auto poly = build_cost_form(frame, boundary, noise_total);
  auto report = mean_field_solve(poly, config);

  DenoiseResult result;
  result.rows = 1;
  result.cols = frame.counts.size();
  result.noise_field = report.best;
  result.recovered.resize(frame.counts.size());
  for (std::size_t i = 0; i < frame.counts.size(); ++i)
    result.recovered[i] = frame.counts[i] - result.noise_field[i];
  result.final_cost = residual_cost(frame, boundary, std::span<const std::int64_t>(result.noise_field));
  result.diagnostics.push_back(
      {1, 0, noise_total, report.best_energy, total_iterations(report)});
  result.passes_completed = 1;
  result.solve = std::move(report);
  return result;
}

DenoiseResult denoise_1d_blocked(const MeasuredFrame& frame, std::int64_t noise_total,
                                 int block_size, int passes, BudgetPolicy policy,
                                 const SolverConfig& config) {
  const int p = frame.size();
  if (block_size < 5) throw std::invalid_argument("denoise_1d_blocked: block_size must be >= 5");
  if (passes < 1) throw std::invalid_argument("denoise_1d_blocked: passes must be >= 1");
  if (block_size >= p && passes == 1)
    return denoise_1d(frame, noise_total, BoundaryPolicy::interior, config);

  DenoiseResult result;
  result.rows = 1;
  result.cols = static_cast<std::size_t>(p);

  IntVec budgets;
  SolverConfig block_config = config;
  block_config.iteration_observer = nullptr;
  for (int pass = 1; pass <= passes; ++pass) {
    const int shift = ((pass - 1) * (block_size / 2)) % block_size;
    const auto blocks = make_blocks(p, block_size, shift);
    budgets.clear();
    if (pass == 1) {
      IntVec block_sums;
      for (const auto& [start, end] : blocks) {
        std::int64_t s = 0;
        for (int i = start; i < end; ++i) s += frame.counts[static_cast<std::size_t>(i)];
        block_sums.push_back(s);
      }
      budgets = allocate_budget(block_sums, noise_total, policy);
      // Uniform in-block spread as the first frozen context.
      result.noise_field.assign(static_cast<std::size_t>(p), 0);
      for (std::size_t b = 0; b < blocks.size(); ++b) {
        const auto [start, end] = blocks[b];
        const RealVec shares(static_cast<std::size_t>(end - start),
                             static_cast<double>(budgets[b]) / static_cast<double>(end - start));
        const auto spread = round_to_integers(shares, budgets[b]);
        for (int i = start; i < end; ++i)
          result.noise_field[static_cast<std::size_t>(i)] =
              spread[static_cast<std::size_t>(i - start)];
      }
    } else {
      // Later passes redistribute the field itself over the shifted blocks.
      for (const auto& [start, end] : blocks) {
        std::int64_t s = 0;
        for (int i = start; i < end; ++i) s += result.noise_field[static_cast<std::size_t>(i)];
        budgets.push_back(s);
      }
    }

    // Jacobi sweep: every block of this pass sees the same field snapshot,
    // so block solves stay independent within a pass.
    const IntVec snapshot = result.noise_field;
    for (std::size_t b = 0; b < blocks.size(); ++b) {
      const auto [start, end] = blocks[b];
      block_config.seed = mix_stream(config.seed, kStreamBlock,
                                     static_cast<std::uint64_t>(pass),
                                     static_cast<std::uint64_t>(b));
      const auto poly = build_block_cost_form(frame, snapshot, start, end, budgets[b]);
      const auto report = mean_field_solve(poly, block_config);

      IntVec incumbent(snapshot.begin() + start, snapshot.begin() + end);
      const std::int64_t moves = block_config.local_search_moves >= 0
                                     ? block_config.local_search_moves
                                     : static_cast<std::int64_t>(10) * (end - start);
      incumbent = integer_local_search(poly, std::move(incumbent), moves);
      const double incumbent_energy =
          evaluate(poly, std::span<const std::int64_t>(incumbent));
      double energy = report.best_energy;
      std::span<const std::int64_t> chosen(report.best);
      if (incumbent_energy < energy) {
        chosen = std::span<const std::int64_t>(incumbent);
        energy = incumbent_energy;
      }
      for (int i = start; i < end; ++i)
        result.noise_field[static_cast<std::size_t>(i)] = chosen[static_cast<std::size_t>(i - start)];
      result.diagnostics.push_back({pass, static_cast<int>(b), budgets[b], energy,
                                    total_iterations(report)});
    }
  }

  result.recovered.resize(static_cast<std::size_t>(p));
  for (int i = 0; i < p; ++i)
    result.recovered[static_cast<std::size_t>(i)] =
        frame.counts[static_cast<std::size_t>(i)] -
        result.noise_field[static_cast<std::size_t>(i)];
  result.final_cost =
      residual_cost(frame, BoundaryPolicy::interior, std::span<const std::int64_t>(result.noise_field));
  result.passes_completed = passes;
  return result;
}

DenoiseResult denoise_2d(const Image2D& image, std::int64_t noise_total, int sweeps,
                         BudgetPolicy policy, double cross_column_weight,
                         const SolverConfig& config) {
  check_image(image);
  if (sweeps < 1) throw std::invalid_argument("denoise_2d: sweeps must be >= 1");
  if (!(cross_column_weight >= 0.0) || !std::isfinite(cross_column_weight))
    throw std::invalid_argument("denoise_2d: cross_column_weight must be finite and >= 0");

  const std::size_t rows = image.rows;
  const std::size_t cols = image.cols;

  if (cols == 1) {
    auto result = denoise_1d(image.column(0), noise_total, BoundaryPolicy::interior, config);
    result.rows = rows;
    result.cols = 1;
    return result;
  }

  IntVec col_sums(cols, 0);
  for (std::size_t c = 0; c < cols; ++c) {
    for (std::size_t r = 0; r < rows; ++r) col_sums[c] += image.at(r, c);
  }
  const IntVec budgets = allocate_budget(col_sums, noise_total, policy);

  // Start from a uniform in-column spread of each column's budget.
  std::vector<IntVec> field(cols);
  for (std::size_t c = 0; c < cols; ++c) {
    const RealVec shares(rows, static_cast<double>(budgets[c]) / static_cast<double>(rows));
    field[c] = round_to_integers(shares, budgets[c]);
  }

  DenoiseResult result;
  result.rows = rows;
  result.cols = cols;
  SolverConfig column_config = config;
  column_config.iteration_observer = nullptr;

  for (int sweep = 1; sweep <= sweeps; ++sweep) {
    for (std::size_t c = 0; c < cols; ++c) {
      const MeasuredFrame frame = image.column(c);
      auto poly = build_cost_form(frame, BoundaryPolicy::interior, budgets[c]);
      if (cross_column_weight > 0.0) {
        CrossColumnContext ctx;
        ctx.weight = cross_column_weight;
        if (c > 0) ctx.left = recovered_estimate(image.column(c - 1), field[c - 1]);
        if (c + 1 < cols) ctx.right = recovered_estimate(image.column(c + 1), field[c + 1]);
        poly = augment_cross_column(poly, frame, ctx);
      }
      column_config.seed = mix_stream(config.seed, kStreamColumn,
                                      static_cast<std::uint64_t>(sweep),
                                      static_cast<std::uint64_t>(c));
      const auto report = mean_field_solve(poly, column_config);

      // Incumbent guard: polish the current assignment under the same frozen
      // neighbors and keep whichever is lower.
      const std::int64_t moves = column_config.local_search_moves >= 0
                                     ? column_config.local_search_moves
                                     : static_cast<std::int64_t>(10 * rows);
      IntVec incumbent = integer_local_search(poly, field[c], moves);
      const double incumbent_energy =
          evaluate(poly, std::span<const std::int64_t>(incumbent));
      double energy = report.best_energy;
      if (incumbent_energy < energy) {
        field[c] = std::move(incumbent);
        energy = incumbent_energy;
      } else {
        field[c] = report.best;
      }
      result.diagnostics.push_back({sweep, static_cast<int>(c), budgets[c], energy,
                                    total_iterations(report)});
    }
  }

  result.noise_field.resize(rows * cols);
  result.recovered.resize(rows * cols);
  for (std::size_t c = 0; c < cols; ++c) {
    for (std::size_t r = 0; r < rows; ++r) {
      result.noise_field[r * cols + c] = field[c][r];
      result.recovered[r * cols + c] = image.at(r, c) - field[c][r];
    }
  }
  result.final_cost = objective_2d(image, result.noise_field, cross_column_weight);
  result.passes_completed = sweeps;
  return result;
}

double objective_2d(const Image2D& image, std::span<const std::int64_t> noise_field,
                    double cross_column_weight) {
  check_image(image);
  if (noise_field.size() != image.counts.size())
    throw std::invalid_argument("objective_2d: field size mismatch");
  const std::size_t rows = image.rows;
  const std::size_t cols = image.cols;
  double acc = 0.0;
  for (std::size_t c = 0; c < cols; ++c) {
    IntVec col_noise(rows);
    for (std::size_t r = 0; r < rows; ++r) col_noise[r] = noise_field[r * cols + c];
    acc += residual_cost(image.column(c), BoundaryPolicy::interior,
                         std::span<const std::int64_t>(col_noise));
  }
  if (cross_column_weight > 0.0 && cols > 1) {
    auto recovered = [&](std::size_t r, std::size_t c) {
      return static_cast<double>(image.at(r, c)) -
             static_cast<double>(noise_field[r * cols + c]);
    };
    for (std::size_t c = 0; c < cols; ++c) {
      for (std::size_t r = 0; r < rows; ++r) {
        double a = 0.0;
        int present = 0;
        if (c > 0) {
          a += recovered(r, c - 1);
          ++present;
        }
        if (c + 1 < cols) {
          a += recovered(r, c + 1);
          ++present;
        }
        a /= present;
        const double d = recovered(r, c) - a;
        acc += cross_column_weight * d * d;
      }
    }
  }
  return acc;
}

std::vector<std::string> check_hardware_profile(const DenoiseResult& result,
                                                const HardwareProfile& profile) {
  std::vector<std::string> warnings;
  const std::size_t p = result.noise_field.size();
  if (p > static_cast<std::size_t>(profile.max_modes)) {
    std::ostringstream os;
    os << p << " pixels exceeds " << profile.max_modes << " modes";
    warnings.push_back(os.str());
  }
  int named = 0;
  std::size_t over = 0;
  for (std::size_t i = 0; i < p; ++i) {
    if (result.noise_field[i] > profile.max_photons_per_mode) {
      ++over;
      if (named < 8) {
        std::ostringstream os;
        os << "pixel " << i << " holds " << result.noise_field[i] << " photons, above "
           << profile.max_photons_per_mode;
        warnings.push_back(os.str());
        ++named;
      }
    }
  }
  if (over > 8) {
    std::ostringstream os;
    os << (over - 8) << " more pixels above " << profile.max_photons_per_mode << " photons";
    warnings.push_back(os.str());
  }
  return warnings;
}

std::vector<std::string> check_hardware_profile(const SumConstrainedPolynomial& poly,
                                                const HardwareProfile& profile) {
  std::vector<std::string> warnings;
  if (poly.num_vars > profile.max_modes) {
    std::ostringstream os;
    os << poly.num_vars << " variables exceeds " << profile.max_modes << " modes";
    warnings.push_back(os.str());
  }
  const std::int64_t capacity =
      static_cast<std::int64_t>(std::min(poly.num_vars, profile.max_modes)) *
      profile.max_photons_per_mode;
  if (poly.sum_budget > capacity) {
    std::ostringstream os;
    os << "budget " << poly.sum_budget << " exceeds machine capacity " << capacity;
    warnings.push_back(os.str());
  }
  return warnings;
}

}  // namespace nrev
