#include "nrev/solver.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>
#include <sstream>
#include <thread>

#include "nrev/rng.hpp"

namespace nrev {

namespace {

void require_valid(const SumConstrainedPolynomial& poly) {
  auto violations = validate(poly);
  if (violations.empty()) return;
  std::ostringstream os;
  os << "invalid polynomial:";
  for (const auto& v : violations) os << " [" << v << "]";
  throw std::invalid_argument(os.str());
}

void require_valid(const SolverConfig& config) {
  if (config.restarts < 1) throw std::invalid_argument("config: restarts must be >= 1");
  if (config.max_iterations < 1)
    throw std::invalid_argument("config: max_iterations must be >= 1");
  if (!(config.step_size > 0.0)) throw std::invalid_argument("config: step_size must be > 0");
  if (!(config.noise_sigma0 >= 0.0))
    throw std::invalid_argument("config: noise_sigma0 must be >= 0");
  if (!(config.noise_decay > 0.0 && config.noise_decay <= 1.0))
    throw std::invalid_argument("config: noise_decay must be in (0, 1]");
  if (!(config.convergence_tol > 0.0))
    throw std::invalid_argument("config: convergence_tol must be > 0");
  if (config.convergence_window < 1)
    throw std::invalid_argument("config: convergence_window must be >= 1");
  if (!(config.dirichlet_concentration > 0.0))
    throw std::invalid_argument("config: dirichlet_concentration must be > 0");
  if (config.threads < 0) throw std::invalid_argument("config: threads must be >= 0");
}

// Symmetric Hessian of the linear+quadratic part in adjacency form:
// adj[i] holds (j, H_ij) sorted by j, with H_ii = 2 * w_ii.
using Adjacency = std::vector<std::vector<std::pair<int, double>>>;

Adjacency hessian_adjacency(const SumConstrainedPolynomial& poly) {
  Adjacency adj(static_cast<std::size_t>(poly.num_vars));
  for (const auto& q : poly.quadratic) {
    if (q.i == q.j) {
      adj[static_cast<std::size_t>(q.i)].emplace_back(q.i, 2.0 * q.weight);
    } else {
      adj[static_cast<std::size_t>(q.i)].emplace_back(q.j, q.weight);
      adj[static_cast<std::size_t>(q.j)].emplace_back(q.i, q.weight);
    }
  }
  for (auto& row : adj)
    std::sort(row.begin(), row.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });
  return adj;
}

double hessian_entry(const Adjacency& adj, int i, int j) {
  const auto& row = adj[static_cast<std::size_t>(i)];
  auto it = std::lower_bound(row.begin(), row.end(), j,
                             [](const auto& e, int key) { return e.first < key; });
  if (it != row.end() && it->first == j) return it->second;
  return 0.0;
}

// Change of the cubic part under x -> x - e_i + e_j, by re-evaluating only
// the terms that touch i or j.
double cubic_delta(const SumConstrainedPolynomial& poly,
                   const std::vector<std::vector<int>>& cubic_by_var, const IntVec& x,
                   int i, int j) {
  const auto& li = cubic_by_var[static_cast<std::size_t>(i)];
  const auto& lj = cubic_by_var[static_cast<std::size_t>(j)];
  double delta = 0.0;
  auto term_delta = [&](int t) {
    const auto& c = poly.cubic[static_cast<std::size_t>(t)];
    auto val = [&](int idx) {
      double v = static_cast<double>(x[static_cast<std::size_t>(idx)]);
      if (idx == i) v -= 1.0;
      if (idx == j) v += 1.0;
      return v;
    };
    const double before = static_cast<double>(x[static_cast<std::size_t>(c.i)]) *
                          static_cast<double>(x[static_cast<std::size_t>(c.j)]) *
                          static_cast<double>(x[static_cast<std::size_t>(c.k)]);
    delta += c.weight * (val(c.i) * val(c.j) * val(c.k) - before);
  };
  // Merge the two sorted term-id lists, visiting each term once.
  std::size_t a = 0, b = 0;
  while (a < li.size() || b < lj.size()) {
    if (b >= lj.size() || (a < li.size() && li[a] < lj[b])) {
      term_delta(li[a++]);
    } else if (a >= li.size() || lj[b] < li[a]) {
      term_delta(lj[b++]);
    } else {
      term_delta(li[a]);
      ++a;
      ++b;
    }
  }
  return delta;
}

struct RestartOutcome {
  IntVec assignment;
  double energy = std::numeric_limits<double>::infinity();
  RestartStats stats;
  RealVec trace;
};

RestartOutcome run_restart(const SumConstrainedPolynomial& poly, const SolverConfig& config,
                           int restart) {
  const int p = poly.num_vars;
  const double n = static_cast<double>(poly.sum_budget);
  SplitMix64 rng(mix_stream(config.seed, kStreamRestart, static_cast<std::uint64_t>(restart)));

  RestartOutcome out;
  RealVec v(static_cast<std::size_t>(p));
  double total = 0.0;
  for (auto& x : v) {
    x = rng.gamma(config.dirichlet_concentration);
    total += x;
  }
  if (total > 0.0 && std::isfinite(total)) {
    for (auto& x : v) x *= n / total;
  } else {
    std::fill(v.begin(), v.end(), n / p);
  }

  RealVec g, shift(static_cast<std::size_t>(p)), w(static_cast<std::size_t>(p));
  double sigma = config.noise_sigma0;
  int iter = 0;
  bool converged = false;
  bool aborted = false;
  try {
    out.trace.push_back(evaluate(poly, v));
    for (iter = 0; iter < config.max_iterations; ++iter) {
      gradient_into(poly, v, g);
      double max_shift = -std::numeric_limits<double>::infinity();
      for (int i = 0; i < p; ++i) {
        shift[static_cast<std::size_t>(i)] =
            -config.step_size * g[static_cast<std::size_t>(i)] + sigma * rng.normal();
        if (v[static_cast<std::size_t>(i)] > 0.0)
          max_shift = std::max(max_shift, shift[static_cast<std::size_t>(i)]);
      }
      // exp shifted by the max over live entries; the renormalization below
      // cancels the shift exactly, so this is the same update without
      // overflow. Entries at exactly zero stay zero (multiplicative updates
      // cannot revive them), skipping exp keeps 0 * exp(huge) from going NaN.
      double wsum = 0.0;
      for (int i = 0; i < p; ++i) {
        const double vi = v[static_cast<std::size_t>(i)];
        w[static_cast<std::size_t>(i)] =
            vi == 0.0 ? 0.0
                      : vi * std::exp(shift[static_cast<std::size_t>(i)] - max_shift);
        wsum += w[static_cast<std::size_t>(i)];
      }
      if (!(wsum > 0.0) || !std::isfinite(wsum)) {
        aborted = true;
        break;
      }
      for (int i = 0; i < p; ++i)
        v[static_cast<std::size_t>(i)] = n * w[static_cast<std::size_t>(i)] / wsum;
      sigma *= config.noise_decay;
      const double energy = evaluate(poly, v);
      out.trace.push_back(energy);
      if (config.iteration_observer) config.iteration_observer(restart, iter, v);
      if (static_cast<int>(out.trace.size()) > config.convergence_window) {
        const double prev =
            out.trace[out.trace.size() - 1 - static_cast<std::size_t>(config.convergence_window)];
        if (std::abs(energy - prev) <=
            config.convergence_tol * std::max(1.0, std::abs(energy))) {
          converged = true;
          ++iter;
          break;
        }
      }
    }
  } catch (const std::overflow_error&) {
    aborted = true;
  }

  out.stats.iterations_used = iter;
  out.stats.converged = converged;
  out.stats.aborted = aborted;
  if (aborted) return out;

  IntVec x = round_to_integers(v, poly.sum_budget);
  const std::int64_t moves = config.local_search_moves >= 0
                                 ? config.local_search_moves
                                 : static_cast<std::int64_t>(10) * p;
  x = integer_local_search(poly, std::move(x), moves);
  out.energy = evaluate(poly, x);
  out.stats.final_energy = out.energy;
  out.assignment = std::move(x);
  return out;
}

}  // namespace

SolveReport mean_field_solve(const SumConstrainedPolynomial& poly,
                             const SolverConfig& config) {
  require_valid(poly);
  require_valid(config);
  const auto t0 = std::chrono::steady_clock::now();

  SolveReport report;
  report.seed = config.seed;

  if (poly.sum_budget == 0) {
    report.best.assign(static_cast<std::size_t>(poly.num_vars), 0);
    report.best_energy = evaluate(poly, std::span<const std::int64_t>(report.best));
    report.energy_trace = {report.best_energy};
    report.best_restart = 0;
    report.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return report;
  }

  std::vector<RestartOutcome> outcomes(static_cast<std::size_t>(config.restarts));
  unsigned hw = std::thread::hardware_concurrency();
  if (hw == 0) hw = 1;
  int workers = config.threads == 0 ? static_cast<int>(hw) : config.threads;
  workers = std::min(workers, config.restarts);
  if (config.iteration_observer) workers = 1;

  if (workers <= 1) {
    for (int r = 0; r < config.restarts; ++r)
      outcomes[static_cast<std::size_t>(r)] = run_restart(poly, config, r);
  } else {
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(workers));
    for (int wi = 0; wi < workers; ++wi) {
      pool.emplace_back([&, wi]() {
        for (int r = wi; r < config.restarts; r += workers)
          outcomes[static_cast<std::size_t>(r)] = run_restart(poly, config, r);
      });
    }
    for (auto& th : pool) th.join();
  }

  report.per_restart.reserve(outcomes.size());
  for (int r = 0; r < config.restarts; ++r) {
    auto& o = outcomes[static_cast<std::size_t>(r)];
    report.per_restart.push_back(o.stats);
    if (!o.stats.aborted && o.energy < report.best_energy) {
      report.best_energy = o.energy;
      report.best = o.assignment;
      report.best_restart = r;
    }
  }
  if (report.best_restart < 0)
    throw SolverFailure("mean_field_solve: all restarts aborted on non-finite energy");
  report.energy_trace = std::move(outcomes[static_cast<std::size_t>(report.best_restart)].trace);
  report.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return report;
}

IntVec round_to_integers(std::span<const double> point, std::int64_t total) {
  if (total < 0) throw std::invalid_argument("round_to_integers: total must be >= 0");
  const std::size_t p = point.size();
  double sum = 0.0;
  for (double x : point) {
    if (!(x >= 0.0)) throw std::invalid_argument("round_to_integers: negative entry");
    sum += x;
  }
  if (std::abs(sum - static_cast<double>(total)) >
      1e-6 * std::max(1.0, static_cast<double>(total)))
    throw std::invalid_argument("round_to_integers: point does not sum to the total");

  IntVec out(p);
  std::vector<std::pair<double, std::size_t>> fracs(p);
  std::int64_t assigned = 0;
  for (std::size_t i = 0; i < p; ++i) {
    const double f = std::floor(point[i]);
    out[i] = static_cast<std::int64_t>(f);
    assigned += out[i];
    fracs[i] = {point[i] - f, i};
  }
  std::int64_t remaining = total - assigned;
  if (remaining < 0 || remaining > static_cast<std::int64_t>(p))
    throw std::invalid_argument("round_to_integers: inconsistent remainder");
  std::sort(fracs.begin(), fracs.end(), [](const auto& a, const auto& b) {
    if (a.first != b.first) return a.first > b.first;
    return a.second < b.second;
  });
  for (std::int64_t k = 0; k < remaining; ++k) ++out[fracs[static_cast<std::size_t>(k)].second];
  return out;
}

IntVec integer_local_search(const SumConstrainedPolynomial& poly, IntVec start,
                            std::int64_t max_moves) {
  const int p = poly.num_vars;
  if (static_cast<int>(start.size()) != p)
    throw std::invalid_argument("integer_local_search: start length mismatch");
  std::int64_t sum = 0;
  for (std::int64_t x : start) {
    if (x < 0) throw std::invalid_argument("integer_local_search: negative entry");
    sum += x;
  }
  if (sum != poly.sum_budget)
    throw std::invalid_argument("integer_local_search: start does not meet the sum budget");
  if (max_moves < 0) throw std::invalid_argument("integer_local_search: max_moves must be >= 0");
  if (max_moves == 0 || p < 2) return start;

  const Adjacency adj = hessian_adjacency(poly);
  RealVec diag(static_cast<std::size_t>(p));
  for (int i = 0; i < p; ++i) diag[static_cast<std::size_t>(i)] = hessian_entry(adj, i, i);

  const bool has_cubic = !poly.cubic.empty();
  std::vector<std::vector<int>> cubic_by_var;
  if (has_cubic) {
    cubic_by_var.resize(static_cast<std::size_t>(p));
    for (int t = 0; t < static_cast<int>(poly.cubic.size()); ++t) {
      const auto& c = poly.cubic[static_cast<std::size_t>(t)];
      for (int idx : {c.i, c.j, c.k}) {
        auto& lst = cubic_by_var[static_cast<std::size_t>(idx)];
        if (lst.empty() || lst.back() != t) lst.push_back(t);
      }
    }
  }

  // Gradient of the linear+quadratic part; kept incrementally under moves.
  RealVec g(poly.linear);
  for (int i = 0; i < p; ++i) {
    for (const auto& [j, h] : adj[static_cast<std::size_t>(i)])
      g[static_cast<std::size_t>(i)] += h * static_cast<double>(start[static_cast<std::size_t>(j)]);
  }

  std::int64_t moves = 0;
  bool improved = true;
  while (improved && moves < max_moves) {
    improved = false;
    for (int i = 0; i < p && !improved; ++i) {
      if (start[static_cast<std::size_t>(i)] < 1) continue;
      for (int j = 0; j < p; ++j) {
        if (j == i) continue;
        // Exact energy change for x -> x - e_i + e_j on the quadratic part.
        double delta = g[static_cast<std::size_t>(j)] - g[static_cast<std::size_t>(i)] +
                       0.5 * (diag[static_cast<std::size_t>(j)] + diag[static_cast<std::size_t>(i)]) -
                       hessian_entry(adj, i, j);
        if (has_cubic) delta += cubic_delta(poly, cubic_by_var, start, i, j);
        if (delta < 0.0) {
          --start[static_cast<std::size_t>(i)];
          ++start[static_cast<std::size_t>(j)];
          for (const auto& [a, h] : adj[static_cast<std::size_t>(j)])
            g[static_cast<std::size_t>(a)] += h;
          for (const auto& [a, h] : adj[static_cast<std::size_t>(i)])
            g[static_cast<std::size_t>(a)] -= h;
          ++moves;
          improved = true;
          break;
        }
      }
    }
  }
  return start;
}

std::uint64_t count_compositions(std::int64_t n, int p) {
  if (n < 0 || p < 1) throw std::invalid_argument("count_compositions: need n >= 0, p >= 1");
  // C(n+p-1, p-1) via exact stepwise binomials, saturating on overflow.
  std::uint64_t c = 1;
  for (std::int64_t k = 1; k <= p - 1; ++k) {
    const unsigned __int128 next =
        static_cast<unsigned __int128>(c) * static_cast<unsigned __int128>(n + k);
    const unsigned __int128 divided = next / static_cast<unsigned __int128>(k);
    if (divided > std::numeric_limits<std::uint64_t>::max())
      return std::numeric_limits<std::uint64_t>::max();
    c = static_cast<std::uint64_t>(divided);
  }
  return c;
}

namespace {

template <typename Fn>
void for_each_composition(int pos, int p, std::int64_t remaining, IntVec& x, Fn&& fn) {
  if (pos == p - 1) {
    x[static_cast<std::size_t>(pos)] = remaining;
    fn(x);
    return;
  }
  for (std::int64_t v = 0; v <= remaining; ++v) {
    x[static_cast<std::size_t>(pos)] = v;
    for_each_composition(pos + 1, p, remaining - v, x, fn);
  }
}

}  // namespace

BruteForceResult brute_force(const SumConstrainedPolynomial& poly, std::uint64_t cap) {
  require_valid(poly);
  const std::uint64_t count = count_compositions(poly.sum_budget, poly.num_vars);
  if (count > cap) {
    std::ostringstream os;
    os << "brute_force: " << count << " compositions exceed the cap of " << cap;
    throw std::invalid_argument(os.str());
  }
  BruteForceResult result;
  IntVec x(static_cast<std::size_t>(poly.num_vars), 0);
  for_each_composition(0, poly.num_vars, poly.sum_budget, x, [&](const IntVec& point) {
    ++result.visited;
    const double e = evaluate(poly, std::span<const std::int64_t>(point));
    if (e < result.energy) {
      result.energy = e;
      result.best = point;
    }
  });
  return result;
}

}  // namespace nrev
