// Test-side oracles and helpers, independent of the implementation paths
// they check.
#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <vector>

#include "nrev/polynomial.hpp"
#include "nrev/rng.hpp"

namespace nrev::testing {

// Central finite differences of evaluate(); the oracle for gradient().
inline RealVec finite_difference_gradient(const SumConstrainedPolynomial& poly,
                                          const RealVec& point, double h = 1e-5) {
  RealVec g(point.size());
  RealVec x = point;
  for (std::size_t i = 0; i < point.size(); ++i) {
    x[i] = point[i] + h;
    const double up = evaluate(poly, std::span<const double>(x));
    x[i] = point[i] - h;
    const double down = evaluate(poly, std::span<const double>(x));
    x[i] = point[i];
    g[i] = (up - down) / (2.0 * h);
  }
  return g;
}

// Every nonnegative integer vector of length p summing to n, by explicit
// odometer rather than the recursive enumerator under test.
inline std::vector<IntVec> all_compositions(std::int64_t n, int p) {
  std::vector<IntVec> out;
  IntVec x(static_cast<std::size_t>(p), 0);
  std::function<void(int, std::int64_t)> rec = [&](int pos, std::int64_t remaining) {
    if (pos == p - 1) {
      x[static_cast<std::size_t>(pos)] = remaining;
      out.push_back(x);
      return;
    }
    for (std::int64_t v = 0; v <= remaining; ++v) {
      x[static_cast<std::size_t>(pos)] = v;
      rec(pos + 1, remaining - v);
    }
  };
  rec(0, n);
  return out;
}

// Random feasible integer assignment: each unit lands in a uniform bin.
inline IntVec random_composition(std::int64_t n, int p, SplitMix64& rng) {
  IntVec x(static_cast<std::size_t>(p), 0);
  for (std::int64_t u = 0; u < n; ++u)
    ++x[static_cast<std::size_t>(rng.next() % static_cast<std::uint64_t>(p))];
  return x;
}

inline bool rel_close(double a, double b, double tol) {
  return std::abs(a - b) <= tol * std::max({1.0, std::abs(a), std::abs(b)});
}

// Regularized lower incomplete gamma P(a, x) by series / continued fraction
// (Numerical Recipes style); enough accuracy for goodness-of-fit p-values.
inline double gamma_p(double a, double x) {
  if (x < 0.0 || a <= 0.0) return 0.0;
  if (x == 0.0) return 0.0;
  const double gln = std::lgamma(a);
  if (x < a + 1.0) {
    double ap = a;
    double sum = 1.0 / a;
    double del = sum;
    for (int i = 0; i < 500; ++i) {
      ap += 1.0;
      del *= x / ap;
      sum += del;
      if (std::abs(del) < std::abs(sum) * 1e-14) break;
    }
    return sum * std::exp(-x + a * std::log(x) - gln);
  }
  double b = x + 1.0 - a;
  double c = 1e300;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i < 500; ++i) {
    const double an = -i * (i - a);
    b += 2.0;
    d = an * d + b;
    if (std::abs(d) < 1e-300) d = 1e-300;
    c = b + an / c;
    if (std::abs(c) < 1e-300) c = 1e-300;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::abs(del - 1.0) < 1e-14) break;
  }
  return 1.0 - std::exp(-x + a * std::log(x) - gln) * h;
}

// Upper-tail p-value of a chi-square statistic with df degrees of freedom.
inline double chi_square_pvalue(double statistic, int df) {
  return 1.0 - gamma_p(0.5 * df, 0.5 * statistic);
}

// Chi-square goodness-of-fit p-value of samples against Poisson(lambda),
// binning by exact pmf and merging tails so expected counts stay >= 5.
inline double poisson_gof_pvalue(const IntVec& samples, double lambda) {
  std::int64_t max_k = 0;
  for (std::int64_t s : samples) max_k = std::max(max_k, s);
  std::vector<double> pmf(static_cast<std::size_t>(max_k) + 2, 0.0);
  pmf[0] = std::exp(-lambda);
  for (std::size_t k = 1; k < pmf.size(); ++k)
    pmf[k] = pmf[k - 1] * lambda / static_cast<double>(k);

  const double n = static_cast<double>(samples.size());
  std::vector<std::int64_t> observed(pmf.size(), 0);
  for (std::int64_t s : samples) ++observed[static_cast<std::size_t>(s)];

  // Merge consecutive outcomes until each bin expects at least 5; the final
  // bin absorbs the full remaining tail mass.
  std::vector<double> expected_bins;
  std::vector<double> observed_bins;
  double exp_acc = 0.0;
  double obs_acc = 0.0;
  double mass_used = 0.0;
  for (std::size_t k = 0; k < pmf.size(); ++k) {
    exp_acc += n * pmf[k];
    obs_acc += static_cast<double>(observed[k]);
    mass_used += pmf[k];
    if (exp_acc >= 5.0) {
      expected_bins.push_back(exp_acc);
      observed_bins.push_back(obs_acc);
      exp_acc = 0.0;
      obs_acc = 0.0;
    }
  }
  const double tail = n * (1.0 - mass_used) + exp_acc;
  if (!expected_bins.empty() && tail > 0.0) {
    expected_bins.back() += tail;
    observed_bins.back() += obs_acc;
  }
  double stat = 0.0;
  for (std::size_t b = 0; b < expected_bins.size(); ++b) {
    const double d = observed_bins[b] - expected_bins[b];
    stat += d * d / expected_bins[b];
  }
  return chi_square_pvalue(stat, static_cast<int>(expected_bins.size()) - 1);
}

}  // namespace nrev::testing
