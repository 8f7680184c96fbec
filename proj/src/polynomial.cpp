#include "nrev/polynomial.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace nrev {

SumConstrainedPolynomial SumConstrainedPolynomial::zero(int num_vars,
                                                        std::int64_t sum_budget) {
  SumConstrainedPolynomial p;
  p.num_vars = num_vars;
  p.sum_budget = sum_budget;
  p.linear.assign(static_cast<std::size_t>(num_vars), 0.0);
  return p;
}

void SumConstrainedPolynomial::add_linear(int i, double w) {
  linear.at(static_cast<std::size_t>(i)) += w;
}

void SumConstrainedPolynomial::add_quadratic(int i, int j, double w) {
  if (i > j) std::swap(i, j);
  for (auto& q : quadratic) {
    if (q.i == i && q.j == j) {
      q.weight += w;
      return;
    }
  }
  quadratic.push_back({i, j, w});
}

void SumConstrainedPolynomial::add_cubic(int i, int j, int k, double w) {
  int idx[3] = {i, j, k};
  std::sort(idx, idx + 3);
  for (auto& t : cubic) {
    if (t.i == idx[0] && t.j == idx[1] && t.k == idx[2]) {
      t.weight += w;
      return;
    }
  }
  cubic.push_back({idx[0], idx[1], idx[2], w});
}

std::vector<std::string> validate(const SumConstrainedPolynomial& poly) {
  std::vector<std::string> violations;
  auto add = [&violations](const std::string& msg) { violations.push_back(msg); };

  if (poly.num_vars < 1) add("num_vars must be >= 1");
  if (poly.sum_budget < 0) add("sum_budget must be >= 0");
  if (!std::isfinite(poly.constant)) add("non-finite coefficient: constant");
  if (static_cast<int>(poly.linear.size()) != poly.num_vars)
    add("linear vector size does not match num_vars");

  const int p = poly.num_vars;
  auto in_range = [p](int idx) { return idx >= 0 && idx < p; };

  for (std::size_t n = 0; n < poly.linear.size(); ++n) {
    if (!std::isfinite(poly.linear[n])) {
      std::ostringstream os;
      os << "non-finite coefficient: linear[" << n << "]";
      add(os.str());
    }
  }

  for (std::size_t n = 0; n < poly.quadratic.size(); ++n) {
    const auto& q = poly.quadratic[n];
    if (!in_range(q.i) || !in_range(q.j)) {
      std::ostringstream os;
      os << "quadratic entry " << n << ": index out of range";
      add(os.str());
      continue;
    }
    if (q.i > q.j) {
      std::ostringstream os;
      os << "quadratic entry " << n << ": not canonical (i > j)";
      add(os.str());
    }
    if (!std::isfinite(q.weight)) {
      std::ostringstream os;
      os << "non-finite coefficient: quadratic entry " << n;
      add(os.str());
    }
    for (std::size_t m = 0; m < n; ++m) {
      if (poly.quadratic[m].i == q.i && poly.quadratic[m].j == q.j) {
        std::ostringstream os;
        os << "quadratic entry " << n << ": duplicate of entry " << m;
        add(os.str());
        break;
      }
    }
  }

  for (std::size_t n = 0; n < poly.cubic.size(); ++n) {
    const auto& t = poly.cubic[n];
    if (!in_range(t.i) || !in_range(t.j) || !in_range(t.k)) {
      std::ostringstream os;
      os << "cubic entry " << n << ": index out of range";
      add(os.str());
      continue;
    }
    if (!(t.i <= t.j && t.j <= t.k)) {
      std::ostringstream os;
      os << "cubic entry " << n << ": not canonical (need i <= j <= k)";
      add(os.str());
    }
    if (!std::isfinite(t.weight)) {
      std::ostringstream os;
      os << "non-finite coefficient: cubic entry " << n;
      add(os.str());
    }
    for (std::size_t m = 0; m < n; ++m) {
      if (poly.cubic[m].i == t.i && poly.cubic[m].j == t.j && poly.cubic[m].k == t.k) {
        std::ostringstream os;
        os << "cubic entry " << n << ": duplicate of entry " << m;
        add(os.str());
        break;
      }
    }
  }

  return violations;
}

namespace {

template <typename T>
double evaluate_impl(const SumConstrainedPolynomial& poly, std::span<const T> point) {
  if (static_cast<int>(point.size()) != poly.num_vars)
    throw std::invalid_argument("evaluate: point length does not match num_vars");
  double acc = poly.constant;
  for (int i = 0; i < poly.num_vars; ++i)
    acc += poly.linear[static_cast<std::size_t>(i)] * static_cast<double>(point[i]);
  for (const auto& q : poly.quadratic)
    acc += q.weight * static_cast<double>(point[q.i]) * static_cast<double>(point[q.j]);
  for (const auto& t : poly.cubic)
    acc += t.weight * static_cast<double>(point[t.i]) * static_cast<double>(point[t.j]) *
           static_cast<double>(point[t.k]);
  if (!std::isfinite(acc)) throw std::overflow_error("evaluate: non-finite energy");
  return acc;
}

}  // namespace

double evaluate(const SumConstrainedPolynomial& poly, std::span<const double> point) {
  return evaluate_impl(poly, point);
}

double evaluate(const SumConstrainedPolynomial& poly, std::span<const std::int64_t> point) {
  return evaluate_impl(poly, point);
}

void gradient_into(const SumConstrainedPolynomial& poly, std::span<const double> point,
                   RealVec& out) {
  if (static_cast<int>(point.size()) != poly.num_vars)
    throw std::invalid_argument("gradient: point length does not match num_vars");
  out.assign(poly.linear.begin(), poly.linear.end());
  for (const auto& q : poly.quadratic) {
    if (q.i == q.j) {
      out[static_cast<std::size_t>(q.i)] += 2.0 * q.weight * point[q.i];
    } else {
      out[static_cast<std::size_t>(q.i)] += q.weight * point[q.j];
      out[static_cast<std::size_t>(q.j)] += q.weight * point[q.i];
    }
  }
  for (const auto& t : poly.cubic) {
    const int idx[3] = {t.i, t.j, t.k};
    for (int a = 0; a < 3; ++a) {
      out[static_cast<std::size_t>(idx[a])] +=
          t.weight * point[idx[(a + 1) % 3]] * point[idx[(a + 2) % 3]];
    }
  }
  for (double g : out) {
    if (!std::isfinite(g)) throw std::overflow_error("gradient: non-finite component");
  }
}

RealVec gradient(const SumConstrainedPolynomial& poly, std::span<const double> point) {
  RealVec out;
  gradient_into(poly, point, out);
  return out;
}

}  // namespace nrev
