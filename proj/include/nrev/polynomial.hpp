#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace nrev {

using IntVec = std::vector<std::int64_t>;
using RealVec = std::vector<double>;

struct QuadraticTerm {
  int i = 0;
  int j = 0;  // canonical: i <= j
  double weight = 0.0;
};

struct CubicTerm {
  int i = 0;
  int j = 0;
  int k = 0;  // canonical: i <= j <= k
  double weight = 0.0;
};

// Polynomial energy over num_vars nonnegative variables tied to a fixed
// total:
//
//   H(v) = constant + sum_i linear[i] v_i
//        + sum quadratic w v_i v_j + sum cubic w v_i v_j v_k,
//
// minimized subject to sum_i v_i == sum_budget. Quadratic and cubic terms
// are stored once per unordered index tuple; the stored weight is the full
// coefficient of that monomial (a symmetric pair J_ij = J_ji = w therefore
// appears as one canonical entry of weight 2w).
struct SumConstrainedPolynomial {
  int num_vars = 1;
  std::int64_t sum_budget = 0;
  double constant = 0.0;
  RealVec linear;  // size num_vars
  std::vector<QuadraticTerm> quadratic;
  std::vector<CubicTerm> cubic;

  static SumConstrainedPolynomial zero(int num_vars, std::int64_t sum_budget);

  void add_linear(int i, double w);
  // Accumulate into the canonical entry for the unordered pair/triple.
  void add_quadratic(int i, int j, double w);
  void add_cubic(int i, int j, int k, double w);
};

// Checks every type invariant (sizes, index ranges, canonical ordering,
// duplicate entries, finiteness). Empty result means the polynomial is
// well formed; never throws, never mutates.
std::vector<std::string> validate(const SumConstrainedPolynomial& poly);

// Plain evaluation at a point. Throws std::invalid_argument on dimension
// mismatch and std::overflow_error if the result is not finite.
double evaluate(const SumConstrainedPolynomial& poly, std::span<const double> point);
double evaluate(const SumConstrainedPolynomial& poly, std::span<const std::int64_t> point);

// dH/dv at a real point; agrees with central finite differences of
// evaluate(). Errors as evaluate().
RealVec gradient(const SumConstrainedPolynomial& poly, std::span<const double> point);
void gradient_into(const SumConstrainedPolynomial& poly, std::span<const double> point,
                   RealVec& out);

}  // namespace nrev
