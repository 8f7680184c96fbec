#pragma once

#include <optional>

#include "nrev/polynomial.hpp"

namespace nrev {

// Photon counts per pixel of a 1D measurement. The mapped energy couples
// indices i-2..i+2, hence the minimum length of 5 for mapping.
struct MeasuredFrame {
  IntVec counts;

  int size() const { return static_cast<int>(counts.size()); }
};

// Edge handling of the smoothness sum: `periodic` wraps indices (the
// closed-form coefficients then hold at every pixel), `interior` keeps only
// pixels whose both neighbors exist (no wraparound artifacts on images).
enum class BoundaryPolicy { periodic, interior };

// Closed-form coefficients of the mapped energy, in the symmetric-pair
// convention (off-diagonal values counted once per direction). Against the
// canonical single-entry storage the expected monomial weights are diag,
// 2*off1 and 2*off2. d is computed with wrapped indices, so it is valid at
// every index under `periodic` and at stencil-complete indices otherwise.
struct InteriorCoefficients {
  RealVec d;
  double diag = 1.5;
  double off1 = -1.0;
  double off2 = 0.25;
};

// Recovered-value estimates of the neighboring columns, used to couple a
// column solve to its left/right neighbors in 2D sweeps.
struct CrossColumnContext {
  std::optional<RealVec> left;
  std::optional<RealVec> right;
  double weight = 1.0;
};

// Expands the smoothness cost
//
//   C(N) = sum_i ( M_i - N_i - (M_{i-1}-N_{i-1} + M_{i+1}-N_{i+1})/2 )^2
//
// into a polynomial in the noise variables N, constant term included, by
// squaring each residual mechanically. The result is equal (not just
// equivalent) to residual_cost at every feasible point, edges included.
SumConstrainedPolynomial build_cost_form(const MeasuredFrame& frame,
                                         BoundaryPolicy boundary,
                                         std::int64_t noise_total);

// Direct evaluation of the squared-residual sum; the independent oracle for
// build_cost_form. Accepts any frame with at least one defined term (P >= 3).
double residual_cost(const MeasuredFrame& frame, BoundaryPolicy boundary,
                     std::span<const std::int64_t> noise);
double residual_cost(const MeasuredFrame& frame, BoundaryPolicy boundary,
                     std::span<const double> noise);

// Closed-form data coefficients D_i = 3 M_i - 2 M_{i+1} - 2 M_{i-1}
// + M_{i+2}/2 + M_{i-2}/2 plus the constant stencil weights. Cross-check
// only; the energy itself always comes from build_cost_form.
InteriorCoefficients interior_coefficients(const MeasuredFrame& frame);

// Adds weight * sum_i (M_i - N_i - A_i)^2 where A_i averages the neighbor
// estimates present in ctx. Keeps exact equality semantics: constant,
// linear and diagonal terms all updated.
SumConstrainedPolynomial augment_cross_column(const SumConstrainedPolynomial& poly,
                                              const MeasuredFrame& frame,
                                              const CrossColumnContext& ctx);

}  // namespace nrev
