#include "nrev/smoothness.hpp"

#include <cmath>
#include <map>
#include <stdexcept>
#include <utility>

namespace nrev {

namespace {

void check_frame(const MeasuredFrame& frame, int min_len) {
  if (frame.size() < min_len)
    throw std::invalid_argument("frame too short for the smoothness stencil");
  for (std::int64_t m : frame.counts) {
    if (m < 0) throw std::invalid_argument("frame counts must be nonnegative");
  }
}

template <typename T>
double residual_cost_impl(const MeasuredFrame& frame, BoundaryPolicy boundary,
                          std::span<const T> noise) {
  const int p = frame.size();
  check_frame(frame, 3);
  if (static_cast<int>(noise.size()) != p)
    throw std::invalid_argument("residual_cost: noise length does not match frame");
  const auto& m = frame.counts;
  const int lo = boundary == BoundaryPolicy::periodic ? 0 : 1;
  const int hi = boundary == BoundaryPolicy::periodic ? p : p - 1;
  double acc = 0.0;
  for (int i = lo; i < hi; ++i) {
    const int il = (i - 1 + p) % p;
    const int ir = (i + 1) % p;
    const double center = static_cast<double>(m[i]) - static_cast<double>(noise[i]);
    const double left = static_cast<double>(m[il]) - static_cast<double>(noise[il]);
    const double right = static_cast<double>(m[ir]) - static_cast<double>(noise[ir]);
    const double r = center - 0.5 * (left + right);
    acc += r * r;
  }
  return acc;
}

}  // namespace

SumConstrainedPolynomial build_cost_form(const MeasuredFrame& frame,
                                         BoundaryPolicy boundary,
                                         std::int64_t noise_total) {
  const int p = frame.size();
  // Interior needs both neighbors of an interior pixel plus the i+-2 data
  // stencil; wrapped indices make the expansion well defined from P = 3 on.
  check_frame(frame, boundary == BoundaryPolicy::interior ? 5 : 3);
  if (noise_total < 0)
    throw std::invalid_argument("build_cost_form: noise_total must be >= 0");

  auto poly = SumConstrainedPolynomial::zero(p, noise_total);
  const auto& m = frame.counts;
  const int lo = boundary == BoundaryPolicy::periodic ? 0 : 1;
  const int hi = boundary == BoundaryPolicy::periodic ? p : p - 1;

  // Each residual is an affine form a_i + sum_t c_t N_{idx_t}; squaring the
  // form term by term keeps the constructed polynomial equal to the direct
  // residual sum everywhere, edge pixels included.
  std::map<std::pair<int, int>, double> quad;
  for (int i = lo; i < hi; ++i) {
    const int il = (i - 1 + p) % p;
    const int ir = (i + 1) % p;
    const int idx[3] = {il, i, ir};
    const double coef[3] = {0.5, -1.0, 0.5};
    const double a = static_cast<double>(m[i]) -
                     0.5 * (static_cast<double>(m[il]) + static_cast<double>(m[ir]));
    poly.constant += a * a;
    for (int t = 0; t < 3; ++t) poly.linear[static_cast<std::size_t>(idx[t])] += 2.0 * a * coef[t];
    for (int t1 = 0; t1 < 3; ++t1) {
      for (int t2 = 0; t2 < 3; ++t2) {
        const auto key = std::minmax(idx[t1], idx[t2]);
        quad[{key.first, key.second}] += coef[t1] * coef[t2];
      }
    }
  }
  for (const auto& [key, w] : quad) {
    if (w != 0.0) poly.quadratic.push_back({key.first, key.second, w});
  }
  return poly;
}

double residual_cost(const MeasuredFrame& frame, BoundaryPolicy boundary,
                     std::span<const std::int64_t> noise) {
  return residual_cost_impl(frame, boundary, noise);
}

double residual_cost(const MeasuredFrame& frame, BoundaryPolicy boundary,
                     std::span<const double> noise) {
  return residual_cost_impl(frame, boundary, noise);
}

InteriorCoefficients interior_coefficients(const MeasuredFrame& frame) {
  const int p = frame.size();
  check_frame(frame, 5);
  InteriorCoefficients out;
  out.d.resize(static_cast<std::size_t>(p));
  const auto& m = frame.counts;
  for (int i = 0; i < p; ++i) {
    const auto at = [&](int k) { return static_cast<double>(m[(k % p + p) % p]); };
    out.d[static_cast<std::size_t>(i)] = 3.0 * at(i) - 2.0 * at(i + 1) - 2.0 * at(i - 1) +
                                         0.5 * at(i + 2) + 0.5 * at(i - 2);
  }
  return out;
}

SumConstrainedPolynomial augment_cross_column(const SumConstrainedPolynomial& poly,
                                              const MeasuredFrame& frame,
                                              const CrossColumnContext& ctx) {
  const int p = frame.size();
  if (poly.num_vars != p)
    throw std::invalid_argument("augment_cross_column: polynomial does not match frame");
  if (!ctx.left && !ctx.right)
    throw std::invalid_argument("augment_cross_column: both neighbor estimates absent");
  if (!(ctx.weight >= 0.0) || !std::isfinite(ctx.weight))
    throw std::invalid_argument("augment_cross_column: weight must be finite and >= 0");
  for (const auto& side : {ctx.left, ctx.right}) {
    if (side && static_cast<int>(side->size()) != p)
      throw std::invalid_argument("augment_cross_column: neighbor estimate length mismatch");
  }
  if (ctx.weight == 0.0) return poly;

  SumConstrainedPolynomial out = poly;
  const double w = ctx.weight;
  for (int i = 0; i < p; ++i) {
    double a = 0.0;
    int present = 0;
    if (ctx.left) {
      a += (*ctx.left)[static_cast<std::size_t>(i)];
      ++present;
    }
    if (ctx.right) {
      a += (*ctx.right)[static_cast<std::size_t>(i)];
      ++present;
    }
    a /= present;
    // (M_i - A_i - N_i)^2 expanded in N_i.
    const double delta = static_cast<double>(frame.counts[static_cast<std::size_t>(i)]) - a;
    out.constant += w * delta * delta;
    out.add_linear(i, -2.0 * w * delta);
    out.add_quadratic(i, i, w);
  }
  return out;
}

}  // namespace nrev
