#pragma once

#include <cstdint>

#include "nrev/pipeline.hpp"
#include "nrev/smoothness.hpp"

namespace nrev {

// How the noise fraction converts into a Poisson mean: against the peak
// pixel of the ground truth, or against its mean.
enum class NoiseReference { peak, mean };

struct CorruptionSpec {
  double noise_mean_fraction = 0.0;
  NoiseReference relative_to = NoiseReference::peak;
  std::uint64_t seed = 0;
};

struct FrameCorruption {
  MeasuredFrame measured;
  IntVec true_noise;
  std::int64_t true_total = 0;
  double lambda_used = 0.0;
};

struct ImageCorruption {
  Image2D measured;
  IntVec true_noise;  // row-major, like Image2D::counts
  std::int64_t true_total = 0;
  double lambda_used = 0.0;
};

// counts_i = round(max(0, floor + A e^{-gamma i} (1 + sin(omega i)) / 2)).
MeasuredFrame decaying_sinusoid_1d(int len, double amplitude, double omega, double gamma,
                                   double floor_value);

// Separable product of two decaying sinusoid factors:
// counts_{r,c} = round(max(0, floor
//   + A e^{-gr r - gc c} (1 + sin(wr r)) (1 + sin(wc c)) / 4)).
Image2D decaying_sinusoid_2d(int rows, int cols, double amplitude, double omega_row,
                             double omega_col, double gamma_row, double gamma_col,
                             double floor_value);

std::int64_t peak_value(std::span<const std::int64_t> counts);
double mean_value(std::span<const std::int64_t> counts);

// i.i.d. Poisson(lambda) noise per pixel, added to the truth. Each pixel
// samples from its own substream of (seed, pixel index), so the field is
// independent of traversal order.
FrameCorruption poisson_corrupt(const MeasuredFrame& truth, const CorruptionSpec& spec);
ImageCorruption poisson_corrupt(const Image2D& truth, const CorruptionSpec& spec);

std::int64_t estimate_noise_total(const FrameCorruption& record);  // exact mode
std::int64_t estimate_noise_total(const ImageCorruption& record);

// Simulated off-period background measurement: draws `samples` independent
// Poisson(lambda) values from a stream disjoint from the corruption streams
// and returns round(num_pixels * sample mean). Unbiased.
std::int64_t estimate_noise_total_off_period(double lambda, std::size_t num_pixels,
                                             int samples, std::uint64_t seed);

}  // namespace nrev
