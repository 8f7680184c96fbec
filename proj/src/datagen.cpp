#include "nrev/datagen.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "nrev/rng.hpp"

namespace nrev {

namespace {

std::int64_t clamp_round(double x) {
  return static_cast<std::int64_t>(std::llround(std::max(0.0, x)));
}

double resolve_lambda(std::span<const std::int64_t> truth, const CorruptionSpec& spec) {
  if (!(spec.noise_mean_fraction >= 0.0) || !std::isfinite(spec.noise_mean_fraction))
    throw std::invalid_argument("corrupt: noise_mean_fraction must be finite and >= 0");
  const double base = spec.relative_to == NoiseReference::peak
                          ? static_cast<double>(peak_value(truth))
                          : mean_value(truth);
  const double lambda = spec.noise_mean_fraction * base;
  if (!std::isfinite(lambda)) throw std::invalid_argument("corrupt: lambda is not finite");
  if (lambda > 1e12)
    throw std::invalid_argument("corrupt: lambda too large, counts would overflow");
  return lambda;
}

IntVec sample_noise(std::size_t pixels, double lambda, std::uint64_t seed) {
  IntVec noise(pixels);
  for (std::size_t i = 0; i < pixels; ++i) {
    SplitMix64 rng(mix_stream(seed, kStreamPixel, i));
    noise[i] = poisson_sample(lambda, rng);
  }
  return noise;
}

}  // namespace

MeasuredFrame decaying_sinusoid_1d(int len, double amplitude, double omega, double gamma,
                                   double floor_value) {
  if (len < 5) throw std::invalid_argument("decaying_sinusoid_1d: len must be >= 5");
  if (!(amplitude >= 0.0)) throw std::invalid_argument("decaying_sinusoid_1d: amplitude < 0");
  if (!(gamma >= 0.0)) throw std::invalid_argument("decaying_sinusoid_1d: gamma < 0");
  MeasuredFrame frame;
  frame.counts.resize(static_cast<std::size_t>(len));
  for (int i = 0; i < len; ++i) {
    const double x = static_cast<double>(i);
    const double value =
        floor_value + amplitude * std::exp(-gamma * x) * (1.0 + std::sin(omega * x)) / 2.0;
    frame.counts[static_cast<std::size_t>(i)] = clamp_round(value);
  }
  return frame;
}

Image2D decaying_sinusoid_2d(int rows, int cols, double amplitude, double omega_row,
                             double omega_col, double gamma_row, double gamma_col,
                             double floor_value) {
  if (rows < 5) throw std::invalid_argument("decaying_sinusoid_2d: rows must be >= 5");
  if (cols < 1) throw std::invalid_argument("decaying_sinusoid_2d: cols must be >= 1");
  if (!(amplitude >= 0.0)) throw std::invalid_argument("decaying_sinusoid_2d: amplitude < 0");
  if (!(gamma_row >= 0.0 && gamma_col >= 0.0))
    throw std::invalid_argument("decaying_sinusoid_2d: gamma < 0");
  Image2D image;
  image.rows = static_cast<std::size_t>(rows);
  image.cols = static_cast<std::size_t>(cols);
  image.counts.resize(image.rows * image.cols);
  for (int r = 0; r < rows; ++r) {
    const double fr = std::exp(-gamma_row * r) * (1.0 + std::sin(omega_row * r));
    for (int c = 0; c < cols; ++c) {
      const double fc = std::exp(-gamma_col * c) * (1.0 + std::sin(omega_col * c));
      image.at(static_cast<std::size_t>(r), static_cast<std::size_t>(c)) =
          clamp_round(floor_value + amplitude * fr * fc / 4.0);
    }
  }
  return image;
}

std::int64_t peak_value(std::span<const std::int64_t> counts) {
  if (counts.empty()) throw std::invalid_argument("peak_value: empty input");
  return *std::max_element(counts.begin(), counts.end());
}

double mean_value(std::span<const std::int64_t> counts) {
  if (counts.empty()) throw std::invalid_argument("mean_value: empty input");
  double acc = 0.0;
  for (std::int64_t v : counts) acc += static_cast<double>(v);
  return acc / static_cast<double>(counts.size());
}

FrameCorruption poisson_corrupt(const MeasuredFrame& truth, const CorruptionSpec& spec) {
  FrameCorruption record;
  record.lambda_used = resolve_lambda(truth.counts, spec);
  record.true_noise = sample_noise(truth.counts.size(), record.lambda_used, spec.seed);
  record.measured.counts.resize(truth.counts.size());
  for (std::size_t i = 0; i < truth.counts.size(); ++i) {
    record.measured.counts[i] = truth.counts[i] + record.true_noise[i];
    record.true_total += record.true_noise[i];
  }
  return record;
}

ImageCorruption poisson_corrupt(const Image2D& truth, const CorruptionSpec& spec) {
  ImageCorruption record;
  record.lambda_used = resolve_lambda(truth.counts, spec);
  record.true_noise = sample_noise(truth.counts.size(), record.lambda_used, spec.seed);
  record.measured.rows = truth.rows;
  record.measured.cols = truth.cols;
  record.measured.counts.resize(truth.counts.size());
  for (std::size_t i = 0; i < truth.counts.size(); ++i) {
    record.measured.counts[i] = truth.counts[i] + record.true_noise[i];
    record.true_total += record.true_noise[i];
  }
  return record;
}

std::int64_t estimate_noise_total(const FrameCorruption& record) { return record.true_total; }

std::int64_t estimate_noise_total(const ImageCorruption& record) { return record.true_total; }

std::int64_t estimate_noise_total_off_period(double lambda, std::size_t num_pixels,
                                             int samples, std::uint64_t seed) {
  if (samples < 1)
    throw std::invalid_argument("estimate_noise_total_off_period: need samples >= 1");
  if (!(lambda >= 0.0) || !std::isfinite(lambda))
    throw std::invalid_argument("estimate_noise_total_off_period: bad lambda");
  double acc = 0.0;
  for (int k = 0; k < samples; ++k) {
    SplitMix64 rng(mix_stream(seed, kStreamOffPeriod, static_cast<std::uint64_t>(k)));
    acc += static_cast<double>(poisson_sample(lambda, rng));
  }
  return std::llround(static_cast<double>(num_pixels) * acc / samples);
}

}  // namespace nrev
