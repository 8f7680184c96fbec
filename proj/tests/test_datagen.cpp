#include <doctest.h>

#include <cmath>
#include <numeric>

#include "nrev/datagen.hpp"
#include "nrev/rng.hpp"
#include "support.hpp"

using namespace nrev;
namespace tst = nrev::testing;

TEST_CASE("decaying_sinusoid_1d: degenerate parameters") {
  const auto flat = decaying_sinusoid_1d(10, 0.0, 0.4, 0.02, 3.0);
  CHECK(flat.counts == IntVec(10, 3));

  // gamma = omega = 0 collapses to floor + A/2.
  const auto half = decaying_sinusoid_1d(8, 10.0, 0.0, 0.0, 2.0);
  CHECK(half.counts == IntVec(8, 7));
}

TEST_CASE("decaying_sinusoid_1d: peak location and value") {
  const auto frame = decaying_sinusoid_1d(200, 100.0, 0.4, 0.02, 0.0);
  CHECK(*std::max_element(frame.counts.begin(), frame.counts.end()) <= 100);

  // Dense evaluation of the underlying curve over the first period.
  int argmax = 0;
  double best = -1.0;
  for (int i = 0; i < 16; ++i) {
    const double v = std::exp(-0.02 * i) * (1.0 + std::sin(0.4 * i));
    if (v > best) {
      best = v;
      argmax = i;
    }
  }
  CHECK(std::abs(argmax - 4) <= 1);
  const auto frame_peak =
      std::max_element(frame.counts.begin(), frame.counts.begin() + 16) - frame.counts.begin();
  CHECK(std::abs(static_cast<int>(frame_peak) - argmax) <= 1);
}

TEST_CASE("decaying_sinusoid_2d: dimensions and separable structure") {
  const auto flat = decaying_sinusoid_2d(5, 6, 0.0, 0.4, 0.2, 0.02, 0.01, 2.0);
  CHECK(flat.counts == IntVec(30, 2));

  const auto image = decaying_sinusoid_2d(100, 200, 100.0, 0.4, 0.2, 0.02, 0.01, 0.0);
  CHECK(image.rows == 100);
  CHECK(image.cols == 200);

  // The image must equal the rounded outer product of its 1D factors.
  for (std::size_t r = 0; r < image.rows; r += 13) {
    for (std::size_t c = 0; c < image.cols; c += 17) {
      const double fr = std::exp(-0.02 * static_cast<double>(r)) *
                        (1.0 + std::sin(0.4 * static_cast<double>(r)));
      const double fc = std::exp(-0.01 * static_cast<double>(c)) *
                        (1.0 + std::sin(0.2 * static_cast<double>(c)));
      const auto expected =
          static_cast<std::int64_t>(std::llround(std::max(0.0, 100.0 * fr * fc / 4.0)));
      CHECK(image.at(r, c) == expected);
    }
  }
}

TEST_CASE("poisson_corrupt: zero fraction is the identity") {
  const auto truth = decaying_sinusoid_1d(50, 80.0, 0.4, 0.02, 0.0);
  const auto record = poisson_corrupt(truth, CorruptionSpec{0.0, NoiseReference::peak, 3});
  CHECK(record.measured.counts == truth.counts);
  CHECK(record.true_total == 0);
  CHECK(record.lambda_used == 0.0);
}

TEST_CASE("poisson_corrupt: measured minus noise is the truth, deterministically") {
  const auto truth = decaying_sinusoid_1d(64, 90.0, 0.3, 0.03, 1.0);
  const CorruptionSpec spec{0.25, NoiseReference::peak, 42};
  const auto a = poisson_corrupt(truth, spec);
  const auto b = poisson_corrupt(truth, spec);
  CHECK(a.measured.counts == b.measured.counts);
  CHECK(a.true_noise == b.true_noise);
  for (std::size_t i = 0; i < truth.counts.size(); ++i) {
    CHECK(a.measured.counts[i] - a.true_noise[i] == truth.counts[i]);
    CHECK(a.true_noise[i] >= 0);
  }
  CHECK(a.true_total ==
        std::accumulate(a.true_noise.begin(), a.true_noise.end(), static_cast<std::int64_t>(0)));
}

TEST_CASE("poisson_corrupt: lambda derives from peak or mean as requested") {
  MeasuredFrame truth{{0, 10, 20, 30, 40}};  // peak 40, mean 20
  const auto by_peak = poisson_corrupt(truth, CorruptionSpec{0.5, NoiseReference::peak, 1});
  CHECK(by_peak.lambda_used == 20.0);
  const auto by_mean = poisson_corrupt(truth, CorruptionSpec{0.5, NoiseReference::mean, 1});
  CHECK(by_mean.lambda_used == 10.0);
}

TEST_CASE("poisson_corrupt: empirical mean stays within five standard errors") {
  MeasuredFrame truth;
  truth.counts.assign(10000, 100);  // peak 100, so f = 0.2 gives lambda = 20
  const auto record = poisson_corrupt(truth, CorruptionSpec{0.2, NoiseReference::peak, 17});
  const double mean =
      static_cast<double>(record.true_total) / static_cast<double>(truth.counts.size());
  const double se = std::sqrt(20.0 / 10000.0);
  CHECK(std::abs(mean - 20.0) <= 5.0 * se);
}

TEST_CASE("poisson sampler: dispersion near one and plausible fit") {
  for (double lambda : {1.0, 5.0, 20.0, 64.0}) {
    IntVec samples(10000);
    for (std::size_t i = 0; i < samples.size(); ++i) {
      SplitMix64 rng(mix_stream(555, kStreamPixel, i));
      samples[i] = poisson_sample(lambda, rng);
    }
    const double n = static_cast<double>(samples.size());
    double mean = 0.0;
    for (auto s : samples) mean += static_cast<double>(s);
    mean /= n;
    double var = 0.0;
    for (auto s : samples) var += (static_cast<double>(s) - mean) * (static_cast<double>(s) - mean);
    var /= n - 1.0;
    const double dispersion = var / mean;
    CHECK(dispersion > 0.9);
    CHECK(dispersion < 1.1);
  }
  // Goodness of fit at lambda = 5 (Knuth branch) and 64 (PTRS branch).
  for (double lambda : {5.0, 64.0}) {
    IntVec samples(10000);
    for (std::size_t i = 0; i < samples.size(); ++i) {
      SplitMix64 rng(mix_stream(777, kStreamPixel, i));
      samples[i] = poisson_sample(lambda, rng);
    }
    CHECK(tst::poisson_gof_pvalue(samples, lambda) > 0.001);
  }
}

TEST_CASE("poisson_corrupt: oversized lambda is rejected") {
  MeasuredFrame truth{{1000000, 1000000, 1000000, 1000000, 1000000}};
  CHECK_THROWS_AS(poisson_corrupt(truth, CorruptionSpec{1e9, NoiseReference::peak, 1}),
                  std::invalid_argument);
}

TEST_CASE("estimate_noise_total: exact mode echoes the record") {
  const auto truth = decaying_sinusoid_1d(32, 50.0, 0.4, 0.02, 0.0);
  const auto record = poisson_corrupt(truth, CorruptionSpec{0.3, NoiseReference::peak, 9});
  CHECK(estimate_noise_total(record) == record.true_total);
}

TEST_CASE("estimate_noise_total_off_period: unbiased within the standard-error bound") {
  const double lambda = 20.0;
  const std::size_t pixels = 100;
  const auto estimate = estimate_noise_total_off_period(lambda, pixels, 10000, 31337);
  const double bound = 5.0 * 100.0 * std::sqrt(20.0 / 10000.0);
  CHECK(std::abs(static_cast<double>(estimate) - 2000.0) <= bound);

  CHECK(estimate_noise_total_off_period(0.0, pixels, 100, 1) == 0);
  CHECK_THROWS_AS(estimate_noise_total_off_period(lambda, pixels, 0, 1), std::invalid_argument);
}

TEST_CASE("off-period samples come from a stream disjoint from the corruption") {
  // Same seed: the first off-period sample must not replay pixel 0's noise.
  MeasuredFrame truth;
  truth.counts.assign(64, 100);
  const auto record = poisson_corrupt(truth, CorruptionSpec{0.5, NoiseReference::peak, 12321});
  IntVec off(64);
  for (int k = 0; k < 64; ++k) {
    SplitMix64 rng(mix_stream(12321, kStreamOffPeriod, static_cast<std::uint64_t>(k)));
    off[static_cast<std::size_t>(k)] = poisson_sample(50.0, rng);
  }
  CHECK(off != record.true_noise);
}
