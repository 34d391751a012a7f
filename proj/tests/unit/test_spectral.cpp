// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include <cmath>
#include <complex>
#include <numbers>
#include <random>
#include <vector>

#include "expect_error.hpp"
#include "hpcsentry/seqae.hpp"
#include "hpcsentry/spectral.hpp"

using namespace hpcsentry;
using cd = std::complex<double>;

namespace {

// O(n^2) DFT oracle with the angle reduced modulo n before evaluation.
std::vector<cd> naive_dft(const std::vector<cd>& x) {
  const std::size_t n = x.size();
  std::vector<cd> out(n);
  for (std::size_t k = 0; k < n; ++k) {
    cd acc = 0.0;
    for (std::size_t t = 0; t < n; ++t) {
      const double angle = -2.0 * std::numbers::pi * static_cast<double>((k * t) % n) / static_cast<double>(n);
      acc += x[t] * cd(std::cos(angle), std::sin(angle));
    }
    out[k] = acc;
  }
  return out;
}

Window random_window(std::mt19937_64& rng, std::size_t rows) {
  std::normal_distribution<double> d(0.0, 1.0);
  Window w(0, rows, kChannels);
  for (auto& v : w.values()) v = d(rng);
  return w;
}

}  // namespace

TEST(Fft, MatchesNaiveDftForAllSizes) {
  std::mt19937_64 rng(1);
  std::normal_distribution<double> d(0.0, 1.0);
  for (std::size_t n = 2; n <= 256; n *= 2) {
    for (int rep = 0; rep < 3; ++rep) {
      std::vector<cd> x(n);
      for (auto& v : x) v = cd(d(rng), d(rng));
      const auto expect = naive_dft(x);
      auto got = x;
      fft_in_place(got);
      for (std::size_t k = 0; k < n; ++k) {
        ASSERT_LE(std::abs(got[k] - expect[k]), 1e-9) << "n=" << n << " k=" << k;
      }
    }
  }
}

TEST(Fft, SizeOneIsIdentityAndBadSizesThrow) {
  std::vector<cd> one{cd(3.0, -1.0)};
  fft_in_place(one);
  EXPECT_EQ(one[0], cd(3.0, -1.0));
  std::vector<cd> three(3);
  EXPECT_HS_ERROR(fft_in_place(three), ErrorCode::NotPowerOfTwo);
}

TEST(Fft, Parseval) {
  std::mt19937_64 rng(2);
  for (std::size_t n : {8u, 64u, 128u, 256u}) {
    const Window w = random_window(rng, std::min<std::size_t>(n, 100));
    for (std::size_t c = 0; c < kChannels; ++c) {
      double time_energy = 0.0;
      for (std::size_t r = 0; r < w.rows(); ++r) time_energy += w.at(r, c) * w.at(r, c);
      const auto spec = channel_transform(w, c, n);
      double freq_energy = 0.0;
      for (const auto& z : spec) freq_energy += std::norm(z);
      EXPECT_NEAR(freq_energy / static_cast<double>(n), time_energy, 1e-9 * time_energy);
    }
  }
}

TEST(Fft, Linearity) {
  std::mt19937_64 rng(3);
  const Window x = random_window(rng, 100);
  const Window y = random_window(rng, 100);
  const double a = 2.5, b = -0.75;
  Window combo(0, 100, kChannels);
  for (std::size_t i = 0; i < combo.values().size(); ++i) combo.values()[i] = a * x.values()[i] + b * y.values()[i];
  for (std::size_t c = 0; c < kChannels; ++c) {
    const auto fx = channel_transform(x, c, 128);
    const auto fy = channel_transform(y, c, 128);
    const auto fc = channel_transform(combo, c, 128);
    for (std::size_t k = 0; k < 128; ++k) EXPECT_LE(std::abs(fc[k] - (a * fx[k] + b * fy[k])), 1e-9);
  }
}

TEST(FftWindow, ConstantChannelFollowsDirichletPattern) {
  Window w(0, 100, kChannels);
  const std::array<double, kChannels> c{1.0, -2.0, 0.5, 0.0, 3.25};
  for (std::size_t r = 0; r < 100; ++r) {
    for (std::size_t ch = 0; ch < kChannels; ++ch) w.at(r, ch) = c[ch];
  }
  const Spectrum s = fft_window(w, 128);
  ASSERT_EQ(s.bins(), 65u);
  ASSERT_EQ(s.channels(), kChannels);
  for (std::size_t ch = 0; ch < kChannels; ++ch) {
    EXPECT_NEAR(s.at(0, ch), 100.0 * std::abs(c[ch]), 1e-9);
    std::vector<cd> padded(128);
    for (std::size_t r = 0; r < 100; ++r) padded[r] = c[ch];
    const auto oracle = naive_dft(padded);
    for (std::size_t k = 0; k < 65; ++k) EXPECT_NEAR(s.at(k, ch), std::abs(oracle[k]), 1e-9) << "bin " << k;
  }
}

TEST(FftWindow, RandomWindowMatchesOracleMagnitudes) {
  std::mt19937_64 rng(4);
  const Window w = random_window(rng, 100);
  for (std::size_t n : {128u, 256u}) {
    const Spectrum s = fft_window(w, n);
    for (std::size_t ch = 0; ch < kChannels; ++ch) {
      std::vector<cd> padded(n);
      for (std::size_t r = 0; r < 100; ++r) padded[r] = w.at(r, ch);
      const auto oracle = naive_dft(padded);
      for (std::size_t k = 0; k < s.bins(); ++k) EXPECT_NEAR(s.at(k, ch), std::abs(oracle[k]), 1e-9);
    }
  }
}

TEST(FftWindow, AllZeroWindow) {
  const Spectrum s = fft_window(Window(0, 100, kChannels), 128);
  for (double a : s.amplitudes()) EXPECT_EQ(a, 0.0);
}

TEST(FftWindow, SingleToneHasHalfLengthAmplitude) {
  Window w(0, 128, kChannels);
  for (std::size_t k = 0; k < 128; ++k) {
    for (std::size_t ch = 0; ch < kChannels; ++ch) {
      w.at(k, ch) = std::cos(2.0 * std::numbers::pi * 16.0 * static_cast<double>(k) / 128.0);
    }
  }
  const Spectrum s = fft_window(w, 128);
  for (std::size_t ch = 0; ch < kChannels; ++ch) {
    for (std::size_t bin = 0; bin < s.bins(); ++bin) {
      if (bin == 16) {
        EXPECT_NEAR(s.at(bin, ch), 64.0, 1e-9);
      } else {
        EXPECT_LE(s.at(bin, ch), 1e-9) << "bin " << bin;
      }
    }
  }
}

TEST(FftWindow, RemoveDcZeroesBinZero) {
  std::mt19937_64 rng(5);
  Window w = random_window(rng, 100);
  for (auto& v : w.values()) v += 4.0;
  const Spectrum with = fft_window(w, 128, false);
  const Spectrum without = fft_window(w, 128, true);
  for (std::size_t ch = 0; ch < kChannels; ++ch) {
    EXPECT_GT(with.at(0, ch), 300.0);
    EXPECT_LE(without.at(0, ch), 1e-9);
  }
}

TEST(FftWindow, Errors) {
  const Window w(0, 100, kChannels);
  EXPECT_HS_ERROR(fft_window(w, 100), ErrorCode::NotPowerOfTwo);
  EXPECT_HS_ERROR(fft_window(w, 0), ErrorCode::NotPowerOfTwo);
  EXPECT_HS_ERROR(fft_window(w, 64), ErrorCode::WindowTooLong);
}

TEST(FftWindow, AmplitudesNonNegativeFinite) {
  std::mt19937_64 rng(6);
  for (int i = 0; i < 20; ++i) {
    const Spectrum s = fft_window(random_window(rng, 100), 128);
    for (double a : s.amplitudes()) {
      EXPECT_TRUE(std::isfinite(a));
      EXPECT_GE(a, 0.0);
    }
  }
}

TEST(SpectrumAsSequence, ShapeAndRoundTrip) {
  std::mt19937_64 rng(7);
  const Spectrum s = fft_window(random_window(rng, 100), 128);
  const Window seq = spectrum_as_sequence(s);
  EXPECT_EQ(seq.rows(), 65u);
  EXPECT_EQ(seq.cols(), kChannels);
  for (std::size_t b = 0; b < 65; ++b) {
    for (std::size_t c = 0; c < kChannels; ++c) EXPECT_EQ(seq.at(b, c), s.at(b, c));
  }
  EXPECT_EQ(sequence_as_spectrum(seq, 128), s);
  EXPECT_HS_ERROR(sequence_as_spectrum(seq, 256), ErrorCode::ShapeMismatch);
}

TEST(SpectrumAsSequence, ScoringMatchesHandAssembledSequence) {
  std::mt19937_64 rng(8);
  SequenceAutoencoder m(kChannels, 65, 6, 2);
  std::uniform_real_distribution<double> u(-0.3, 0.3);
  for (auto& p : m.parameters()) p = u(rng);
  const Window w = random_window(rng, 100);
  const Spectrum s = fft_window(w, 128);
  Window hand(0, 65, kChannels);
  for (std::size_t b = 0; b < 65; ++b) {
    for (std::size_t c = 0; c < kChannels; ++c) hand.at(b, c) = s.at(b, c);
  }
  EXPECT_EQ(m.reconstruction_error(spectrum_as_sequence(s)), m.reconstruction_error(hand));
}
