#include <numbers>

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "support.hpp"
#include "voicebench/dsp.hpp"
#include "voicebench/error.hpp"

using namespace voicebench;
using vbtest::mono;
using vbtest::white_noise;

TEST(Fft, MatchesNaiveDft) {
  for (std::size_t n : {1u, 2u, 8u, 64u, 256u}) {
    const auto x = white_noise(n, n);
    const auto bins = rfft(x, n);
    ASSERT_EQ(bins.size(), n / 2 + 1);
    for (std::size_t k = 0; k < bins.size(); ++k) {
      const auto ref = vbtest::dft_bin(x, k, n);
      EXPECT_NEAR(bins[k].real(), ref.real(), 1e-9) << n << " " << k;
      EXPECT_NEAR(bins[k].imag(), ref.imag(), 1e-9);
    }
    const auto back = irfft(bins, n);
    for (std::size_t i = 0; i < n; ++i) EXPECT_NEAR(back[i], x[i], 1e-12);
  }
}

TEST(Fft, RejectsNonPowerOfTwo) {
  std::vector<Complex> v(12);
  EXPECT_THROW(fft_inplace(v), Error);
  EXPECT_TRUE(is_power_of_two(1024));
  EXPECT_FALSE(is_power_of_two(0));
  EXPECT_EQ(next_power_of_two(1025), 2048u);
}

TEST(Window, PeriodicHann) {
  const auto w = make_window(WindowType::Hann, 8);
  EXPECT_DOUBLE_EQ(w[0], 0.0);
  EXPECT_DOUBLE_EQ(w[4], 1.0);
  EXPECT_NEAR(w[2], 0.5, 1e-15);
  const auto s = make_window(WindowType::SqrtHann, 8);
  for (std::size_t i = 0; i < 8; ++i) EXPECT_NEAR(s[i] * s[i], w[i], 1e-15);
}

TEST(Stft, FrameCountAndZeros) {
  StftConfig cfg;
  const auto spec = stft(std::vector<double>(4000, 0.0), cfg, 16000);
  const std::size_t padded = 4000 + cfg.fft_size;
  EXPECT_EQ(spec.n_frames, 1 + (padded - cfg.win_length) / cfg.hop_length);
  EXPECT_EQ(spec.n_bins, 257u);
  for (const auto& c : spec.data) EXPECT_EQ(std::abs(c), 0.0);
  EXPECT_THROW(stft(std::vector<double>{}, cfg, 16000), Error);
}

TEST(Stft, BinCentredSineConcentrates) {
  StftConfig cfg;
  const int fs = 16000;
  const std::size_t k = 40;
  const auto x = vbtest::sine(8192, static_cast<double>(k) * fs / cfg.fft_size, fs);
  const auto spec = stft(x, cfg, fs);
  const std::size_t t = spec.n_frames / 2;
  double total = 0.0, near = 0.0;
  for (std::size_t b = 0; b < spec.n_bins; ++b) {
    const double p = std::norm(spec.at(t, b));
    total += p;
    if (b + 1 >= k && b <= k + 1) near += p;
  }
  EXPECT_GE(near / total, 0.99);
}

TEST(Stft, ParsevalNonOverlapping) {
  StftConfig cfg{256, 256, 256, WindowType::Hann, false};
  const auto x = white_noise(256 * 8, 11);
  const auto spec = stft(x, cfg, 16000);
  const auto w = make_window(WindowType::Hann, 256);
  for (std::size_t t = 0; t < spec.n_frames; ++t) {
    double time_e = 0.0;
    for (std::size_t i = 0; i < 256; ++i) time_e += std::pow(w[i] * x[t * 256 + i], 2);
    double freq_e = 0.0;
    for (std::size_t k = 0; k < spec.n_bins; ++k) {
      const double m = (k == 0 || k == 128) ? 1.0 : 2.0;
      freq_e += m * std::norm(spec.at(t, k));
    }
    EXPECT_NEAR(freq_e / 256.0, time_e, 1e-6 * time_e);
  }
}

TEST(Istft, RoundTripConfigs) {
  struct Case {
    StftConfig cfg;
    int fs;
    std::size_t n;
  };
  const std::vector<Case> cases = {
      {{512, 512, 256, WindowType::Hann, true}, 16000, 16000},
      {{512, 512, 128, WindowType::Hann, true}, 16000, 12345},
      {{2048, 2048, 512, WindowType::Hann, true}, 48000, 480000},
      {{512, 400, 100, WindowType::Hamming, true}, 16000, 9000},
      {{256, 256, 128, WindowType::SqrtHann, false}, 8000, 256 * 20},
  };
  for (const auto& c : cases) {
    const auto x = white_noise(c.n, c.n);
    const auto y = istft(stft(x, c.cfg, c.fs));
    ASSERT_EQ(y.frames(), c.n);
    std::size_t lo = 0, hi = c.n;
    if (!c.cfg.center) {
      lo = c.cfg.win_length;
      hi = c.n - c.cfg.win_length;
    }
    double worst = 0.0;
    for (std::size_t i = lo; i < hi; ++i) worst = std::max(worst, std::abs(y.mono_samples()[i] - x[i]));
    EXPECT_LE(worst, 1e-6) << c.cfg.fft_size << "/" << c.cfg.hop_length;
  }
  const auto silence = istft(stft(std::vector<double>(5000, 0.0), StftConfig{}, 16000));
  for (double v : silence.mono_samples()) EXPECT_EQ(v, 0.0);
}

TEST(Istft, RejectsVanishingEnvelope) {
  // Hop longer than the window leaves gaps with zero window weight.
  StftConfig cfg{512, 256, 256, WindowType::Hann, true};
  cfg.hop_length = 256;
  cfg.win_length = 128;
  EXPECT_THROW(cfg.validate(), Error);
  StftConfig gap{512, 512, 512, WindowType::Hann, true};
  try {
    istft(stft(white_noise(4096, 1), gap, 16000));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::NonColaConfig);
  }
}

TEST(Stft, ColaCheck) {
  EXPECT_TRUE(is_cola({512, 512, 256, WindowType::Hann, true}));
  EXPECT_TRUE(is_cola({512, 512, 128, WindowType::Hann, true}));
  EXPECT_FALSE(is_cola({512, 512, 200, WindowType::Hann, true}));
}

TEST(Mel, HtkFormula) {
  EXPECT_NEAR(hz_to_mel(700.0), 2595.0 * std::log10(2.0), 1e-9);
  EXPECT_NEAR(hz_to_mel(700.0), 781.17, 0.01);
  EXPECT_NEAR(mel_to_hz(hz_to_mel(1234.5)), 1234.5, 1e-9);
}

TEST(Mel, TwoFiltersPartitionBand) {
  StftConfig cfg;
  const auto fb = mel_filterbank(2, cfg, 16000, 0.0, 8000.0);
  for (std::size_t m = 0; m < 2; ++m) {
    const auto row = fb.row(m);
    EXPECT_NEAR(*std::max_element(row.begin(), row.end()), 1.0, 1e-12);
  }
}

TEST(Mel, CoverageAndShape) {
  for (int fs : {8000, 16000, 48000}) {
    const StftConfig cfg = default_metric_stft(fs);
    const double fmax = fs / 2.0;
    const auto fb = mel_filterbank(40, cfg, fs, 0.0, fmax);
    for (std::size_t m = 0; m < fb.n_mels; ++m) {
      const auto row = fb.row(m);
      std::size_t first = row.size(), last = 0, nonzero = 0;
      for (std::size_t k = 0; k < row.size(); ++k) {
        EXPECT_GE(row[k], 0.0);
        if (row[k] > 0) {
          first = std::min(first, k);
          last = k;
          ++nonzero;
        }
      }
      ASSERT_GT(nonzero, 0u);
      EXPECT_EQ(nonzero, last - first + 1) << "contiguous support";
    }
    // Every bin strictly inside (fmin, fmax) is covered.
    for (std::size_t k = 1; k + 1 < fb.n_bins; ++k) {
      double s = 0.0;
      for (std::size_t m = 0; m < fb.n_mels; ++m) s += fb.row(m)[k];
      EXPECT_GT(s, 0.0) << fs << " bin " << k;
    }
  }
}

TEST(Mel, InvalidBands) {
  StftConfig cfg;
  EXPECT_THROW(mel_filterbank(1, cfg, 16000, 0, 8000), Error);
  EXPECT_THROW(mel_filterbank(10, cfg, 16000, 4000, 2000), Error);
  EXPECT_THROW(mel_filterbank(10, cfg, 16000, 0, 9000), Error);
  try {
    mel_filterbank(200, cfg, 16000, 0, 8000);  // filters narrower than a bin
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::InvalidBand);
  }
}

TEST(Convolve, IdentityAndDelay) {
  const auto x = white_noise(300, 5);
  const auto id = fft_convolve(x, std::vector<double>{1.0});
  ASSERT_EQ(id.size(), x.size());
  for (std::size_t i = 0; i < x.size(); ++i) EXPECT_NEAR(id[i], x[i], 1e-12);
  std::vector<double> delay(8, 0.0);
  delay[7] = 1.0;
  const auto d = fft_convolve(x, delay);
  ASSERT_EQ(d.size(), x.size() + 7);
  for (std::size_t i = 0; i < x.size(); ++i) EXPECT_NEAR(d[i + 7], x[i], 1e-12);
  EXPECT_THROW(fft_convolve(std::vector<double>{}, delay), Error);
}

TEST(Convolve, MatchesDirectProperty) {
  std::mt19937_64 gen(99);
  for (int trial = 0; trial < 40; ++trial) {
    const std::size_t n = 1 + gen() % 4096, m = 1 + gen() % 600;
    const auto a = white_noise(n, gen()), b = white_noise(m, gen());
    const auto fast = fft_convolve(a, b);
    const auto slow = vbtest::direct_convolve(a, b);
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < slow.size(); ++i) {
      num += std::pow(fast[i] - slow[i], 2);
      den += slow[i] * slow[i];
    }
    EXPECT_LE(std::sqrt(num / den), 1e-9) << n << "x" << m;
  }
}

TEST(Kaiser, BetaFormula) {
  EXPECT_NEAR(kaiser_beta(60.0), 0.1102 * (60.0 - 8.7), 1e-12);
  EXPECT_NEAR(kaiser_beta(40.0), 0.5842 * std::pow(19.0, 0.4) + 0.07886 * 19.0, 1e-12);
  EXPECT_EQ(kaiser_beta(10.0), 0.0);
  const auto taps = kaiser_lowpass_taps(0.1, 0.02, 60.0);
  EXPECT_EQ(taps.size() % 2, 1u);
  double dc = 0.0;
  for (double t : taps) dc += t;
  EXPECT_NEAR(dc, 1.0, 1e-12);
  for (std::size_t i = 0; i < taps.size(); ++i) EXPECT_NEAR(taps[i], taps[taps.size() - 1 - i], 1e-15);
}

namespace {

double rms_mid(std::span<const double> x) {
  const std::size_t lo = x.size() / 4, hi = 3 * x.size() / 4;
  double s = 0.0;
  for (std::size_t i = lo; i < hi; ++i) s += x[i] * x[i];
  return std::sqrt(s / static_cast<double>(hi - lo));
}

}  // namespace

TEST(Lowpass, PassbandAndStopband) {
  const int fs = 48000;
  const double cutoff = 8000.0, transition = 500.0;
  const auto pass = vbtest::sine(48000, cutoff / 2, fs);
  const auto y = lowpass(pass, fs, cutoff, transition);
  ASSERT_EQ(y.size(), pass.size());
  EXPECT_NEAR(20 * std::log10(rms_mid(y) / rms_mid(pass)), 0.0, 0.1);

  const auto stop = vbtest::sine(48000, cutoff + 2 * transition, fs);
  const auto z = lowpass(stop, fs, cutoff, transition);
  EXPECT_LE(20 * std::log10(rms_mid(z) / rms_mid(stop)), -60.0);

  // Delay compensated: output lines up sample for sample with the input.
  double num = 0.0, den = 0.0;
  for (std::size_t i = 10000; i < 38000; ++i) {
    num += std::pow(y[i] - pass[i], 2);
    den += pass[i] * pass[i];
  }
  EXPECT_LT(num / den, 1e-4);
}

TEST(Lowpass, NearNyquistIsNearIdentity) {
  const int fs = 16000;
  const auto x = vbtest::band_limited_noise(16000, fs, 4000.0, 3);
  const auto y = lowpass(x, fs, fs / 2.0 - 1.0, 2000.0);
  EXPECT_NEAR(20 * std::log10(rms_mid(y) / rms_mid(x)), 0.0, 0.1);
}

TEST(Lowpass, InvalidCutoff) {
  const auto x = white_noise(100, 1);
  for (double c : {0.0, -5.0, 8000.0, 9000.0}) {
    try {
      lowpass(x, 16000, c, 100.0);
      FAIL() << c;
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), Errc::InvalidCutoff);
    }
  }
}

TEST(Lowpass, TimeInvariant) {
  const int fs = 16000;
  const std::size_t hop = 256;
  auto x = white_noise(4000, 12);
  std::vector<double> shifted(hop, 0.0);
  shifted.insert(shifted.end(), x.begin(), x.end());
  x.resize(x.size() + hop, 0.0);
  const auto a = lowpass(x, fs, 3000.0, 500.0);
  const auto b = lowpass(shifted, fs, 3000.0, 500.0);
  for (std::size_t i = 0; i + hop < a.size(); ++i) EXPECT_NEAR(b[i + hop], a[i], 1e-9);
}

TEST(Resample, IdentityAndLength) {
  const auto x = mono(white_noise(1001, 2), 16000);
  EXPECT_EQ(resample(x, 16000), x);
  EXPECT_EQ(resample(x, 48000).frames(), 3003u);
  EXPECT_EQ(resample(x, 8000).frames(), 501u);  // round(500.5)
  EXPECT_EQ(resample(x, 22050).frames(), static_cast<std::size_t>(std::llround(1001.0 * 22050 / 16000)));
}

TEST(Resample, SineDownsampleMatchesAnalytic) {
  const auto x = vbtest::sine(48000, 1000.0, 48000);
  const auto y = resample(x, 48000, 16000);
  const auto ref = vbtest::sine(16000, 1000.0, 16000);
  double num = 0.0, den = 0.0;
  for (std::size_t i = 1000; i < 15000; ++i) {
    num += std::pow(y[i] - ref[i], 2);
    den += ref[i] * ref[i];
  }
  EXPECT_GE(vbtest::db(den / num), 60.0);
}

TEST(Resample, RoundTripBandLimited) {
  const auto x = vbtest::band_limited_noise(48000 * 2, 48000, 7000.0, 21);
  const auto y = resample(resample(x, 48000, 16000), 16000, 48000);
  ASSERT_EQ(y.size(), x.size());
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    num += std::pow(y[i] - x[i], 2);
    den += x[i] * x[i];
  }
  EXPECT_GE(vbtest::db(den / num), 55.0);
}

TEST(Resample, Linear) {
  const auto x = white_noise(3000, 1), y = white_noise(3000, 2);
  std::vector<double> mix(3000);
  for (std::size_t i = 0; i < 3000; ++i) mix[i] = 0.7 * x[i] - 2.5 * y[i];
  const auto rx = resample(x, 44100, 16000), ry = resample(y, 44100, 16000), rm = resample(mix, 44100, 16000);
  for (std::size_t i = 0; i < rm.size(); ++i) EXPECT_NEAR(rm[i], 0.7 * rx[i] - 2.5 * ry[i], 1e-9);
}

TEST(Resample, TimeInvariantAtIntegerRatio) {
  // A shift of q input samples is p output samples for ratio p/q = 1/3.
  const std::size_t shift = 3 * 50;
  auto x = white_noise(3000, 4);
  std::vector<double> s(shift, 0.0);
  s.insert(s.end(), x.begin(), x.end());
  x.resize(x.size() + shift, 0.0);
  const auto a = resample(x, 48000, 16000), b = resample(s, 48000, 16000);
  for (std::size_t i = 0; i + 50 < a.size(); ++i) EXPECT_NEAR(b[i + 50], a[i], 1e-9);
}
