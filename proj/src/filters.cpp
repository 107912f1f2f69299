#include <algorithm>
#include <cmath>
#include <numeric>
#include <numbers>

#include "voicebench/dsp.hpp"
#include "voicebench/error.hpp"

namespace voicebench {

namespace {

constexpr double kLowpassAttenuationDb = 60.0;
constexpr double kResampleAttenuationDb = 80.0;

double sinc(double x) noexcept {
  if (x == 0.0) return 1.0;
  const double px = std::numbers::pi * x;
  return std::sin(px) / px;
}

double bessel_i0(double x) { return std::cyl_bessel_i(0.0, x); }

/// Kaiser window evaluated at offset `t` from the centre, half-width `half`.
double kaiser(double t, double half, double beta) {
  const double r = t / half;
  if (std::abs(r) >= 1.0) return 0.0;
  return bessel_i0(beta * std::sqrt(1.0 - r * r)) / bessel_i0(beta);
}

/// Kaiser-formula filter length for a transition width in cycles/sample.
double kaiser_length(double attenuation_db, double transition) {
  return (attenuation_db - 7.95) / (2.285 * 2.0 * std::numbers::pi * transition) + 1.0;
}

std::vector<double> direct_convolve(std::span<const double> x,
                                    std::span<const double> h) {
  std::vector<double> y(x.size() + h.size() - 1, 0.0);
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double xi = x[i];
    for (std::size_t j = 0; j < h.size(); ++j) y[i + j] += xi * h[j];
  }
  return y;
}

}  // namespace

std::vector<double> fft_convolve(std::span<const double> signal,
                                 std::span<const double> kernel) {
  if (signal.empty() || kernel.empty()) {
    fail(Errc::EmptyInput, "convolution needs non-empty signal and kernel");
  }
  const std::size_t out_len = signal.size() + kernel.size() - 1;
  if (std::min(signal.size(), kernel.size()) <= 16) {
    return direct_convolve(signal, kernel);
  }
  const std::size_t n = next_power_of_two(out_len);
  std::vector<Complex> a(n), b(n);
  for (std::size_t i = 0; i < signal.size(); ++i) a[i] = signal[i];
  for (std::size_t i = 0; i < kernel.size(); ++i) b[i] = kernel[i];
  fft_inplace(a);
  fft_inplace(b);
  for (std::size_t i = 0; i < n; ++i) a[i] *= b[i];
  fft_inplace(a, true);
  std::vector<double> out(out_len);
  const double inv = 1.0 / static_cast<double>(n);
  for (std::size_t i = 0; i < out_len; ++i) out[i] = a[i].real() * inv;
  return out;
}

AudioBuffer fft_convolve(const AudioBuffer& signal, std::span<const double> kernel) {
  auto out = fft_convolve(signal.mono_samples(), kernel);
  return AudioBuffer::mono(std::move(out), signal.sample_rate());
}

double kaiser_beta(double attenuation_db) noexcept {
  if (attenuation_db > 50.0) return 0.1102 * (attenuation_db - 8.7);
  if (attenuation_db >= 21.0) {
    return 0.5842 * std::pow(attenuation_db - 21.0, 0.4) +
           0.07886 * (attenuation_db - 21.0);
  }
  return 0.0;
}

std::vector<double> kaiser_lowpass_taps(double cutoff, double transition,
                                        double attenuation_db) {
  if (!(cutoff > 0.0) || cutoff > 0.5 || !(transition > 0.0)) {
    fail(Errc::InvalidCutoff, "cutoff must be in (0, 0.5] cycles/sample");
  }
  auto length = static_cast<std::size_t>(std::ceil(kaiser_length(attenuation_db, transition)));
  if (length % 2 == 0) ++length;
  const std::size_t mid = length / 2;
  std::vector<double> taps(length, 0.0);
  if (cutoff >= 0.5) {
    taps[mid] = 1.0;
    return taps;
  }
  const double beta = kaiser_beta(attenuation_db);
  const double half = static_cast<double>(mid) + 1.0;
  for (std::size_t n = 0; n < length; ++n) {
    const double t = static_cast<double>(n) - static_cast<double>(mid);
    taps[n] = 2.0 * cutoff * sinc(2.0 * cutoff * t) * kaiser(t, half, beta);
  }
  const double sum = std::accumulate(taps.begin(), taps.end(), 0.0);
  for (double& v : taps) v /= sum;
  return taps;
}

std::vector<double> lowpass(std::span<const double> signal, int sample_rate_hz,
                            double cutoff_hz, double transition_hz) {
  const double nyquist = sample_rate_hz / 2.0;
  if (!(cutoff_hz > 0.0) || !(cutoff_hz < nyquist)) {
    fail(Errc::InvalidCutoff, "cutoff " + std::to_string(cutoff_hz) +
                                  " Hz outside (0, " + std::to_string(nyquist) + ")");
  }
  if (!(transition_hz > 0.0)) {
    fail(Errc::InvalidCutoff, "transition width must be positive");
  }
  if (signal.empty()) return {};
  const double fs = sample_rate_hz;
  const double centre = std::min(cutoff_hz + transition_hz / 2.0, nyquist);
  const auto taps = kaiser_lowpass_taps(centre / fs, transition_hz / fs,
                                        kLowpassAttenuationDb);
  const std::size_t delay = taps.size() / 2;
  const auto full = fft_convolve(signal, taps);
  return std::vector<double>(full.begin() + static_cast<std::ptrdiff_t>(delay),
                             full.begin() + static_cast<std::ptrdiff_t>(delay + signal.size()));
}

AudioBuffer lowpass(const AudioBuffer& audio, double cutoff_hz, double transition_hz) {
  std::vector<double> planar;
  planar.reserve(audio.planar().size());
  for (int c = 0; c < audio.channels(); ++c) {
    auto y = lowpass(audio.channel(c), audio.sample_rate(), cutoff_hz, transition_hz);
    planar.insert(planar.end(), y.begin(), y.end());
  }
  return AudioBuffer(std::move(planar), audio.sample_rate(), audio.channels());
}

std::vector<double> resample(std::span<const double> signal, int source_hz,
                             int target_hz) {
  if (source_hz <= 0 || target_hz <= 0) {
    fail(Errc::InvalidArgument, "sample rates must be positive");
  }
  if (source_hz == target_hz) return {signal.begin(), signal.end()};

  const long long g = std::gcd(source_hz, target_hz);
  const long long up = target_hz / g;    // output samples per `down` inputs
  const long long down = source_hz / g;
  const auto in_len = static_cast<long long>(signal.size());
  const long long out_len = (in_len * up + down / 2) / down;

  // Kernel in units of input samples. Passband ends at 0.9 of the lower
  // Nyquist, stopband starts at the lower Nyquist.
  const double lower_rate = std::min(source_hz, target_hz);
  const double cutoff = 0.475 * lower_rate / source_hz;
  const double transition = 0.05 * lower_rate / source_hz;
  const double beta = kaiser_beta(kResampleAttenuationDb);
  const double half = std::ceil(kaiser_length(kResampleAttenuationDb, transition) / 2.0);
  const auto reach = static_cast<long long>(half);

  auto kernel = [&](double tau) {
    return 2.0 * cutoff * sinc(2.0 * cutoff * tau) * kaiser(tau, half, beta);
  };

  // Phase r of output m has fractional position r / up.
  const long long taps = 2 * reach + 2;
  const bool tabulate = up <= 4096;
  std::vector<double> table;
  if (tabulate) {
    table.resize(static_cast<std::size_t>(up * taps));
    for (long long r = 0; r < up; ++r) {
      const double frac = static_cast<double>(r) / static_cast<double>(up);
      for (long long k = 0; k < taps; ++k) {
        table[static_cast<std::size_t>(r * taps + k)] =
            kernel(frac - static_cast<double>(k - reach));
      }
    }
  }

  std::vector<double> out(static_cast<std::size_t>(out_len), 0.0);
  std::vector<double> scratch(static_cast<std::size_t>(taps));
  for (long long m = 0; m < out_len; ++m) {
    const long long pos = m * down;
    const long long base = pos / up;
    const long long r = pos % up;
    const double* coeff;
    if (tabulate) {
      coeff = table.data() + r * taps;
    } else {
      const double frac = static_cast<double>(r) / static_cast<double>(up);
      for (long long k = 0; k < taps; ++k) {
        scratch[static_cast<std::size_t>(k)] = kernel(frac - static_cast<double>(k - reach));
      }
      coeff = scratch.data();
    }
    const long long first = std::max(0LL, reach - base);
    const long long last = std::min(taps, in_len - base + reach);
    double acc = 0.0;
    for (long long k = first; k < last; ++k) {
      acc += signal[static_cast<std::size_t>(base + k - reach)] * coeff[k];
    }
    out[static_cast<std::size_t>(m)] = acc;
  }
  return out;
}

AudioBuffer resample(const AudioBuffer& audio, int target_hz) {
  if (target_hz <= 0) fail(Errc::InvalidArgument, "target rate must be positive");
  if (target_hz == audio.sample_rate()) return audio;
  std::vector<double> planar;
  for (int c = 0; c < audio.channels(); ++c) {
    auto y = resample(audio.channel(c), audio.sample_rate(), target_hz);
    planar.insert(planar.end(), y.begin(), y.end());
  }
  return AudioBuffer(std::move(planar), target_hz, audio.channels());
}

}  // namespace voicebench
