#include <algorithm>
#include <cmath>
#include <numbers>

#include "voicebench/dsp.hpp"
#include "voicebench/error.hpp"

namespace voicebench {

std::vector<double> make_window(WindowType type, std::size_t n) {
  std::vector<double> w(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double phase = 2.0 * std::numbers::pi * static_cast<double>(i) /
                         static_cast<double>(n);
    switch (type) {
      case WindowType::Hann: w[i] = 0.5 - 0.5 * std::cos(phase); break;
      case WindowType::Hamming: w[i] = 0.54 - 0.46 * std::cos(phase); break;
      case WindowType::SqrtHann: w[i] = std::sqrt(0.5 - 0.5 * std::cos(phase)); break;
    }
  }
  return w;
}

void StftConfig::validate() const {
  if (!is_power_of_two(fft_size) || fft_size < 2) {
    fail(Errc::InvalidArgument, "fft_size must be a power of two >= 2");
  }
  if (win_length < 1 || win_length > fft_size) {
    fail(Errc::InvalidArgument, "win_length must be in [1, fft_size]");
  }
  if (hop_length < 1 || hop_length > win_length) {
    fail(Errc::InvalidArgument, "hop_length must be in [1, win_length]");
  }
}

StftConfig default_metric_stft(int sample_rate_hz) {
  if (sample_rate_hz >= 32000) {
    return StftConfig{2048, 2048, 512, WindowType::Hann, true};
  }
  return StftConfig{512, 512, 256, WindowType::Hann, true};
}

namespace {

/// Steady-state overlap-add of w^p at each phase within one hop.
std::vector<double> overlap_profile(const StftConfig& config, int power) {
  const auto w = make_window(config.window, config.win_length);
  std::vector<double> acc(config.hop_length, 0.0);
  for (std::size_t i = 0; i < w.size(); ++i) {
    acc[i % config.hop_length] += power == 1 ? w[i] : w[i] * w[i];
  }
  return acc;
}

std::size_t mirror(std::ptrdiff_t i, std::size_t n) {
  if (n == 1) return 0;
  const auto period = static_cast<std::ptrdiff_t>(2 * (n - 1));
  i %= period;
  if (i < 0) i += period;
  if (i >= static_cast<std::ptrdiff_t>(n)) i = period - i;
  return static_cast<std::size_t>(i);
}

}  // namespace

bool is_cola(const StftConfig& config, double tolerance) {
  config.validate();
  const auto acc = overlap_profile(config, 1);
  const auto [lo, hi] = std::minmax_element(acc.begin(), acc.end());
  return *hi > 0.0 && (*hi - *lo) <= tolerance * *hi;
}

Spectrogram stft(std::span<const double> signal, const StftConfig& config,
                 int sample_rate_hz) {
  config.validate();
  if (signal.empty()) fail(Errc::EmptySignal, "stft of an empty signal");

  const std::size_t pad = config.center ? config.fft_size / 2 : 0;
  const std::size_t len = signal.size();
  std::size_t padded_len = std::max(len + 2 * pad, config.win_length);
  std::vector<double> padded(padded_len, 0.0);
  for (std::size_t i = 0; i < len + 2 * pad; ++i) {
    const auto src = static_cast<std::ptrdiff_t>(i) - static_cast<std::ptrdiff_t>(pad);
    padded[i] = signal[mirror(src, len)];
  }

  Spectrogram spec;
  spec.config = config;
  spec.sample_rate_hz = sample_rate_hz;
  spec.signal_length = len;
  spec.n_bins = config.n_bins();
  spec.n_frames = 1 + (padded_len - config.win_length) / config.hop_length;
  spec.data.resize(spec.n_frames * spec.n_bins);

  const auto window = make_window(config.window, config.win_length);
  std::vector<Complex> buf(config.fft_size);
  for (std::size_t t = 0; t < spec.n_frames; ++t) {
    std::fill(buf.begin(), buf.end(), Complex{});
    const std::size_t start = t * config.hop_length;
    for (std::size_t i = 0; i < config.win_length; ++i) {
      buf[i] = padded[start + i] * window[i];
    }
    fft_inplace(buf);
    std::copy_n(buf.begin(), spec.n_bins, spec.data.begin() + t * spec.n_bins);
  }
  return spec;
}

Spectrogram stft(const AudioBuffer& audio, const StftConfig& config) {
  return stft(audio.mono_samples(), config, audio.sample_rate());
}

AudioBuffer istft(const Spectrogram& spec) {
  const StftConfig& config = spec.config;
  config.validate();
  const auto profile = overlap_profile(config, 2);
  const auto [lo, hi] = std::minmax_element(profile.begin(), profile.end());
  if (*lo <= 1e-10 * *hi) {
    fail(Errc::NonColaConfig,
         "window-squared overlap vanishes at hop " +
             std::to_string(config.hop_length));
  }

  const auto window = make_window(config.window, config.win_length);
  const std::size_t total =
      spec.n_frames == 0 ? 0 : (spec.n_frames - 1) * config.hop_length + config.win_length;
  std::vector<double> acc(total, 0.0);
  std::vector<double> env(total, 0.0);
  for (std::size_t t = 0; t < spec.n_frames; ++t) {
    const auto frame = irfft(spec.frame(t), config.fft_size);
    const std::size_t start = t * config.hop_length;
    for (std::size_t i = 0; i < config.win_length; ++i) {
      acc[start + i] += frame[i] * window[i];
      env[start + i] += window[i] * window[i];
    }
  }

  const std::size_t pad = config.center ? config.fft_size / 2 : 0;
  const double floor = 1e-10 * *hi;
  std::vector<double> out(spec.signal_length, 0.0);
  for (std::size_t i = 0; i < out.size(); ++i) {
    const std::size_t j = i + pad;
    if (j < total && env[j] > floor) out[i] = acc[j] / env[j];
  }
  return AudioBuffer::mono(std::move(out), spec.sample_rate_hz);
}

std::vector<double> power_spectrum(const Spectrogram& spec) {
  std::vector<double> out(spec.data.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = std::norm(spec.data[i]);
  return out;
}

double hz_to_mel(double hz) noexcept { return 2595.0 * std::log10(1.0 + hz / 700.0); }

double mel_to_hz(double mel) noexcept {
  return 700.0 * (std::pow(10.0, mel / 2595.0) - 1.0);
}

std::vector<double> MelFilterbank::apply(std::span<const double> power_frame) const {
  std::vector<double> out(n_mels, 0.0);
  for (std::size_t m = 0; m < n_mels; ++m) out[m] = dot(row(m), power_frame);
  return out;
}

MelFilterbank mel_filterbank(std::size_t n_mels, const StftConfig& config,
                             int sample_rate_hz, double fmin_hz, double fmax_hz) {
  config.validate();
  if (n_mels < 2) fail(Errc::InvalidBand, "n_mels must be at least 2");
  if (!(fmin_hz >= 0.0) || !(fmin_hz < fmax_hz) ||
      fmax_hz > sample_rate_hz / 2.0) {
    fail(Errc::InvalidBand, "require 0 <= fmin < fmax <= fs/2");
  }

  MelFilterbank bank;
  bank.n_mels = n_mels;
  bank.n_bins = config.n_bins();
  bank.fmin_hz = fmin_hz;
  bank.fmax_hz = fmax_hz;
  bank.sample_rate_hz = sample_rate_hz;
  bank.weights.assign(n_mels * bank.n_bins, 0.0);

  const double mel_lo = hz_to_mel(fmin_hz);
  const double mel_hi = hz_to_mel(fmax_hz);
  std::vector<double> edges(n_mels + 2);
  for (std::size_t i = 0; i < edges.size(); ++i) {
    edges[i] = mel_to_hz(mel_lo + (mel_hi - mel_lo) * static_cast<double>(i) /
                                      static_cast<double>(n_mels + 1));
  }

  const double bin_hz = static_cast<double>(sample_rate_hz) /
                        static_cast<double>(config.fft_size);
  for (std::size_t m = 0; m < n_mels; ++m) {
    const double left = edges[m], centre = edges[m + 1], right = edges[m + 2];
    double peak = 0.0;
    for (std::size_t k = 0; k < bank.n_bins; ++k) {
      const double f = static_cast<double>(k) * bin_hz;
      const double rise = (f - left) / (centre - left);
      const double fall = (right - f) / (right - centre);
      const double w = std::max(0.0, std::min(rise, fall));
      bank.weights[m * bank.n_bins + k] = w;
      peak = std::max(peak, w);
    }
    if (peak <= 0.0) {
      fail(Errc::InvalidBand, "mel filter " + std::to_string(m) +
                                  " covers no FFT bin; use fewer mels or a larger FFT");
    }
    for (std::size_t k = 0; k < bank.n_bins; ++k) bank.weights[m * bank.n_bins + k] /= peak;
  }
  return bank;
}

}  // namespace voicebench
