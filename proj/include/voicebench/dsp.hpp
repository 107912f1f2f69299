#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

#include "voicebench/audio.hpp"

namespace voicebench {

using Complex = std::complex<double>;

// ---------------------------------------------------------------------------
// FFT

bool is_power_of_two(std::size_t n) noexcept;
std::size_t next_power_of_two(std::size_t n) noexcept;

/// In-place radix-2 complex FFT. Size must be a power of two. Plans are
/// cached per thread.
void fft_inplace(std::span<Complex> data, bool inverse = false);

/// Real-input FFT of `x` zero-padded (or truncated) to `n` points; returns
/// the n/2 + 1 non-negative frequency bins.
std::vector<Complex> rfft(std::span<const double> x, std::size_t n);

/// Inverse of rfft for an n-point transform (1/n scaling applied).
std::vector<double> irfft(std::span<const Complex> bins, std::size_t n);

// ---------------------------------------------------------------------------
// STFT

enum class WindowType { Hann, Hamming, SqrtHann };

/// Periodic window of length n.
std::vector<double> make_window(WindowType type, std::size_t n);

/// Analysis parameters. Frames are `win_length` samples, windowed and
/// zero-padded to `fft_size`. With `center`, the signal is reflect-padded by
/// fft_size / 2 on both sides.
struct StftConfig {
  std::size_t fft_size = 512;
  std::size_t win_length = 512;
  std::size_t hop_length = 256;
  WindowType window = WindowType::Hann;
  bool center = true;

  std::size_t n_bins() const noexcept { return fft_size / 2 + 1; }
  void validate() const;
};

/// Defaults used by the spectral metrics: 512/512/256 below 32 kHz,
/// 2048/2048/512 at 32 kHz and above.
StftConfig default_metric_stft(int sample_rate_hz);

/// True when the analysis window overlap-adds to a constant at this hop.
bool is_cola(const StftConfig& config, double tolerance = 1e-9);

struct Spectrogram {
  std::size_t n_frames = 0;
  std::size_t n_bins = 0;
  std::vector<Complex> data;  // row-major [n_frames x n_bins]
  StftConfig config;
  int sample_rate_hz = 0;
  std::size_t signal_length = 0;

  std::span<const Complex> frame(std::size_t t) const {
    return std::span<const Complex>(data).subspan(t * n_bins, n_bins);
  }
  const Complex& at(std::size_t t, std::size_t k) const {
    return data[t * n_bins + k];
  }
};

Spectrogram stft(std::span<const double> signal, const StftConfig& config,
                 int sample_rate_hz);
Spectrogram stft(const AudioBuffer& audio, const StftConfig& config);

/// Weighted overlap-add inverse normalised by the squared-window envelope.
/// Throws NonColaConfig if the envelope vanishes inside the signal.
AudioBuffer istft(const Spectrogram& spec);

/// |X|^2 per frame, row-major like the spectrogram.
std::vector<double> power_spectrum(const Spectrogram& spec);

// ---------------------------------------------------------------------------
// Mel filterbank

double hz_to_mel(double hz) noexcept;  // HTK: 2595 log10(1 + f/700)
double mel_to_hz(double mel) noexcept;

struct MelFilterbank {
  std::size_t n_mels = 0;
  std::size_t n_bins = 0;
  std::vector<double> weights;  // row-major [n_mels x n_bins]
  double fmin_hz = 0.0;
  double fmax_hz = 0.0;
  int sample_rate_hz = 0;

  std::span<const double> row(std::size_t m) const {
    return std::span<const double>(weights).subspan(m * n_bins, n_bins);
  }
  /// Mel-band energies for one power-spectrum frame.
  std::vector<double> apply(std::span<const double> power_frame) const;
};

/// Triangular filters with centres equally spaced on the HTK mel scale,
/// each scaled so its largest weight is 1.
MelFilterbank mel_filterbank(std::size_t n_mels, const StftConfig& config,
                             int sample_rate_hz, double fmin_hz, double fmax_hz);

// ---------------------------------------------------------------------------
// Filtering and resampling

/// Full linear convolution (length n + m - 1).
std::vector<double> fft_convolve(std::span<const double> signal,
                                 std::span<const double> kernel);
AudioBuffer fft_convolve(const AudioBuffer& signal, std::span<const double> kernel);

/// Kaiser beta for a stopband attenuation in dB.
double kaiser_beta(double attenuation_db) noexcept;

/// Odd-length linear-phase low-pass taps. Frequencies are in cycles per
/// sample; `cutoff` is the -6 dB point.
std::vector<double> kaiser_lowpass_taps(double cutoff, double transition,
                                        double attenuation_db);

/// Windowed-sinc low-pass with passband edge `cutoff_hz` and stopband edge
/// `cutoff_hz + transition_hz`; zero-phase (delay compensated).
AudioBuffer lowpass(const AudioBuffer& audio, double cutoff_hz,
                    double transition_hz);
std::vector<double> lowpass(std::span<const double> signal, int sample_rate_hz,
                            double cutoff_hz, double transition_hz);

/// Rational polyphase resampler. Output length is
/// round(len * target / source).
AudioBuffer resample(const AudioBuffer& audio, int target_hz);
std::vector<double> resample(std::span<const double> signal, int source_hz,
                             int target_hz);

// Small numeric helpers shared across modules.
double energy(std::span<const double> x) noexcept;
double dot(std::span<const double> a, std::span<const double> b) noexcept;

}  // namespace voicebench
