#include <algorithm>
#include <cmath>
#include <numbers>

#include "voicebench/error.hpp"
#include "voicebench/metrics.hpp"

namespace voicebench {

using detail::add_flag;

Score lsd(const AudioBuffer& ref, const AudioBuffer& est,
          std::optional<StftConfig> config) {
  const auto pair = detail::align(ref, est);
  const StftConfig cfg = config.value_or(default_metric_stft(pair.sample_rate_hz));
  const auto ref_power = power_spectrum(stft(pair.ref, cfg, pair.sample_rate_hz));
  const auto est_power = power_spectrum(stft(pair.est, cfg, pair.sample_rate_hz));
  const std::size_t bins = cfg.n_bins();
  const std::size_t frames = ref_power.size() / bins;

  Score s;
  double total = 0.0;
  std::size_t used = 0;
  for (std::size_t t = 0; t < frames; ++t) {
    const double* r = ref_power.data() + t * bins;
    const double* e = est_power.data() + t * bins;
    bool silent = true;
    for (std::size_t k = 0; k < bins && silent; ++k) {
      silent = r[k] < kLsdEpsilon && e[k] < kLsdEpsilon;
    }
    if (silent) {
      add_flag(s.flags, flag::kSilentFramesSkipped);
      continue;
    }
    double acc = 0.0;
    for (std::size_t k = 0; k < bins; ++k) {
      const double d = 10.0 * std::log10((r[k] + kLsdEpsilon) / (e[k] + kLsdEpsilon));
      acc += d * d;
    }
    total += std::sqrt(acc / static_cast<double>(bins));
    ++used;
  }
  if (used == 0) fail(Errc::DegenerateSignal, "every analysis frame is silent");
  s.value = total / static_cast<double>(used);
  if (pair.trimmed) add_flag(s.flags, flag::kLengthTrimmed);
  return s;
}

namespace {

constexpr double kMelFloor = 1e-10;
// Reference frames this far below the loudest frame are not scored.
constexpr double kMcdSilenceDb = 60.0;

/// Orthonormal DCT-II coefficients 1..order of `x`.
std::vector<double> dct_ii_tail(std::span<const double> x, std::size_t order) {
  const double n = static_cast<double>(x.size());
  const double scale = std::sqrt(2.0 / n);
  std::vector<double> out(order);
  for (std::size_t k = 1; k <= order; ++k) {
    double acc = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
      acc += x[i] * std::cos(std::numbers::pi * static_cast<double>(k) *
                             (2.0 * static_cast<double>(i) + 1.0) / (2.0 * n));
    }
    out[k - 1] = scale * acc;
  }
  return out;
}

}  // namespace

Score mcd(const AudioBuffer& ref, const AudioBuffer& est, std::size_t n_mels,
          std::size_t order) {
  if (order < 1 || order >= n_mels) {
    fail(Errc::InvalidArgument, "cepstral order must be in [1, n_mels)");
  }
  const auto pair = detail::align(ref, est);
  const StftConfig cfg = default_metric_stft(pair.sample_rate_hz);
  const auto bank = mel_filterbank(n_mels, cfg, pair.sample_rate_hz, 0.0,
                                   pair.sample_rate_hz / 2.0);
  const auto ref_power = power_spectrum(stft(pair.ref, cfg, pair.sample_rate_hz));
  const auto est_power = power_spectrum(stft(pair.est, cfg, pair.sample_rate_hz));
  const std::size_t bins = cfg.n_bins();
  const std::size_t frames = ref_power.size() / bins;

  std::vector<double> frame_energy(frames);
  for (std::size_t t = 0; t < frames; ++t) {
    frame_energy[t] = 0.0;
    for (std::size_t k = 0; k < bins; ++k) frame_energy[t] += ref_power[t * bins + k];
  }
  const double loudest = *std::max_element(frame_energy.begin(), frame_energy.end());
  const double threshold = loudest * std::pow(10.0, -kMcdSilenceDb / 10.0);

  Score s;
  double total = 0.0;
  std::size_t used = 0;
  std::vector<double> log_ref(n_mels), log_est(n_mels);
  for (std::size_t t = 0; t < frames; ++t) {
    if (frame_energy[t] <= threshold) {
      add_flag(s.flags, flag::kSilentFramesSkipped);
      continue;
    }
    const auto mel_ref = bank.apply(std::span(ref_power).subspan(t * bins, bins));
    const auto mel_est = bank.apply(std::span(est_power).subspan(t * bins, bins));
    for (std::size_t m = 0; m < n_mels; ++m) {
      log_ref[m] = std::log(mel_ref[m] + kMelFloor);
      log_est[m] = std::log(mel_est[m] + kMelFloor);
    }
    const auto c_ref = dct_ii_tail(log_ref, order);
    const auto c_est = dct_ii_tail(log_est, order);
    double acc = 0.0;
    for (std::size_t k = 0; k < order; ++k) {
      const double d = c_ref[k] - c_est[k];
      acc += d * d;
    }
    total += std::sqrt(acc);
    ++used;
  }
  if (used == 0) fail(Errc::DegenerateSignal, "no non-silent reference frames");
  s.value = 10.0 * std::numbers::sqrt2 / std::numbers::ln10 * total /
            static_cast<double>(used);
  if (pair.trimmed) add_flag(s.flags, flag::kLengthTrimmed);
  return s;
}

}  // namespace voicebench
