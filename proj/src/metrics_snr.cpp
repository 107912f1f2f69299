#include <algorithm>
#include <cmath>
#include <numeric>

#include "voicebench/error.hpp"
#include "voicebench/metrics.hpp"

namespace voicebench {

using detail::add_flag;

Score snr(const AudioBuffer& ref, const AudioBuffer& est) {
  const auto pair = detail::align(ref, est);
  double residual = 0.0;
  for (std::size_t i = 0; i < pair.ref.size(); ++i) {
    const double d = pair.est[i] - pair.ref[i];
    residual += d * d;
  }
  Score s = detail::ratio_db(energy(pair.ref), residual);
  if (pair.trimmed) add_flag(s.flags, flag::kLengthTrimmed);
  return s;
}

namespace {

std::vector<double> zero_mean(std::span<const double> x) {
  const double mean =
      x.empty() ? 0.0 : std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(x.size());
  std::vector<double> out(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = x[i] - mean;
  return out;
}

Score si_snr_aligned(std::span<const double> ref_in, std::span<const double> est_in) {
  const auto ref = zero_mean(ref_in);
  const auto est = zero_mean(est_in);
  const double ref_energy = energy(ref);
  if (!(ref_energy > 0.0)) {
    fail(Errc::DegenerateSignal, "reference is constant");
  }
  const double est_energy = energy(est);
  if (!(est_energy > 1e-20 * energy(est_in))) {
    fail(Errc::ZeroEstimate, "estimate is zero after mean removal");
  }
  const double alpha = dot(est, ref) / ref_energy;
  double target = 0.0;
  double noise = 0.0;
  for (std::size_t i = 0; i < ref.size(); ++i) {
    const double t = alpha * ref[i];
    const double e = est[i] - t;
    target += t * t;
    noise += e * e;
  }
  return detail::ratio_db(target, noise);
}

}  // namespace

Score si_snr(const AudioBuffer& ref, const AudioBuffer& est) {
  const auto pair = detail::align(ref, est);
  Score s = si_snr_aligned(pair.ref, pair.est);
  if (pair.trimmed) add_flag(s.flags, flag::kLengthTrimmed);
  return s;
}

Score si_snr_improvement(const AudioBuffer& mixture, const AudioBuffer& est,
                         const AudioBuffer& ref) {
  const auto with_est = detail::align(ref, est);
  const auto with_mix = detail::align(ref, mixture);
  const std::size_t n = std::min(with_est.ref.size(), with_mix.ref.size());
  const Score processed = si_snr_aligned(with_est.ref.first(n), with_est.est.first(n));
  const Score baseline = si_snr_aligned(with_mix.ref.first(n), with_mix.est.first(n));

  Score s;
  s.value = processed.value - baseline.value;
  for (const auto& f : processed.flags) add_flag(s.flags, f);
  for (const auto& f : baseline.flags) add_flag(s.flags, f);
  if (with_est.trimmed || with_mix.trimmed) add_flag(s.flags, flag::kLengthTrimmed);
  return s;
}

}  // namespace voicebench
