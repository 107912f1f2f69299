// Integrated loudness: K-weighting (high-shelf pre-filter followed by the
// RLB high-pass), 400 ms blocks every 100 ms, absolute gate at -70 LKFS and
// relative gate 10 LU below the absolute-gated level. Filter coefficients are
// derived from the analogue prototypes so any sample rate is supported; at
// 48 kHz they reproduce the published table.

#include <cmath>
#include <numbers>

#include "voicebench/error.hpp"
#include "voicebench/metrics.hpp"

namespace voicebench {

namespace {

struct Biquad {
  double b0, b1, b2, a1, a2;

  void run(std::vector<double>& x) const {
    double z1 = 0.0, z2 = 0.0;
    for (double& v : x) {
      const double in = v;
      const double out = b0 * in + z1;
      z1 = b1 * in - a1 * out + z2;
      z2 = b2 * in - a2 * out;
      v = out;
    }
  }
};

Biquad shelf_stage(double fs) {
  const double f0 = 1681.974450955533;
  const double gain_db = 3.999843853973347;
  const double q = 0.7071752369554196;
  const double k = std::tan(std::numbers::pi * f0 / fs);
  const double vh = std::pow(10.0, gain_db / 20.0);
  const double vb = std::pow(vh, 0.4996667741545416);
  const double a0 = 1.0 + k / q + k * k;
  return {(vh + vb * k / q + k * k) / a0, 2.0 * (k * k - vh) / a0,
          (vh - vb * k / q + k * k) / a0, 2.0 * (k * k - 1.0) / a0,
          (1.0 - k / q + k * k) / a0};
}

Biquad highpass_stage(double fs) {
  const double f0 = 38.13547087602444;
  const double q = 0.5003270373238773;
  const double k = std::tan(std::numbers::pi * f0 / fs);
  const double a0 = 1.0 + k / q + k * k;
  return {1.0, -2.0, 1.0, 2.0 * (k * k - 1.0) / a0, (1.0 - k / q + k * k) / a0};
}

constexpr double kOffset = -0.691;
constexpr double kAbsoluteGate = -70.0;
constexpr double kRelativeGate = -10.0;

}  // namespace

Score loudness_lufs(const AudioBuffer& audio) {
  const double fs = audio.sample_rate();
  const auto block = static_cast<std::size_t>(std::lround(0.4 * fs));
  const auto step = static_cast<std::size_t>(std::lround(0.1 * fs));
  const std::size_t frames = audio.frames();
  if (frames < block) {
    fail(Errc::SilentOrGatedOut, "signal shorter than one 400 ms gating block");
  }
  const std::size_t n_blocks = 1 + (frames - block) / step;

  // Mean square per block, summed over channels (all weights 1.0).
  std::vector<double> z(n_blocks, 0.0);
  const Biquad shelf = shelf_stage(fs);
  const Biquad hp = highpass_stage(fs);
  for (int c = 0; c < audio.channels(); ++c) {
    auto ch = audio.channel(c);
    std::vector<double> y(ch.begin(), ch.end());
    shelf.run(y);
    hp.run(y);
    for (std::size_t j = 0; j < n_blocks; ++j) {
      z[j] += energy(std::span<const double>(y).subspan(j * step, block)) /
              static_cast<double>(block);
    }
  }

  auto lkfs = [](double ms) { return kOffset + 10.0 * std::log10(ms); };

  double sum = 0.0;
  std::size_t count = 0;
  for (double v : z) {
    if (v > 0.0 && lkfs(v) > kAbsoluteGate) {
      sum += v;
      ++count;
    }
  }
  if (count == 0) fail(Errc::SilentOrGatedOut, "no block above the absolute gate");
  const double relative = lkfs(sum / static_cast<double>(count)) + kRelativeGate;

  sum = 0.0;
  count = 0;
  for (double v : z) {
    if (v > 0.0 && lkfs(v) > kAbsoluteGate && lkfs(v) > relative) {
      sum += v;
      ++count;
    }
  }
  if (count == 0) fail(Errc::SilentOrGatedOut, "no block above the relative gate");
  Score s;
  s.value = lkfs(sum / static_cast<double>(count));
  return s;
}

}  // namespace voicebench
