// Classic STOI (Taal et al.): one-third-octave envelopes at 10 kHz,
// 30-frame segments, clipped and normalised estimate envelopes.

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "voicebench/error.hpp"
#include "voicebench/metrics.hpp"

namespace voicebench {

namespace {

constexpr int kStoiRate = 10000;
constexpr std::size_t kFrameLen = 256;
constexpr std::size_t kHop = kFrameLen / 2;
constexpr std::size_t kFftSize = 512;
constexpr std::size_t kBands = 15;
constexpr double kMinFreq = 150.0;
constexpr std::size_t kSegment = 30;
constexpr double kBetaDb = -15.0;
constexpr double kDynRangeDb = 40.0;
constexpr double kEps = std::numeric_limits<double>::epsilon();

/// Symmetric Hann of length n without its zero end-points.
std::vector<double> stoi_window() {
  std::vector<double> w(kFrameLen);
  for (std::size_t i = 0; i < kFrameLen; ++i) {
    w[i] = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * static_cast<double>(i + 1) /
                                static_cast<double>(kFrameLen + 1));
  }
  return w;
}

/// Drops frames of both signals where the reference frame is more than
/// kDynRangeDb below the loudest one, then overlap-adds the survivors.
void remove_silent_frames(std::vector<double>& x, std::vector<double>& y) {
  const auto w = stoi_window();
  std::vector<std::size_t> starts;
  for (std::size_t i = 0; i + kFrameLen <= x.size(); i += kHop) starts.push_back(i);

  std::vector<double> energies(starts.size());
  for (std::size_t f = 0; f < starts.size(); ++f) {
    double acc = 0.0;
    for (std::size_t i = 0; i < kFrameLen; ++i) {
      const double v = w[i] * x[starts[f] + i];
      acc += v * v;
    }
    energies[f] = 20.0 * std::log10(std::sqrt(acc) + kEps);
  }
  const double loudest = energies.empty()
                             ? 0.0
                             : *std::max_element(energies.begin(), energies.end());

  std::vector<std::size_t> kept;
  for (std::size_t f = 0; f < starts.size(); ++f) {
    if (loudest - kDynRangeDb - energies[f] < 0.0) kept.push_back(starts[f]);
  }
  const std::size_t out_len = kept.empty() ? 0 : (kept.size() - 1) * kHop + kFrameLen;
  std::vector<double> xs(out_len, 0.0), ys(out_len, 0.0);
  for (std::size_t k = 0; k < kept.size(); ++k) {
    for (std::size_t i = 0; i < kFrameLen; ++i) {
      xs[k * kHop + i] += w[i] * x[kept[k] + i];
      ys[k * kHop + i] += w[i] * y[kept[k] + i];
    }
  }
  x = std::move(xs);
  y = std::move(ys);
}

/// Band-by-frame one-third-octave magnitudes, row-major [kBands x frames].
std::vector<double> third_octave_envelopes(const std::vector<double>& x,
                                           std::size_t& n_frames) {
  const auto w = stoi_window();
  const std::size_t n_bins = kFftSize / 2 + 1;

  // Band edges snapped to the nearest FFT bin.
  std::vector<std::size_t> lo(kBands), hi(kBands);
  auto nearest_bin = [&](double f) {
    const double bin_hz = static_cast<double>(kStoiRate) / kFftSize;
    std::size_t best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < n_bins; ++k) {
      const double d = std::abs(static_cast<double>(k) * bin_hz - f);
      if (d < best_d) { best_d = d; best = k; }
    }
    return best;
  };
  for (std::size_t b = 0; b < kBands; ++b) {
    const double k = static_cast<double>(b);
    lo[b] = nearest_bin(kMinFreq * std::pow(2.0, (2.0 * k - 1.0) / 6.0));
    hi[b] = nearest_bin(kMinFreq * std::pow(2.0, (2.0 * k + 1.0) / 6.0));
  }

  std::vector<std::size_t> starts;
  for (std::size_t i = 0; i + kFrameLen < x.size(); i += kHop) starts.push_back(i);
  n_frames = starts.size();

  std::vector<double> out(kBands * n_frames, 0.0);
  std::vector<double> frame(kFrameLen);
  for (std::size_t t = 0; t < n_frames; ++t) {
    for (std::size_t i = 0; i < kFrameLen; ++i) frame[i] = w[i] * x[starts[t] + i];
    const auto spec = rfft(frame, kFftSize);
    for (std::size_t b = 0; b < kBands; ++b) {
      double acc = 0.0;
      for (std::size_t k = lo[b]; k < hi[b]; ++k) acc += std::norm(spec[k]);
      out[b * n_frames + t] = std::sqrt(acc);
    }
  }
  return out;
}

}  // namespace

Score stoi(const AudioBuffer& ref, const AudioBuffer& est) {
  const auto pair = detail::align(ref, est);
  std::vector<double> x(pair.ref.begin(), pair.ref.end());
  std::vector<double> y(pair.est.begin(), pair.est.end());
  if (pair.sample_rate_hz != kStoiRate) {
    x = resample(x, pair.sample_rate_hz, kStoiRate);
    y = resample(y, pair.sample_rate_hz, kStoiRate);
  }

  remove_silent_frames(x, y);
  std::size_t n_frames = 0;
  const auto x_env = third_octave_envelopes(x, n_frames);
  const auto y_env = third_octave_envelopes(y, n_frames);
  if (n_frames < kSegment) {
    fail(Errc::TooShort, std::to_string(n_frames) +
                             " analysis frames after silence removal; need " +
                             std::to_string(kSegment));
  }

  const double clip = std::pow(10.0, -kBetaDb / 20.0);
  std::vector<double> xs(kSegment), ys(kSegment);
  double total = 0.0;
  std::size_t count = 0;
  for (std::size_t m = kSegment; m <= n_frames; ++m) {
    for (std::size_t b = 0; b < kBands; ++b) {
      const double* xr = x_env.data() + b * n_frames + (m - kSegment);
      const double* yr = y_env.data() + b * n_frames + (m - kSegment);
      double x_norm = 0.0, y_norm = 0.0;
      for (std::size_t i = 0; i < kSegment; ++i) {
        x_norm += xr[i] * xr[i];
        y_norm += yr[i] * yr[i];
      }
      const double gain = std::sqrt(x_norm) / (std::sqrt(y_norm) + kEps);
      double x_mean = 0.0, y_mean = 0.0;
      for (std::size_t i = 0; i < kSegment; ++i) {
        xs[i] = xr[i];
        ys[i] = std::min(yr[i] * gain, xr[i] * (1.0 + clip));
        x_mean += xs[i];
        y_mean += ys[i];
      }
      x_mean /= kSegment;
      y_mean /= kSegment;
      double xx = 0.0, yy = 0.0, xy = 0.0;
      for (std::size_t i = 0; i < kSegment; ++i) {
        xs[i] -= x_mean;
        ys[i] -= y_mean;
        xx += xs[i] * xs[i];
        yy += ys[i] * ys[i];
        xy += xs[i] * ys[i];
      }
      const double nx = std::sqrt(xx) + kEps;
      const double ny = std::sqrt(yy) + kEps;
      total += xy / (nx * ny);
      ++count;
    }
  }

  Score s;
  s.value = total / static_cast<double>(count);
  if (s.value < 0.0) {
    s.value = 0.0;
    detail::add_flag(s.flags, flag::kFloored);
  }
  if (pair.trimmed) detail::add_flag(s.flags, flag::kLengthTrimmed);
  return s;
}

}  // namespace voicebench
