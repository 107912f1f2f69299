// Image-source room impulse responses after Allen & Berkley, with the
// image enumeration and optional 100 Hz high-pass of the reference
// RIR generator. Each image is placed with an 81-tap Hann-windowed sinc at
// its fractional arrival time.

#include <algorithm>
#include <cmath>
#include <numbers>

#include "voicebench/error.hpp"
#include "voicebench/simulate.hpp"

namespace voicebench {

void RoomSpec::validate() const {
  for (int i = 0; i < 3; ++i) {
    if (!(dimensions_m[i] > 0.0)) fail(Errc::InvalidRoom, "room dimensions must be positive");
    for (const auto* p : {&source_pos_m, &mic_pos_m}) {
      if (!((*p)[i] > 0.0 && (*p)[i] < dimensions_m[i])) {
        fail(Errc::InvalidRoom, "source and microphone must lie strictly inside the room");
      }
    }
  }
  double d2 = 0.0;
  for (int i = 0; i < 3; ++i) d2 += std::pow(source_pos_m[i] - mic_pos_m[i], 2);
  if (std::sqrt(d2) < 0.01) fail(Errc::InvalidRoom, "source and microphone closer than 1 cm");
  if (sample_rate_hz <= 0) fail(Errc::InvalidRoom, "sample rate must be positive");
  if (!(sound_speed_mps > 0.0)) fail(Errc::InvalidRoom, "sound speed must be positive");
  if (rir_length_samples < 1) fail(Errc::InvalidRoom, "RIR length must be positive");
  if (max_order < -1) fail(Errc::InvalidRoom, "max_order must be >= 0 (or -1 for all)");
  if (reflection_coeffs) {
    for (double b : *reflection_coeffs) {
      if (!(b >= 0.0 && b < 1.0)) fail(Errc::InvalidRoom, "reflection coefficients must be in [0, 1)");
    }
  } else if (!rt60_s) {
    fail(Errc::InvalidRoom, "either rt60_s or reflection_coeffs is required");
  } else if (!(*rt60_s > 0.0)) {
    fail(Errc::InvalidRoom, "rt60 must be positive");
  }
}

std::array<double, 6> rt60_to_reflection(const RoomSpec& room) {
  if (!room.rt60_s || !(*room.rt60_s > 0.0)) {
    fail(Errc::InvalidRoom, "rt60 must be positive");
  }
  const auto& d = room.dimensions_m;
  const double volume = d[0] * d[1] * d[2];
  const double surface = 2.0 * (d[0] * d[1] + d[0] * d[2] + d[1] * d[2]);
  const double alpha = 0.161 * volume / (surface * *room.rt60_s);
  if (alpha >= 1.0) {
    fail(Errc::UnachievableRT60, "RT60 " + std::to_string(*room.rt60_s) +
                                     " s needs absorption " + std::to_string(alpha) + " >= 1");
  }
  std::array<double, 6> beta;
  beta.fill(std::sqrt(1.0 - alpha));
  return beta;
}

namespace {

std::vector<double> powers(double base, int max_exp) {
  std::vector<double> out(static_cast<std::size_t>(max_exp) + 1);
  double v = 1.0;
  for (auto& p : out) {
    p = v;
    v *= base;
  }
  return out;
}

void high_pass_100hz(std::vector<double>& h, double fs) {
  const double w = 2.0 * std::numbers::pi * 100.0 / fs;
  const double r1 = std::exp(-w);
  const double b1 = 2.0 * r1 * std::cos(w);
  const double b2 = -r1 * r1;
  const double a1 = -(1.0 + r1);
  double y0 = 0.0, y1 = 0.0, y2 = 0.0;
  for (double& x : h) {
    y2 = y1;
    y1 = y0;
    y0 = b1 * y1 + b2 * y2 + x;
    x = y0 + a1 * y1 + r1 * y2;
  }
}

}  // namespace

AudioBuffer generate_rir(const RoomSpec& room) {
  room.validate();
  const auto beta = room.reflection_coeffs ? *room.reflection_coeffs : rt60_to_reflection(room);

  const double fs = room.sample_rate_hz;
  const double samples_per_m = fs / room.sound_speed_mps;
  const auto n_samples = room.rir_length_samples;
  std::array<double, 3> src, mic, len;
  for (int i = 0; i < 3; ++i) {
    src[i] = room.source_pos_m[i] * samples_per_m;
    mic[i] = room.mic_pos_m[i] * samples_per_m;
    len[i] = room.dimensions_m[i] * samples_per_m;
  }
  std::array<int, 3> reach;
  for (int i = 0; i < 3; ++i) {
    reach[i] = static_cast<int>(std::ceil(static_cast<double>(n_samples) / (2.0 * len[i])));
  }

  std::array<std::vector<double>, 6> pw;
  for (int w = 0; w < 6; ++w) pw[w] = powers(beta[w], reach[w / 2] + 1);

  constexpr int kHalfTaps = static_cast<int>(kRirKernelTaps / 2);
  constexpr double kWindowHalf = kHalfTaps + 1.0;
  const double horizon = static_cast<double>(n_samples) + kHalfTaps;

  std::vector<double> h(n_samples, 0.0);
  for (int mx = -reach[0]; mx <= reach[0]; ++mx) {
    for (int my = -reach[1]; my <= reach[1]; ++my) {
      for (int mz = -reach[2]; mz <= reach[2]; ++mz) {
        for (int q = 0; q <= 1; ++q) {
          const double dx = (1 - 2 * q) * src[0] - mic[0] + 2.0 * mx * len[0];
          const double rx = pw[0][static_cast<std::size_t>(std::abs(mx - q))] *
                            pw[1][static_cast<std::size_t>(std::abs(mx))];
          for (int j = 0; j <= 1; ++j) {
            const double dy = (1 - 2 * j) * src[1] - mic[1] + 2.0 * my * len[1];
            const double ry = pw[2][static_cast<std::size_t>(std::abs(my - j))] *
                              pw[3][static_cast<std::size_t>(std::abs(my))];
            for (int k = 0; k <= 1; ++k) {
              const int order = std::abs(2 * mx - q) + std::abs(2 * my - j) + std::abs(2 * mz - k);
              if (room.max_order >= 0 && order > room.max_order) continue;
              const double dz = (1 - 2 * k) * src[2] - mic[2] + 2.0 * mz * len[2];
              const double delay = std::sqrt(dx * dx + dy * dy + dz * dz);
              if (delay >= horizon) continue;
              const double rz = pw[4][static_cast<std::size_t>(std::abs(mz - k))] *
                                pw[5][static_cast<std::size_t>(std::abs(mz))];
              const double gain = rx * ry * rz /
                                  (4.0 * std::numbers::pi * delay / samples_per_m);
              if (gain == 0.0) continue;
              const auto centre = static_cast<long>(std::lround(delay));
              for (long n = centre - kHalfTaps; n <= centre + kHalfTaps; ++n) {
                if (n < 0 || n >= static_cast<long>(n_samples)) continue;
                const double t = static_cast<double>(n) - delay;
                const double pt = std::numbers::pi * t;
                const double sinc = t == 0.0 ? 1.0 : std::sin(pt) / pt;
                const double win = 0.5 * (1.0 + std::cos(std::numbers::pi * t / kWindowHalf));
                h[static_cast<std::size_t>(n)] += gain * sinc * win;
              }
            }
          }
        }
      }
    }
  }
  if (room.high_pass) high_pass_100hz(h, fs);
  return AudioBuffer::mono(std::move(h), room.sample_rate_hz);
}

std::optional<double> estimate_rt60(std::span<const double> rir, int sample_rate_hz) {
  if (rir.empty() || sample_rate_hz <= 0) return std::nullopt;
  std::vector<double> edc(rir.size());
  double acc = 0.0;
  for (std::size_t i = rir.size(); i-- > 0;) {
    acc += rir[i] * rir[i];
    edc[i] = acc;
  }
  if (!(acc > 0.0)) return std::nullopt;
  const double total = acc;

  // Least-squares line through the -5..-25 dB portion of the decay curve.
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  std::size_t n = 0;
  bool reached = false;
  for (std::size_t i = 0; i < edc.size(); ++i) {
    const double db = 10.0 * std::log10(edc[i] / total);
    if (db < -25.0) {
      reached = true;
      break;
    }
    if (db <= -5.0) {
      const double t = static_cast<double>(i) / sample_rate_hz;
      sx += t;
      sy += db;
      sxx += t * t;
      sxy += t * db;
      ++n;
    }
  }
  if (!reached || n < 2) return std::nullopt;
  const double dn = static_cast<double>(n);
  const double slope = (dn * sxy - sx * sy) / (dn * sxx - sx * sx);
  if (!(slope < 0.0)) return std::nullopt;
  return -60.0 / slope;
}

}  // namespace voicebench
