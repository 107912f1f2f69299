#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <filesystem>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "voicebench/audio.hpp"

namespace vbtest {

using voicebench::AudioBuffer;

inline std::vector<double> white_noise(std::size_t n, std::uint64_t seed, double scale = 1.0) {
  std::mt19937_64 gen(seed);
  std::normal_distribution<double> dist(0.0, scale);
  std::vector<double> x(n);
  for (auto& v : x) v = dist(gen);
  return x;
}

inline std::vector<double> sine(std::size_t n, double freq, int fs, double amp = 1.0, double phase = 0.0) {
  std::vector<double> x(n);
  for (std::size_t i = 0; i < n; ++i) {
    x[i] = amp * std::sin(2.0 * std::numbers::pi * freq * static_cast<double>(i) / fs + phase);
  }
  return x;
}

inline AudioBuffer mono(std::vector<double> x, int fs) { return AudioBuffer::mono(std::move(x), fs); }

inline std::vector<double> samples(const AudioBuffer& b) {
  const auto s = b.mono_samples();
  return {s.begin(), s.end()};
}

inline double sum_sq(const std::vector<double>& x) {
  double s = 0.0;
  for (double v : x) s += v * v;
  return s;
}

inline double db(double ratio) { return 10.0 * std::log10(ratio); }

inline std::vector<double> direct_convolve(const std::vector<double>& a, const std::vector<double>& b) {
  std::vector<double> out(a.size() + b.size() - 1, 0.0);
  for (std::size_t i = 0; i < a.size(); ++i) {
    for (std::size_t j = 0; j < b.size(); ++j) out[i + j] += a[i] * b[j];
  }
  return out;
}

/// O(n^2) DFT bin k of x.
inline std::complex<double> dft_bin(const std::vector<double>& x, std::size_t k, std::size_t n) {
  std::complex<double> acc = 0.0;
  for (std::size_t t = 0; t < x.size() && t < n; ++t) {
    const double ang = -2.0 * std::numbers::pi * static_cast<double>(k * t % n) / static_cast<double>(n);
    acc += x[t] * std::complex<double>(std::cos(ang), std::sin(ang));
  }
  return acc;
}

/// Sum of sinusoids at random frequencies below fmax with a Hann fade at
/// both ends, so the content is band-limited and edges are quiet.
inline std::vector<double> band_limited_noise(std::size_t n, int fs, double fmax, std::uint64_t seed,
                                              std::size_t partials = 200) {
  std::mt19937_64 gen(seed);
  std::uniform_real_distribution<double> f(20.0, fmax), ph(0.0, 2.0 * std::numbers::pi);
  std::vector<double> x(n, 0.0);
  for (std::size_t p = 0; p < partials; ++p) {
    const double w = 2.0 * std::numbers::pi * f(gen) / fs;
    const double phi = ph(gen);
    for (std::size_t i = 0; i < n; ++i) x[i] += std::sin(w * static_cast<double>(i) + phi);
  }
  const double scale = 0.1 / std::sqrt(static_cast<double>(partials) / 2.0);
  const std::size_t fade = std::min<std::size_t>(n / 4, static_cast<std::size_t>(fs / 20));
  for (std::size_t i = 0; i < n; ++i) {
    double g = 1.0;
    if (i < fade) g = 0.5 - 0.5 * std::cos(std::numbers::pi * static_cast<double>(i) / fade);
    if (n - 1 - i < fade) g = 0.5 - 0.5 * std::cos(std::numbers::pi * static_cast<double>(n - 1 - i) / fade);
    x[i] *= scale * g;
  }
  return x;
}

class TempDir {
 public:
  TempDir() {
    std::random_device rd;
    path_ = std::filesystem::temp_directory_path() /
            ("voicebench_test_" + std::to_string(rd()) + std::to_string(rd()));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& rel) const { return path_ / rel; }

 private:
  std::filesystem::path path_;
};

}  // namespace vbtest
