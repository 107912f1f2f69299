#include <cmath>
#include <memory>
#include <numbers>
#include <unordered_map>

#include "voicebench/dsp.hpp"
#include "voicebench/error.hpp"

namespace voicebench {

bool is_power_of_two(std::size_t n) noexcept { return n != 0 && (n & (n - 1)) == 0; }

std::size_t next_power_of_two(std::size_t n) noexcept {
  std::size_t p = 1;
  while (p < n) p <<= 1;
  return p;
}

namespace {

struct FftPlan {
  explicit FftPlan(std::size_t n) : size(n), twiddles(n / 2), bitrev(n) {
    for (std::size_t k = 0; k < n / 2; ++k) {
      const double angle = -2.0 * std::numbers::pi * static_cast<double>(k) /
                           static_cast<double>(n);
      twiddles[k] = Complex(std::cos(angle), std::sin(angle));
    }
    std::size_t bits = 0;
    while ((std::size_t{1} << bits) < n) ++bits;
    for (std::size_t i = 0; i < n; ++i) {
      std::size_t r = 0;
      for (std::size_t b = 0; b < bits; ++b) {
        if (i & (std::size_t{1} << b)) r |= std::size_t{1} << (bits - 1 - b);
      }
      bitrev[i] = r;
    }
  }

  std::size_t size;
  std::vector<Complex> twiddles;
  std::vector<std::size_t> bitrev;
};

const FftPlan& plan_for(std::size_t n) {
  thread_local std::unordered_map<std::size_t, std::unique_ptr<FftPlan>> cache;
  auto& slot = cache[n];
  if (!slot) slot = std::make_unique<FftPlan>(n);
  return *slot;
}

}  // namespace

void fft_inplace(std::span<Complex> data, bool inverse) {
  const std::size_t n = data.size();
  if (!is_power_of_two(n)) {
    fail(Errc::InvalidArgument, "FFT size " + std::to_string(n) +
                                    " is not a power of two");
  }
  if (n == 1) return;
  const FftPlan& plan = plan_for(n);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t j = plan.bitrev[i];
    if (i < j) std::swap(data[i], data[j]);
  }
  for (std::size_t len = 2; len <= n; len <<= 1) {
    const std::size_t half = len / 2;
    const std::size_t stride = n / len;
    for (std::size_t start = 0; start < n; start += len) {
      for (std::size_t k = 0; k < half; ++k) {
        Complex w = plan.twiddles[k * stride];
        if (inverse) w = std::conj(w);
        const Complex u = data[start + k];
        const Complex v = data[start + k + half] * w;
        data[start + k] = u + v;
        data[start + k + half] = u - v;
      }
    }
  }
}

std::vector<Complex> rfft(std::span<const double> x, std::size_t n) {
  std::vector<Complex> buf(n);
  const std::size_t m = std::min(n, x.size());
  for (std::size_t i = 0; i < m; ++i) buf[i] = x[i];
  fft_inplace(buf);
  buf.resize(n / 2 + 1);
  return buf;
}

std::vector<double> irfft(std::span<const Complex> bins, std::size_t n) {
  if (bins.size() != n / 2 + 1) {
    fail(Errc::InvalidArgument, "irfft expects n/2+1 bins");
  }
  std::vector<Complex> buf(n);
  for (std::size_t k = 0; k <= n / 2; ++k) buf[k] = bins[k];
  for (std::size_t k = n / 2 + 1; k < n; ++k) buf[k] = std::conj(bins[n - k]);
  fft_inplace(buf, true);
  std::vector<double> out(n);
  const double inv = 1.0 / static_cast<double>(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = buf[i].real() * inv;
  return out;
}

double energy(std::span<const double> x) noexcept {
  double acc = 0.0;
  for (double v : x) acc += v * v;
  return acc;
}

double dot(std::span<const double> a, std::span<const double> b) noexcept {
  double acc = 0.0;
  const std::size_t n = std::min(a.size(), b.size());
  for (std::size_t i = 0; i < n; ++i) acc += a[i] * b[i];
  return acc;
}

}  // namespace voicebench
