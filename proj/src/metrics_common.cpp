#include <algorithm>
#include <cmath>

#include "voicebench/error.hpp"
#include "voicebench/metrics.hpp"

namespace voicebench {

bool Score::has_flag(std::string_view name) const {
  return std::find(flags.begin(), flags.end(), name) != flags.end();
}

bool MetricReport::capped(const std::string& metric) const {
  auto it = metric_flags.find(metric);
  if (it == metric_flags.end()) return false;
  return std::find(it->second.begin(), it->second.end(), flag::kCapped) !=
         it->second.end();
}

namespace detail {

void add_flag(std::vector<std::string>& flags, std::string_view name) {
  if (std::find(flags.begin(), flags.end(), name) == flags.end()) {
    flags.emplace_back(name);
  }
}

Score ratio_db(double numerator, double denominator) {
  Score s;
  if (!(numerator > 0.0)) {
    s.value = -kCapDb;
    add_flag(s.flags, flag::kFloored);
    return s;
  }
  if (denominator < 1e-20 * numerator) {
    s.value = kCapDb;
    add_flag(s.flags, flag::kCapped);
    return s;
  }
  s.value = 10.0 * std::log10(numerator / denominator);
  if (s.value >= kCapDb) {
    s.value = kCapDb;
    add_flag(s.flags, flag::kCapped);
  } else if (s.value <= -kCapDb) {
    s.value = -kCapDb;
    add_flag(s.flags, flag::kFloored);
  }
  return s;
}

AlignedPair align(const AudioBuffer& ref, const AudioBuffer& est) {
  if (!ref.is_mono() || !est.is_mono()) {
    fail(Errc::NotMono, "metrics expect mono reference and estimate");
  }
  if (ref.sample_rate() != est.sample_rate()) {
    fail(Errc::RateMismatch, "reference at " + std::to_string(ref.sample_rate()) +
                                 " Hz, estimate at " +
                                 std::to_string(est.sample_rate()) + " Hz");
  }
  const std::size_t a = ref.frames();
  const std::size_t b = est.frames();
  const std::size_t diff = a > b ? a - b : b - a;
  if (static_cast<double>(diff) > kMaxLengthMismatchS * ref.sample_rate()) {
    fail(Errc::LengthMismatch, "lengths " + std::to_string(a) + " and " +
                                   std::to_string(b) + " differ by more than " +
                                   std::to_string(kMaxLengthMismatchS) + " s");
  }
  const std::size_t n = std::min(a, b);
  AlignedPair out;
  out.ref = ref.mono_samples().first(n);
  out.est = est.mono_samples().first(n);
  out.sample_rate_hz = ref.sample_rate();
  out.trimmed = diff != 0;
  if (std::all_of(out.ref.begin(), out.ref.end(), [](double v) { return v == 0.0; })) {
    fail(Errc::DegenerateSignal, "reference is all zeros");
  }
  return out;
}

}  // namespace detail
}  // namespace voicebench
