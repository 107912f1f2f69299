#include <algorithm>
#include <numeric>

#include "voicebench/error.hpp"
#include "voicebench/metrics.hpp"

namespace voicebench {

PitMetric parse_pit_metric(std::string_view name) {
  if (name == "si_snr") return PitMetric::SiSnr;
  if (name == "snr") return PitMetric::Snr;
  fail(Errc::UnknownMetric, "PIT metric must be si_snr or snr, got '" +
                                std::string(name) + "'");
}

PitResult pit_score(std::span<const AudioBuffer> refs,
                    std::span<const AudioBuffer> ests, PitMetric metric) {
  const std::size_t n = refs.size();
  if (n == 0 || ests.size() != n) {
    fail(Errc::InvalidArgument, "pit_score needs equal, non-zero source counts (" +
                                    std::to_string(n) + " refs, " +
                                    std::to_string(ests.size()) + " ests)");
  }
  if (n > kMaxPitSources) {
    fail(Errc::TooManySources, std::to_string(n) + " sources; exhaustive search supports at most " +
                                   std::to_string(kMaxPitSources));
  }

  std::vector<double> pair(n * n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      pair[i * n + j] = metric == PitMetric::SiSnr ? si_snr(refs[i], ests[j]).value
                                                   : snr(refs[i], ests[j]).value;
    }
  }

  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  PitResult best;
  bool first = true;
  do {
    double sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) sum += pair[i * n + perm[i]];
    const double mean = sum / static_cast<double>(n);
    if (first || mean > best.mean_score) {
      best.permutation = perm;
      best.mean_score = mean;
      first = false;
    }
  } while (std::next_permutation(perm.begin(), perm.end()));

  best.per_pair_scores.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    best.per_pair_scores[i] = pair[i * n + best.permutation[i]];
  }
  return best;
}

}  // namespace voicebench
