#pragma once

#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "voicebench/audio.hpp"
#include "voicebench/dsp.hpp"

namespace voicebench {

/// Ratios above this are reported as exactly this value with flag "capped";
/// ratios below its negative are reported with flag "floored".
inline constexpr double kCapDb = 100.0;

/// Reference and estimate lengths may differ by up to this many seconds;
/// the longer signal is trimmed and the result flagged "length_trimmed".
inline constexpr double kMaxLengthMismatchS = 0.5;

namespace flag {
inline constexpr std::string_view kCapped = "capped";
inline constexpr std::string_view kFloored = "floored";
inline constexpr std::string_view kLengthTrimmed = "length_trimmed";
inline constexpr std::string_view kSilentFramesSkipped = "silent_frames_skipped";
inline constexpr std::string_view kClipped = "clipped";
}  // namespace flag

struct Score {
  double value = 0.0;
  std::vector<std::string> flags;

  bool has_flag(std::string_view name) const;
};

/// 10 log10(sum ref^2 / sum (est - ref)^2).
Score snr(const AudioBuffer& ref, const AudioBuffer& est);

/// Scale-invariant SNR on mean-removed signals.
Score si_snr(const AudioBuffer& ref, const AudioBuffer& est);

/// si_snr(ref, est) - si_snr(ref, mixture), all three trimmed to a common
/// length.
Score si_snr_improvement(const AudioBuffer& mixture, const AudioBuffer& est,
                         const AudioBuffer& ref);

inline constexpr double kLsdEpsilon = 1e-12;

/// Log-spectral distance in dB. Without a config, default_metric_stft() of
/// the sample rate is used.
Score lsd(const AudioBuffer& ref, const AudioBuffer& est,
          std::optional<StftConfig> config = std::nullopt);

/// Classic short-time objective intelligibility, in [0, 1].
Score stoi(const AudioBuffer& ref, const AudioBuffer& est);

/// Frame-aligned mel-cepstral distortion in dB (c0 excluded, no DTW).
Score mcd(const AudioBuffer& ref, const AudioBuffer& est, std::size_t n_mels = 80,
          std::size_t order = 13);

struct BssSourceScores {
  std::optional<double> sdr;
  std::optional<double> sir;
  std::optional<double> sar;
  std::vector<std::string> flags;
  std::optional<std::string> error;
};

/// BSS Eval v3 source decomposition with time-invariant distortion filters
/// of `filter_len` taps. Estimate j is scored against reference j.
std::vector<BssSourceScores> bss_eval(std::span<const AudioBuffer> refs,
                                      std::span<const AudioBuffer> ests,
                                      std::size_t filter_len = 512);

/// Gated integrated loudness (LUFS) with K-weighting.
Score loudness_lufs(const AudioBuffer& audio);

enum class PitMetric { SiSnr, Snr };

PitMetric parse_pit_metric(std::string_view name);

struct PitResult {
  /// permutation[i] is the estimate index assigned to reference i.
  std::vector<std::size_t> permutation;
  std::vector<double> per_pair_scores;
  double mean_score = 0.0;
};

inline constexpr std::size_t kMaxPitSources = 6;

/// Exhaustive search over all assignments; ties go to the lexicographically
/// smallest permutation.
PitResult pit_score(std::span<const AudioBuffer> refs,
                    std::span<const AudioBuffer> ests, PitMetric metric);

struct MetricReport {
  std::string utterance_id;
  std::map<std::string, double> scores;
  std::vector<std::string> flags;  // union of metric flags, sorted
  std::map<std::string, std::vector<std::string>> metric_flags;
  std::map<std::string, std::string> errors;  // metric -> error name

  bool capped(const std::string& metric) const;
};

/// Registry names accepted by score_pair.
const std::vector<std::string>& metric_registry();
bool is_known_metric(std::string_view name);

/// Runs every requested metric. A failing metric records its error name in
/// `errors` and does not stop the others. `si_snri` needs `mixture`.
MetricReport score_pair(const AudioBuffer& ref, const AudioBuffer& est,
                        std::span<const std::string> metric_set,
                        const AudioBuffer* mixture = nullptr,
                        std::string utterance_id = {});

namespace detail {

struct AlignedPair {
  std::span<const double> ref;
  std::span<const double> est;
  int sample_rate_hz = 0;
  bool trimmed = false;
};

/// Shared precondition check: mono, equal rates, length mismatch within
/// tolerance, non-silent reference.
AlignedPair align(const AudioBuffer& ref, const AudioBuffer& est);

/// Caps/floors a power ratio; `value` is finite on return.
Score ratio_db(double numerator, double denominator);

void add_flag(std::vector<std::string>& flags, std::string_view name);

}  // namespace detail

}  // namespace voicebench
