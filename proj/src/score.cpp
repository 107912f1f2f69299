#include <algorithm>
#include <functional>

#include "voicebench/error.hpp"
#include "voicebench/metrics.hpp"

namespace voicebench {

const std::vector<std::string>& metric_registry() {
  static const std::vector<std::string> names = {
      "snr", "si_snr", "si_snri", "lsd", "stoi", "mcd",
      "bss_sdr", "bss_sir", "bss_sar", "lufs"};
  return names;
}

bool is_known_metric(std::string_view name) {
  const auto& names = metric_registry();
  return std::find(names.begin(), names.end(), name) != names.end();
}

MetricReport score_pair(const AudioBuffer& ref, const AudioBuffer& est,
                        std::span<const std::string> metric_set,
                        const AudioBuffer* mixture, std::string utterance_id) {
  for (const auto& name : metric_set) {
    if (!is_known_metric(name)) fail(Errc::UnknownMetric, "unknown metric '" + name + "'");
  }

  MetricReport report;
  report.utterance_id = std::move(utterance_id);

  // BSS Eval yields all three ratios from one decomposition.
  std::optional<BssSourceScores> bss;
  std::optional<std::string> bss_error;
  auto run_bss = [&]() -> const BssSourceScores& {
    if (!bss && !bss_error) {
      try {
        std::vector<AudioBuffer> refs{ref};
        std::vector<AudioBuffer> ests{est};
        bss = bss_eval(refs, ests).front();
        if (bss->error) bss_error = *bss->error;
      } catch (const Error& e) {
        bss_error = std::string(e.name());
      }
    }
    if (bss_error) throw Error(Errc::SingularProjection, *bss_error);
    return *bss;
  };

  auto record = [&](const std::string& name, const Score& s) {
    report.scores[name] = s.value;
    if (!s.flags.empty()) report.metric_flags[name] = s.flags;
    for (const auto& f : s.flags) detail::add_flag(report.flags, f);
  };

  for (const auto& name : metric_set) {
    try {
      if (name == "snr") {
        record(name, snr(ref, est));
      } else if (name == "si_snr") {
        record(name, si_snr(ref, est));
      } else if (name == "si_snri") {
        if (mixture == nullptr) fail(Errc::MissingMixture, "si_snri needs a mixture");
        record(name, si_snr_improvement(*mixture, est, ref));
      } else if (name == "lsd") {
        record(name, lsd(ref, est));
      } else if (name == "stoi") {
        record(name, stoi(ref, est));
      } else if (name == "mcd") {
        record(name, mcd(ref, est));
      } else if (name == "lufs") {
        record(name, loudness_lufs(est));
      } else {
        const auto& b = run_bss();
        const double v = name == "bss_sdr" ? *b.sdr : name == "bss_sir" ? *b.sir : *b.sar;
        Score s;
        s.value = v;
        if (v >= kCapDb) detail::add_flag(s.flags, flag::kCapped);
        if (v <= -kCapDb) detail::add_flag(s.flags, flag::kFloored);
        for (const auto& f : b.flags) {
          if (f != flag::kCapped && f != flag::kFloored) detail::add_flag(s.flags, f);
        }
        record(name, s);
      }
    } catch (const Error& e) {
      report.errors[name] = bss_error && name.starts_with("bss_") ? *bss_error
                                                                   : std::string(e.name());
    } catch (const std::exception& e) {
      report.errors[name] = std::string("InternalError: ") + e.what();
    }
  }
  std::sort(report.flags.begin(), report.flags.end());
  return report;
}

}  // namespace voicebench
