#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "voicebench/audio.hpp"

namespace voicebench {

// ---------------------------------------------------------------------------
// Room impulse responses (image-source method)

struct RoomSpec {
  std::array<double, 3> dimensions_m{4.0, 5.0, 3.0};
  std::array<double, 3> source_pos_m{1.0, 1.0, 1.5};
  std::array<double, 3> mic_pos_m{2.0, 3.0, 1.5};
  /// Exactly one of rt60_s / reflection_coeffs should be set; coefficients
  /// win when both are. Order: x=0, x=Lx, y=0, y=Ly, z=0, z=Lz.
  std::optional<double> rt60_s;
  std::optional<std::array<double, 6>> reflection_coeffs;
  /// Highest reflection order; -1 keeps every image that arrives within
  /// the response length.
  int max_order = -1;
  int sample_rate_hz = 16000;
  double sound_speed_mps = 343.0;
  std::size_t rir_length_samples = 4096;
  /// 100 Hz high-pass applied to the finished response.
  bool high_pass = true;

  void validate() const;
};

/// Sabine inversion: alpha = 0.161 V / (S RT60), beta = sqrt(1 - alpha) on
/// all six walls. Throws UnachievableRT60 when alpha >= 1.
std::array<double, 6> rt60_to_reflection(const RoomSpec& room);

inline constexpr std::size_t kRirKernelTaps = 81;

AudioBuffer generate_rir(const RoomSpec& room);

/// RT60 from Schroeder backward integration: the -5..-25 dB slope of the
/// energy decay curve extrapolated to -60 dB. Returns nullopt when the
/// curve never falls 25 dB.
std::optional<double> estimate_rt60(std::span<const double> rir, int sample_rate_hz);

// ---------------------------------------------------------------------------
// Mixing

struct GainPolicy {
  enum class Kind { None, PeakNorm } kind = Kind::PeakNorm;
  double target = 0.9;

  static GainPolicy none() { return {Kind::None, 0.0}; }
  static GainPolicy peak_norm(double target = 0.9) { return {Kind::PeakNorm, target}; }

  /// "none" or "peak_norm(<target>)".
  static GainPolicy parse(const std::string& text);
  std::string to_string() const;
  bool operator==(const GainPolicy&) const = default;
};

struct MixResult {
  AudioBuffer mixture;
  AudioBuffer speech;
  AudioBuffer noise;
  double noise_gain = 1.0;    // applied to the raw noise segment
  double output_scale = 1.0;  // common rescale from the gain policy
  bool clipped = false;       // |x| > 1 somewhere in the outputs
};

/// Loops or trims `noise` to the speech length starting at a seeded offset,
/// scales it so 10 log10(Es / En) == snr_db, and sums. Speech and noise must
/// be mono at the same rate.
MixResult mix_at_snr(const AudioBuffer& speech, const AudioBuffer& noise,
                     double snr_db, GainPolicy policy, std::uint64_t seed);

// ---------------------------------------------------------------------------
// Mixture recipes

enum class MixtureKind { Enhancement, Separation, SrPair };

std::string to_string(MixtureKind kind);
MixtureKind parse_mixture_kind(const std::string& text);

/// One synthetic utterance. Unset optional values are drawn from `seed` at
/// realization time and filled in on the realized copy.
struct MixtureSpec {
  std::string utterance_id;
  MixtureKind kind = MixtureKind::Enhancement;
  std::vector<std::string> speech_ids;
  std::optional<std::string> noise_id;
  std::optional<std::string> rir_id;
  std::optional<double> snr_speech_db;
  std::optional<double> snr_noise_db;
  std::optional<bool> reverberant;
  std::optional<double> cutoff_hz;
  std::uint64_t seed = 0;
  GainPolicy gain_policy;
  /// Fields not known to this version, kept as (name, raw JSON) pairs.
  std::vector<std::pair<std::string, std::string>> extra_fields;

  bool operator==(const MixtureSpec&) const = default;
};

class AssetProvider {
 public:
  virtual ~AssetProvider() = default;
  /// Mono audio for an asset id; throws AssetNotFound.
  virtual AudioBuffer load(const std::string& asset_id) const = 0;
};

/// In-memory assets, mostly for tests and programmatic use.
class MemoryAssets final : public AssetProvider {
 public:
  void add(std::string id, AudioBuffer audio) {
    assets_.insert_or_assign(std::move(id), std::move(audio));
  }
  AudioBuffer load(const std::string& asset_id) const override;

 private:
  std::map<std::string, AudioBuffer> assets_;
};

enum class ReverbTarget { Reverberant, Dry, DirectPath };

struct RealizeOptions {
  /// Probability of reverberation when the spec leaves it unset.
  double reverb_probability = 0.3;
  std::pair<double, double> enhancement_snr_db{0.0, 15.0};
  std::pair<double, double> separation_snr_speech_db{0.0, 5.0};
  std::pair<double, double> separation_snr_noise_db{-5.0, 15.0};
  std::pair<double, double> cutoff_range_hz{8000.0, 16000.0};
  ReverbTarget reverb_target = ReverbTarget::Reverberant;
};

struct EnhancementPair {
  AudioBuffer noisy;
  AudioBuffer clean;
  MixtureSpec realized;
  bool clipped = false;
};

EnhancementPair make_enhancement_pair(const MixtureSpec& spec, const AssetProvider& assets,
                                      const RealizeOptions& options = {});

struct SeparationMixture {
  AudioBuffer mixture;
  AudioBuffer ref1;
  AudioBuffer ref2;
  MixtureSpec realized;
  bool clipped = false;
};

SeparationMixture make_separation_mixture(const MixtureSpec& spec,
                                          const AssetProvider& assets,
                                          const RealizeOptions& options = {});

struct SrPair {
  AudioBuffer lr_input;
  AudioBuffer hr_target;
};

inline constexpr int kSrRate = 48000;
inline constexpr double kSrTransitionHz = 500.0;

/// Low-passes 48 kHz audio at `cutoff_hz` (8-16 kHz) and keeps the rate.
SrPair make_sr_pair(const AudioBuffer& hr, double cutoff_hz);

/// Realizes an sr_pair spec: speech_ids[0] is the full-band source.
SrPair make_sr_pair(const MixtureSpec& spec, const AssetProvider& assets,
                    MixtureSpec* realized, const RealizeOptions& options = {});

enum class BandwidthBranch { Identity, Via16k, Via8k };

std::string to_string(BandwidthBranch branch);

struct BandwidthResult {
  AudioBuffer audio;
  BandwidthBranch branch = BandwidthBranch::Identity;
};

BandwidthBranch draw_bandwidth_branch(std::uint64_t seed, double p16 = 0.10,
                                      double p8 = 0.05);

/// With probability p16 round-trips 48k->16k->48k, with p8 48k->8k->48k,
/// otherwise returns the input. Length is preserved.
BandwidthResult bandwidth_augment(const AudioBuffer& audio, std::uint64_t seed,
                                  double p16 = 0.10, double p8 = 0.05);

}  // namespace voicebench
