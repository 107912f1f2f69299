#include <algorithm>
#include <cmath>
#include <charconv>

#include "voicebench/dsp.hpp"
#include "voicebench/error.hpp"
#include "voicebench/rng.hpp"
#include "voicebench/simulate.hpp"

namespace voicebench {

GainPolicy GainPolicy::parse(const std::string& text) {
  if (text == "none") return none();
  if (text == "peak_norm") return peak_norm();
  constexpr std::string_view prefix = "peak_norm(";
  if (text.starts_with(prefix) && text.ends_with(")")) {
    const std::string inner = text.substr(prefix.size(), text.size() - prefix.size() - 1);
    try {
      std::size_t used = 0;
      const double target = std::stod(inner, &used);
      if (used == inner.size() && target > 0.0) return peak_norm(target);
    } catch (const std::exception&) {
    }
  }
  fail(Errc::InvalidArgument, "gain policy must be 'none' or 'peak_norm(<target>)', got '" +
                                  text + "'");
}

std::string GainPolicy::to_string() const {
  if (kind == Kind::None) return "none";
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, target);
  return "peak_norm(" + std::string(buf, res.ptr) + ")";
}

std::string to_string(MixtureKind kind) {
  switch (kind) {
    case MixtureKind::Enhancement: return "enhancement";
    case MixtureKind::Separation: return "separation";
    case MixtureKind::SrPair: return "sr_pair";
  }
  return "enhancement";
}

MixtureKind parse_mixture_kind(const std::string& text) {
  if (text == "enhancement") return MixtureKind::Enhancement;
  if (text == "separation") return MixtureKind::Separation;
  if (text == "sr_pair") return MixtureKind::SrPair;
  fail(Errc::InvalidArgument, "unknown mixture kind '" + text + "'");
}

std::string to_string(BandwidthBranch branch) {
  switch (branch) {
    case BandwidthBranch::Identity: return "identity";
    case BandwidthBranch::Via16k: return "16k";
    case BandwidthBranch::Via8k: return "8k";
  }
  return "identity";
}

AudioBuffer MemoryAssets::load(const std::string& asset_id) const {
  auto it = assets_.find(asset_id);
  if (it == assets_.end()) fail(Errc::AssetNotFound, "no asset '" + asset_id + "'");
  return it->second;
}

namespace {

std::vector<double> scaled(std::span<const double> x, double g) {
  std::vector<double> out(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = x[i] * g;
  return out;
}

double peak(std::span<const double> x) {
  double p = 0.0;
  for (double v : x) p = std::max(p, std::abs(v));
  return p;
}

/// Noise segment of `length` samples: a random window of longer noise, or
/// the noise looped from a random start.
std::vector<double> fit_noise(std::span<const double> noise, std::size_t length,
                              std::uint64_t seed) {
  if (noise.empty()) fail(Errc::SilentNoise, "noise is empty");
  CounterRng rng(seed, rng_stream::kNoiseOffset);
  std::vector<double> out(length);
  if (noise.size() >= length) {
    const std::size_t offset = rng.index(noise.size() - length + 1);
    std::copy_n(noise.begin() + static_cast<std::ptrdiff_t>(offset), length, out.begin());
  } else {
    const std::size_t offset = rng.index(noise.size());
    for (std::size_t i = 0; i < length; ++i) out[i] = noise[(offset + i) % noise.size()];
  }
  return out;
}

double gain_for_snr(double reference_energy, double noise_energy, double snr_db) {
  return std::sqrt(reference_energy / (noise_energy * std::pow(10.0, snr_db / 10.0)));
}

/// Common rescale so the mixture peak does not exceed the policy target.
double policy_scale(const GainPolicy& policy, std::span<const double> mixture) {
  if (policy.kind != GainPolicy::Kind::PeakNorm) return 1.0;
  const double p = peak(mixture);
  return p > policy.target ? policy.target / p : 1.0;
}

void require_mono(const AudioBuffer& a, const char* what) {
  if (!a.is_mono()) fail(Errc::NotMono, std::string(what) + " must be mono");
}

AudioBuffer match_rate(AudioBuffer audio, int rate) {
  if (audio.sample_rate() == rate) return audio;
  return resample(audio, rate);
}

}  // namespace

MixResult mix_at_snr(const AudioBuffer& speech, const AudioBuffer& noise, double snr_db,
                     GainPolicy policy, std::uint64_t seed) {
  require_mono(speech, "speech");
  require_mono(noise, "noise");
  if (speech.sample_rate() != noise.sample_rate()) {
    fail(Errc::RateMismatch, "speech and noise sample rates differ");
  }
  if (!std::isfinite(snr_db)) fail(Errc::InvalidArgument, "SNR must be finite");
  const auto s = speech.mono_samples();
  const double es = energy(s);
  if (!(es > 0.0)) fail(Errc::SilentSpeech, "speech has zero energy");
  const auto segment = fit_noise(noise.mono_samples(), s.size(), seed);
  const double en = energy(segment);
  if (!(en > 0.0)) fail(Errc::SilentNoise, "selected noise segment has zero energy");

  const double g = gain_for_snr(es, en, snr_db);
  std::vector<double> n = scaled(segment, g);
  std::vector<double> mix(s.size());
  for (std::size_t i = 0; i < mix.size(); ++i) mix[i] = s[i] + n[i];

  const double scale = policy_scale(policy, mix);
  const int fs = speech.sample_rate();
  MixResult out{AudioBuffer::mono(scaled(mix, scale), fs),
                AudioBuffer::mono(scaled(s, scale), fs),
                AudioBuffer::mono(scaled(n, scale), fs), g, scale, false};
  out.clipped = peak(out.mixture.planar()) > 1.0 || peak(out.speech.planar()) > 1.0 ||
                peak(out.noise.planar()) > 1.0;
  return out;
}

EnhancementPair make_enhancement_pair(const MixtureSpec& spec, const AssetProvider& assets,
                                      const RealizeOptions& options) {
  if (spec.kind != MixtureKind::Enhancement) {
    fail(Errc::InvalidArgument, "spec " + spec.utterance_id + " is not an enhancement spec");
  }
  if (spec.speech_ids.empty()) fail(Errc::AssetNotFound, "spec has no speech id");

  MixtureSpec realized = spec;
  const AudioBuffer dry = to_mono(assets.load(spec.speech_ids[0]));
  const int fs = dry.sample_rate();

  if (!realized.reverberant) {
    realized.reverberant =
        CounterRng(spec.seed, rng_stream::kReverb).bernoulli(options.reverb_probability);
  }
  if (!realized.snr_noise_db && realized.noise_id) {
    const auto [lo, hi] = options.enhancement_snr_db;
    realized.snr_noise_db = CounterRng(spec.seed, rng_stream::kSnrNoise).uniform(lo, hi);
  }

  AudioBuffer speech = dry;
  std::vector<double> rir;
  if (*realized.reverberant) {
    if (!spec.rir_id) fail(Errc::AssetNotFound, "reverberant spec " + spec.utterance_id + " has no rir_id");
    const AudioBuffer kernel = match_rate(to_mono(assets.load(*spec.rir_id)), fs);
    rir.assign(kernel.planar().begin(), kernel.planar().end());
    auto wet = fft_convolve(dry.mono_samples(), rir);
    wet.resize(dry.frames());
    speech = AudioBuffer::mono(std::move(wet), fs);
  }

  EnhancementPair out{speech, speech, realized, false};
  double scale = 1.0;
  if (realized.noise_id) {
    const AudioBuffer noise = match_rate(to_mono(assets.load(*realized.noise_id)), fs);
    MixResult mixed = mix_at_snr(speech, noise, *realized.snr_noise_db, spec.gain_policy, spec.seed);
    scale = mixed.output_scale;
    out.noisy = std::move(mixed.mixture);
    out.clean = std::move(mixed.speech);
    out.clipped = mixed.clipped;
  } else {
    if (!(energy(speech.mono_samples()) > 0.0)) fail(Errc::SilentSpeech, "speech has zero energy");
    scale = policy_scale(spec.gain_policy, speech.mono_samples());
    out.noisy = AudioBuffer::mono(scaled(speech.mono_samples(), scale), fs);
    out.clean = out.noisy;
    out.clipped = peak(out.noisy.planar()) > 1.0;
  }

  if (*realized.reverberant && options.reverb_target != ReverbTarget::Reverberant) {
    auto d = dry.mono_samples();
    std::vector<double> target(d.size(), 0.0);
    if (options.reverb_target == ReverbTarget::Dry) {
      target = scaled(d, scale);
    } else {
      std::size_t lag = 0;
      for (std::size_t i = 1; i < rir.size(); ++i) {
        if (std::abs(rir[i]) > std::abs(rir[lag])) lag = i;
      }
      const double g = rir[lag] * scale;
      for (std::size_t i = lag; i < d.size(); ++i) target[i] = d[i - lag] * g;
    }
    out.clean = AudioBuffer::mono(std::move(target), fs);
  }
  return out;
}

SeparationMixture make_separation_mixture(const MixtureSpec& spec, const AssetProvider& assets,
                                          const RealizeOptions& options) {
  if (spec.kind != MixtureKind::Separation) {
    fail(Errc::InvalidArgument, "spec " + spec.utterance_id + " is not a separation spec");
  }
  if (spec.speech_ids.size() != 2) {
    fail(Errc::InvalidArgument, "separation needs exactly two speech ids");
  }
  if (spec.speech_ids[0] == spec.speech_ids[1]) {
    fail(Errc::SameSpeaker, "both speech ids are '" + spec.speech_ids[0] + "'");
  }

  MixtureSpec realized = spec;
  const AudioBuffer a = to_mono(assets.load(spec.speech_ids[0]));
  const int fs = a.sample_rate();
  const AudioBuffer b = match_rate(to_mono(assets.load(spec.speech_ids[1])), fs);

  if (!realized.snr_speech_db) {
    const auto [lo, hi] = options.separation_snr_speech_db;
    realized.snr_speech_db = CounterRng(spec.seed, rng_stream::kSnrSpeech).uniform(lo, hi);
  }
  const double e1 = energy(a.mono_samples());
  const double e2 = energy(b.mono_samples());
  if (!(e1 > 0.0) || !(e2 > 0.0)) fail(Errc::SilentSpeech, "a speaker utterance has zero energy");
  const double g2 = gain_for_snr(e1, e2, *realized.snr_speech_db);

  // Zero-pad the shorter utterance at a seeded offset.
  const std::size_t length = std::max(a.frames(), b.frames());
  const std::size_t shorter = std::min(a.frames(), b.frames());
  const std::size_t offset =
      CounterRng(spec.seed, rng_stream::kPadOffset).index(length - shorter + 1);
  std::vector<double> s1(length, 0.0), s2(length, 0.0);
  const std::size_t off1 = a.frames() < length ? offset : 0;
  const std::size_t off2 = b.frames() < length ? offset : 0;
  for (std::size_t i = 0; i < a.frames(); ++i) s1[off1 + i] = a.mono_samples()[i];
  for (std::size_t i = 0; i < b.frames(); ++i) s2[off2 + i] = b.mono_samples()[i] * g2;

  std::vector<double> noise(length, 0.0);
  if (realized.noise_id) {
    if (!realized.snr_noise_db) {
      const auto [lo, hi] = options.separation_snr_noise_db;
      realized.snr_noise_db = CounterRng(spec.seed, rng_stream::kSnrNoise).uniform(lo, hi);
    }
    const AudioBuffer n = match_rate(to_mono(assets.load(*realized.noise_id)), fs);
    const auto segment = fit_noise(n.mono_samples(), length, spec.seed);
    const double en = energy(segment);
    if (!(en > 0.0)) fail(Errc::SilentNoise, "selected noise segment has zero energy");
    const double loudest = std::max(energy(s1), energy(s2));
    noise = scaled(segment, gain_for_snr(loudest, en, *realized.snr_noise_db));
  }

  std::vector<double> mix(length);
  for (std::size_t i = 0; i < length; ++i) mix[i] = s1[i] + s2[i] + noise[i];
  const double scale = policy_scale(spec.gain_policy, mix);

  SeparationMixture out{AudioBuffer::mono(scaled(mix, scale), fs),
                        AudioBuffer::mono(scaled(s1, scale), fs),
                        AudioBuffer::mono(scaled(s2, scale), fs), realized, false};
  out.clipped = peak(out.mixture.planar()) > 1.0 || peak(out.ref1.planar()) > 1.0 ||
                peak(out.ref2.planar()) > 1.0;
  return out;
}

SrPair make_sr_pair(const AudioBuffer& hr, double cutoff_hz) {
  if (hr.sample_rate() != kSrRate) {
    fail(Errc::WrongRate, "super-resolution pairs need 48000 Hz input, got " +
                              std::to_string(hr.sample_rate()));
  }
  if (!(cutoff_hz >= 8000.0 && cutoff_hz <= 16000.0)) {
    fail(Errc::InvalidCutoff, "cutoff must be within [8000, 16000] Hz");
  }
  return SrPair{lowpass(hr, cutoff_hz, kSrTransitionHz), hr};
}

SrPair make_sr_pair(const MixtureSpec& spec, const AssetProvider& assets,
                    MixtureSpec* realized, const RealizeOptions& options) {
  if (spec.kind != MixtureKind::SrPair) {
    fail(Errc::InvalidArgument, "spec " + spec.utterance_id + " is not an sr_pair spec");
  }
  if (spec.speech_ids.empty()) fail(Errc::AssetNotFound, "spec has no speech id");
  MixtureSpec out = spec;
  if (!out.cutoff_hz) {
    const auto [lo, hi] = options.cutoff_range_hz;
    out.cutoff_hz = CounterRng(spec.seed, rng_stream::kCutoff).uniform(lo, hi);
  }
  const AudioBuffer hr = to_mono(assets.load(spec.speech_ids[0]));
  SrPair pair = make_sr_pair(hr, *out.cutoff_hz);
  if (realized) *realized = std::move(out);
  return pair;
}

BandwidthBranch draw_bandwidth_branch(std::uint64_t seed, double p16, double p8) {
  if (!(p16 >= 0.0) || !(p8 >= 0.0) || p16 + p8 > 1.0) {
    fail(Errc::InvalidArgument, "branch probabilities must be non-negative and sum to <= 1");
  }
  const double u = CounterRng(seed, rng_stream::kBandwidth).uniform();
  if (u < p16) return BandwidthBranch::Via16k;
  if (u < p16 + p8) return BandwidthBranch::Via8k;
  return BandwidthBranch::Identity;
}

BandwidthResult bandwidth_augment(const AudioBuffer& audio, std::uint64_t seed, double p16,
                                  double p8) {
  if (audio.sample_rate() != kSrRate) {
    fail(Errc::WrongRate, "bandwidth augmentation needs 48000 Hz input, got " +
                              std::to_string(audio.sample_rate()));
  }
  const BandwidthBranch branch = draw_bandwidth_branch(seed, p16, p8);
  if (branch == BandwidthBranch::Identity) return {audio, branch};

  const int low = branch == BandwidthBranch::Via16k ? 16000 : 8000;
  std::vector<double> planar;
  for (int c = 0; c < audio.channels(); ++c) {
    auto y = resample(resample(audio.channel(c), kSrRate, low), low, kSrRate);
    y.resize(audio.frames(), 0.0);
    planar.insert(planar.end(), y.begin(), y.end());
  }
  return {AudioBuffer(std::move(planar), kSrRate, audio.channels()), branch};
}

}  // namespace voicebench
