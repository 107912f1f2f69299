#include <numbers>

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "support.hpp"
#include "voicebench/dsp.hpp"
#include "voicebench/error.hpp"
#include "voicebench/metrics.hpp"
#include "voicebench/rng.hpp"
#include "voicebench/simulate.hpp"

using namespace voicebench;
using vbtest::mono;
using vbtest::white_noise;

namespace {

double energy_of(std::span<const double> x) {
  double s = 0.0;
  for (double v : x) s += v * v;
  return s;
}

double measured_snr(const AudioBuffer& s, const AudioBuffer& n) {
  return 10.0 * std::log10(energy_of(s.mono_samples()) / energy_of(n.mono_samples()));
}

Errc code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error thrown";
  return Errc::IoError;
}

}  // namespace

TEST(Rng, KnownValues) {
  // Reference outputs of the SplitMix64 finalizer.
  EXPECT_EQ(mix64(0), 0u);
  EXPECT_EQ(mix64(kGoldenGamma), 0xE220A8397B1DCDAFULL);
  CounterRng a(42, 1), b(42, 1), c(42, 2);
  const auto x = a.next();
  EXPECT_EQ(x, b.next());
  EXPECT_NE(x, c.next());
  EXPECT_NE(derive_seed(1, 0), derive_seed(1, 1));
  for (int i = 0; i < 1000; ++i) {
    const double u = a.uniform();
    EXPECT_GE(u, 0.0);
    EXPECT_LT(u, 1.0);
    EXPECT_LT(a.index(7), 7u);
  }
}

TEST(Rir, SabineInversion) {
  RoomSpec room;
  room.rt60_s = 0.3;
  const auto beta = rt60_to_reflection(room);
  const double alpha = 0.161 * 60.0 / (94.0 * 0.3);
  EXPECT_NEAR(alpha, 0.34255, 1e-5);
  for (double b : beta) EXPECT_NEAR(b, 0.81084, 1e-4);

  RoomSpec tiny;
  tiny.dimensions_m = {1, 1, 1};
  tiny.source_pos_m = {0.2, 0.2, 0.2};
  tiny.mic_pos_m = {0.7, 0.7, 0.7};
  tiny.rt60_s = 2.0;
  EXPECT_NEAR(rt60_to_reflection(tiny)[0], 0.99327, 1e-5);

  room.rt60_s = 1e9;
  EXPECT_NEAR(rt60_to_reflection(room)[3], 1.0, 1e-9);
  room.rt60_s = 0.05;
  EXPECT_EQ(code_of([&] { rt60_to_reflection(room); }), Errc::UnachievableRT60);
}

TEST(Rir, Validation) {
  RoomSpec room;
  room.rt60_s = 0.3;
  room.source_pos_m = {5, 1, 1};
  EXPECT_EQ(code_of([&] { generate_rir(room); }), Errc::InvalidRoom);
  room.source_pos_m = room.mic_pos_m;
  EXPECT_EQ(code_of([&] { generate_rir(room); }), Errc::InvalidRoom);
}

namespace {

RoomSpec anechoic_at(double distance) {
  RoomSpec room;
  room.dimensions_m = {10, 10, 10};
  room.source_pos_m = {2, 5, 5};
  room.mic_pos_m = {2 + distance, 5, 5};
  room.reflection_coeffs = std::array<double, 6>{};
  room.max_order = 0;
  room.high_pass = false;
  return room;
}

}  // namespace

TEST(Rir, AnechoicDirectPath) {
  const double d = 1.715;
  const auto rir = vbtest::samples(generate_rir(anechoic_at(d)));
  const auto peak = std::max_element(rir.begin(), rir.end(), [](double a, double b) {
    return std::abs(a) < std::abs(b);
  });
  EXPECT_EQ(peak - rir.begin(), std::lround(16000 * d / 343.0));
  EXPECT_EQ(peak - rir.begin(), 80);
  const double expect = 1.0 / (4.0 * std::numbers::pi * d);
  EXPECT_NEAR(expect, 0.04640, 1e-5);
  EXPECT_NEAR(*peak, expect, 0.02 * expect);

  const auto far = vbtest::samples(generate_rir(anechoic_at(2 * d)));
  const double far_peak = *std::max_element(far.begin(), far.end());
  EXPECT_NEAR(far_peak / *peak, 0.5, 0.02 * 0.5);
}

TEST(Rir, MoreOrdersMoreEnergyAndDecay) {
  RoomSpec room;
  room.reflection_coeffs = std::array<double, 6>{0.9, 0.9, 0.9, 0.9, 0.9, 0.9};
  room.rir_length_samples = 8000;
  room.max_order = 0;
  const auto e0 = energy_of(vbtest::samples(generate_rir(room)));
  room.max_order = 10;
  const auto full = generate_rir(room);
  EXPECT_GT(energy_of(full.mono_samples()), e0);

  // Energy in consecutive 50 ms windows after the direct path decreases.
  const auto x = full.mono_samples();
  const std::size_t win = 800;
  double prev = std::numeric_limits<double>::infinity();
  for (std::size_t start = 800; start + win <= 4800; start += win) {
    const double e = energy_of(x.subspan(start, win));
    EXPECT_LT(e, prev) << start;
    prev = e;
  }
}

TEST(Rir, EnergyMonotoneInAbsorption) {
  double prev = std::numeric_limits<double>::infinity();
  for (double beta : {0.95, 0.9, 0.8, 0.6, 0.3}) {
    RoomSpec room;
    room.reflection_coeffs = std::array<double, 6>{beta, beta, beta, beta, beta, beta};
    room.max_order = 6;
    room.high_pass = false;
    const double e = energy_of(vbtest::samples(generate_rir(room)));
    EXPECT_LT(e, prev);
    prev = e;
  }
}

TEST(Rir, Rt60WithinTolerance) {
  struct Case {
    std::array<double, 3> dims, src, mic;
    double rt60;
  };
  const std::vector<Case> cases = {
      {{4, 5, 3}, {1, 1, 1.5}, {2, 3, 1.5}, 0.3},
      {{6, 4, 3}, {1.5, 1, 1.2}, {4, 3, 1.6}, 0.4},
      {{8, 6, 3.5}, {2, 2, 1.5}, {5.5, 4, 1.7}, 0.5},
      {{5, 5, 2.8}, {1, 4, 1.2}, {3.8, 1.5, 1.4}, 0.35},
      {{10, 8, 4}, {3, 2, 1.5}, {7, 6, 2}, 0.6},
  };
  for (const auto& c : cases) {
    RoomSpec room;
    room.dimensions_m = c.dims;
    room.source_pos_m = c.src;
    room.mic_pos_m = c.mic;
    room.rt60_s = c.rt60;
    room.rir_length_samples = static_cast<std::size_t>(1.2 * c.rt60 * 16000);
    const auto est = estimate_rt60(vbtest::samples(generate_rir(room)), 16000);
    ASSERT_TRUE(est.has_value());
    EXPECT_NEAR(*est, c.rt60, 0.2 * c.rt60) << c.dims[0] << "x" << c.dims[1];
  }
}

TEST(Rir, Deterministic) {
  RoomSpec room;
  room.rt60_s = 0.4;
  EXPECT_EQ(generate_rir(room), generate_rir(room));
}

TEST(Rt60Estimate, ExponentialDecayOracle) {
  // Exponentially decaying noise with a known 60 dB time.
  const int fs = 16000;
  const double t60 = 0.5;
  auto x = white_noise(fs, 3);
  for (std::size_t i = 0; i < x.size(); ++i) {
    x[i] *= std::pow(10.0, -3.0 * static_cast<double>(i) / (t60 * fs));
  }
  EXPECT_NEAR(*estimate_rt60(x, fs), t60, 0.03);
  EXPECT_FALSE(estimate_rt60(std::vector<double>(100, 1.0), fs).has_value());
}

// ---------------------------------------------------------------------------
// Mixing

TEST(MixAtSnr, ExactSnr) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto s = mono(white_noise(8000, seed, 0.1), 16000);
    const auto n = mono(white_noise(3000 + seed * 500, seed + 99, 0.3), 16000);
    const double want = -5.0 + static_cast<double>(seed);
    const auto r = mix_at_snr(s, n, want, GainPolicy::none(), seed);
    EXPECT_NEAR(measured_snr(r.speech, r.noise), want, 1e-6);
    EXPECT_EQ(r.mixture.frames(), s.frames());
    for (std::size_t i = 0; i < s.frames(); ++i) {
      EXPECT_NEAR(r.mixture.mono_samples()[i], r.speech.mono_samples()[i] + r.noise.mono_samples()[i], 1e-15);
    }
  }
}

TEST(MixAtSnr, UnitGainAtEqualEnergy) {
  const auto s = white_noise(4000, 1);
  auto n = white_noise(4000, 2);
  const double k = std::sqrt(vbtest::sum_sq(s) / vbtest::sum_sq(n));
  for (auto& v : n) v *= k;
  const auto r = mix_at_snr(mono(s, 16000), mono(n, 16000), 0.0, GainPolicy::none(), 5);
  EXPECT_NEAR(r.noise_gain, 1.0, 1e-9);
}

TEST(MixAtSnr, PeakNormKeepsSnr) {
  const auto s = mono(white_noise(4000, 1, 0.8), 16000);
  const auto n = mono(white_noise(4000, 2, 0.8), 16000);
  const auto r = mix_at_snr(s, n, 3.0, GainPolicy::peak_norm(0.9), 9);
  const auto m = r.mixture.mono_samples();
  double peak = 0.0;
  for (double v : m) peak = std::max(peak, std::abs(v));
  EXPECT_NEAR(peak, 0.9, 1e-12);
  EXPECT_NEAR(measured_snr(r.speech, r.noise), 3.0, 1e-6);
  EXPECT_FALSE(r.clipped);

  const auto loud = mix_at_snr(s, n, 3.0, GainPolicy::none(), 9);
  EXPECT_TRUE(loud.clipped);
  EXPECT_EQ(loud.output_scale, 1.0);
}

TEST(MixAtSnr, Errors) {
  const auto s = mono(white_noise(100, 1), 16000);
  const auto z = mono(std::vector<double>(100, 0.0), 16000);
  EXPECT_EQ(code_of([&] { mix_at_snr(z, s, 0, {}, 0); }), Errc::SilentSpeech);
  EXPECT_EQ(code_of([&] { mix_at_snr(s, z, 0, {}, 0); }), Errc::SilentNoise);
}

TEST(GainPolicy, TextForm) {
  EXPECT_EQ(GainPolicy::none().to_string(), "none");
  EXPECT_EQ(GainPolicy::peak_norm().to_string(), "peak_norm(0.9)");
  EXPECT_EQ(GainPolicy::parse("peak_norm(0.75)"), GainPolicy::peak_norm(0.75));
  EXPECT_EQ(GainPolicy::parse("none"), GainPolicy::none());
  EXPECT_THROW(GainPolicy::parse("peak_norm(x)"), Error);
}

namespace {

// 48 samples at 16 kHz, so the direct path is an integer delay.
constexpr double kDelayDistance = 343.0 * 48 / 16000;

MemoryAssets test_assets() {
  MemoryAssets a;
  a.add("spk1/a.wav", mono(white_noise(16000, 1, 0.1), 16000));
  a.add("spk2/b.wav", mono(white_noise(12000, 2, 0.05), 16000));
  a.add("noise/n.wav", mono(white_noise(5000, 3, 0.2), 16000));
  RoomSpec room;
  room.rt60_s = 0.3;
  room.rir_length_samples = 4000;
  a.add("rir/r.wav", generate_rir(room));
  a.add("rir/delay.wav", generate_rir(anechoic_at(kDelayDistance)));
  return a;
}

}  // namespace

TEST(Enhancement, ExactSnrAndDeterminism) {
  const auto assets = test_assets();
  MixtureSpec spec;
  spec.utterance_id = "u1";
  spec.speech_ids = {"spk1/a.wav"};
  spec.noise_id = "noise/n.wav";
  spec.snr_noise_db = 5.0;
  spec.reverberant = false;
  spec.gain_policy = GainPolicy::none();
  spec.seed = 77;
  const auto p = make_enhancement_pair(spec, assets);
  std::vector<double> n(p.noisy.frames());
  for (std::size_t i = 0; i < n.size(); ++i) n[i] = p.noisy.mono_samples()[i] - p.clean.mono_samples()[i];
  EXPECT_NEAR(measured_snr(p.clean, mono(n, 16000)), 5.0, 1e-6);
  const auto q = make_enhancement_pair(spec, assets);
  EXPECT_EQ(p.noisy, q.noisy);
  EXPECT_EQ(p.clean, q.clean);
  EXPECT_EQ(p.realized, q.realized);
}

TEST(Enhancement, FillsUnsetValuesFromSeed) {
  const auto assets = test_assets();
  MixtureSpec spec;
  spec.utterance_id = "u2";
  spec.speech_ids = {"spk1/a.wav"};
  spec.noise_id = "noise/n.wav";
  spec.rir_id = "rir/r.wav";
  spec.seed = 5;
  const auto p = make_enhancement_pair(spec, assets);
  ASSERT_TRUE(p.realized.snr_noise_db.has_value());
  ASSERT_TRUE(p.realized.reverberant.has_value());
  EXPECT_GE(*p.realized.snr_noise_db, 0.0);
  EXPECT_LE(*p.realized.snr_noise_db, 15.0);
  EXPECT_EQ(*p.realized.snr_noise_db,
            CounterRng(5, rng_stream::kSnrNoise).uniform(0.0, 15.0));
}

TEST(Enhancement, AnechoicReverbIsDelayAndGain) {
  const auto assets = test_assets();
  MixtureSpec dry;
  dry.speech_ids = {"spk1/a.wav"};
  dry.noise_id = "noise/n.wav";
  dry.snr_noise_db = 10.0;
  dry.reverberant = false;
  dry.gain_policy = GainPolicy::none();
  dry.seed = 3;
  MixtureSpec wet = dry;
  wet.reverberant = true;
  wet.rir_id = "rir/delay.wav";
  const auto a = make_enhancement_pair(dry, assets);
  const auto b = make_enhancement_pair(wet, assets);
  // Reverberant clean target is the delayed, attenuated dry speech.
  const auto kernel = vbtest::samples(assets.load("rir/delay.wav"));
  const auto peak_at = static_cast<std::size_t>(
      std::max_element(kernel.begin(), kernel.end()) - kernel.begin());
  const double g = 1.0 / (4.0 * std::numbers::pi * kDelayDistance);
  EXPECT_EQ(peak_at, 48u);
  const auto src = vbtest::samples(assets.load("spk1/a.wav"));
  double err = 0.0, ref = 0.0;
  for (std::size_t i = 200; i + peak_at < b.clean.frames() - 200; ++i) {
    err += std::pow(b.clean.mono_samples()[i + peak_at] - g * src[i], 2);
    ref += std::pow(g * src[i], 2);
  }
  EXPECT_LT(err / ref, 2e-2);
  EXPECT_EQ(a.clean.frames(), b.clean.frames());
}

TEST(Enhancement, MissingAsset) {
  const auto assets = test_assets();
  MixtureSpec spec;
  spec.speech_ids = {"nope.wav"};
  spec.noise_id = "noise/n.wav";
  EXPECT_EQ(code_of([&] { make_enhancement_pair(spec, assets); }), Errc::AssetNotFound);
}

TEST(Separation, InterSpeakerSnrExact) {
  const auto assets = test_assets();
  for (double s : {0.0, 2.5, 5.0}) {
    MixtureSpec spec;
    spec.kind = MixtureKind::Separation;
    spec.speech_ids = {"spk1/a.wav", "spk2/b.wav"};
    spec.snr_speech_db = s;
    spec.noise_id = "noise/n.wav";
    spec.snr_noise_db = 7.0;
    spec.gain_policy = GainPolicy::none();
    spec.seed = 11;
    const auto m = make_separation_mixture(spec, assets);
    EXPECT_EQ(m.ref1.frames(), m.ref2.frames());
    EXPECT_EQ(m.mixture.frames(), m.ref1.frames());
    EXPECT_NEAR(measured_snr(m.ref1, m.ref2), s, 1e-6);
    // Noise relative to the louder speaker.
    std::vector<double> noise(m.mixture.frames());
    for (std::size_t i = 0; i < noise.size(); ++i) {
      noise[i] = m.mixture.mono_samples()[i] - m.ref1.mono_samples()[i] - m.ref2.mono_samples()[i];
    }
    const auto louder = energy_of(m.ref1.mono_samples()) >= energy_of(m.ref2.mono_samples()) ? m.ref1 : m.ref2;
    EXPECT_NEAR(measured_snr(louder, mono(noise, 16000)), 7.0, 1e-6);

    const std::vector<AudioBuffer> refs{m.ref1, m.ref2};
    EXPECT_EQ(pit_score(refs, refs, PitMetric::SiSnr).permutation, (std::vector<std::size_t>{0, 1}));
  }
}

TEST(Separation, EqualEnergyGivesEqualGains) {
  MemoryAssets a;
  a.add("x", mono(white_noise(4000, 1), 16000));
  auto y = white_noise(4000, 2);
  const double k = std::sqrt(vbtest::sum_sq(white_noise(4000, 1)) / vbtest::sum_sq(y));
  for (auto& v : y) v *= k;
  a.add("y", mono(y, 16000));
  MixtureSpec spec;
  spec.kind = MixtureKind::Separation;
  spec.speech_ids = {"x", "y"};
  spec.snr_speech_db = 0.0;
  spec.gain_policy = GainPolicy::none();
  const auto m = make_separation_mixture(spec, a);
  EXPECT_NEAR(m.ref2.mono_samples()[10] / y[10], 1.0, 1e-9);
}

TEST(Separation, SameSpeaker) {
  const auto assets = test_assets();
  MixtureSpec spec;
  spec.kind = MixtureKind::Separation;
  spec.speech_ids = {"spk1/a.wav", "spk1/a.wav"};
  EXPECT_EQ(code_of([&] { make_separation_mixture(spec, assets); }), Errc::SameSpeaker);
}

TEST(SrPair, StopbandAndPassband) {
  const int fs = kSrRate;
  const auto hr = white_noise(fs, 4, 0.1);
  for (double cutoff : {8000.0, 12000.0, 16000.0}) {
    const auto p = make_sr_pair(mono(hr, fs), cutoff);
    EXPECT_EQ(p.hr_target, mono(hr, fs));
    const std::vector<double> lr(p.lr_input.mono_samples().begin(), p.lr_input.mono_samples().end());
    const double stop_in = vbtest::band_energy(hr, fs, cutoff + kSrTransitionHz, fs / 2.0);
    const double stop_out = vbtest::band_energy(lr, fs, cutoff + kSrTransitionHz, fs / 2.0);
    EXPECT_LE(vbtest::db(stop_out / stop_in), -60.0) << cutoff;

    // Passband: residual below 0.9 cutoff relative to the signal there.
    std::vector<double> diff(hr.size());
    for (std::size_t i = 0; i < hr.size(); ++i) diff[i] = hr[i] - lr[i];
    const double sig = vbtest::band_energy(hr, fs, 0.0, 0.9 * cutoff);
    const double res = vbtest::band_energy(diff, fs, 0.0, 0.9 * cutoff);
    EXPECT_GE(vbtest::db(sig / res), 55.0) << cutoff;
  }
}

TEST(SrPair, LsdMonotoneAndErrors) {
  const int fs = kSrRate;
  const auto hr = mono(white_noise(fs, 5, 0.1), fs);
  const double at8 = lsd(hr, make_sr_pair(hr, 8000.0).lr_input).value;
  const double at16 = lsd(hr, make_sr_pair(hr, 16000.0).lr_input).value;
  EXPECT_GT(at8, at16);
  EXPECT_EQ(code_of([&] { make_sr_pair(mono(white_noise(100, 1), 16000), 8000.0); }), Errc::WrongRate);
  EXPECT_EQ(code_of([&] { make_sr_pair(hr, 20000.0); }), Errc::InvalidCutoff);
  EXPECT_EQ(code_of([&] { make_sr_pair(hr, 7000.0); }), Errc::InvalidCutoff);
}

TEST(Bandwidth, BranchesAndFrequencies) {
  const int fs = kSrRate;
  const auto x = mono(white_noise(fs / 2, 6, 0.1), fs);
  std::uint64_t identity_seed = 0, eight_seed = 0;
  bool have_id = false, have_8 = false;
  std::size_t n16 = 0, n8 = 0;
  const std::size_t draws = 10000;
  for (std::uint64_t s = 0; s < draws; ++s) {
    const auto b = draw_bandwidth_branch(s);
    if (b == BandwidthBranch::Via16k) ++n16;
    if (b == BandwidthBranch::Via8k) {
      ++n8;
      if (!have_8) eight_seed = s, have_8 = true;
    }
    if (b == BandwidthBranch::Identity && !have_id) identity_seed = s, have_id = true;
  }
  EXPECT_NEAR(static_cast<double>(n16) / draws, 0.10, 0.01);
  EXPECT_NEAR(static_cast<double>(n8) / draws, 0.05, 0.01);

  const auto same = bandwidth_augment(x, identity_seed);
  EXPECT_EQ(same.branch, BandwidthBranch::Identity);
  EXPECT_EQ(same.audio, x);

  const auto low = bandwidth_augment(x, eight_seed);
  EXPECT_EQ(low.branch, BandwidthBranch::Via8k);
  EXPECT_EQ(low.audio.frames(), x.frames());
  const std::vector<double> in(x.mono_samples().begin(), x.mono_samples().end());
  const std::vector<double> out(low.audio.mono_samples().begin(), low.audio.mono_samples().end());
  EXPECT_LE(vbtest::db(vbtest::band_energy(out, fs, 4500.0, fs / 2.0) / vbtest::band_energy(in, fs, 0.0, fs / 2.0)),
            -60.0);
  EXPECT_EQ(code_of([&] { bandwidth_augment(mono(white_noise(10, 1), 16000), 0); }), Errc::WrongRate);
}
