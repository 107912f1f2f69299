#include <cstdint>
#include <fstream>

#include <gtest/gtest.h>

#include "support.hpp"
#include "voicebench/audio.hpp"
#include "voicebench/error.hpp"

using namespace voicebench;
using vbtest::TempDir;

namespace {

void put_u32(std::ofstream& f, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) f.put(static_cast<char>((v >> (8 * i)) & 0xff));
}
void put_u16(std::ofstream& f, std::uint16_t v) {
  f.put(static_cast<char>(v & 0xff));
  f.put(static_cast<char>(v >> 8));
}

// Hand-rolled 16-bit PCM file so the reader is checked against bytes that
// did not come from our writer.
void write_pcm16_raw(const std::filesystem::path& p, const std::vector<std::int16_t>& interleaved,
                     int channels, int fs, std::uint32_t declared_data = 0) {
  std::ofstream f(p, std::ios::binary);
  const std::uint32_t data_bytes = static_cast<std::uint32_t>(interleaved.size() * 2);
  f.write("RIFF", 4);
  put_u32(f, 36 + data_bytes);
  f.write("WAVE", 4);
  f.write("fmt ", 4);
  put_u32(f, 16);
  put_u16(f, 1);
  put_u16(f, static_cast<std::uint16_t>(channels));
  put_u32(f, static_cast<std::uint32_t>(fs));
  put_u32(f, static_cast<std::uint32_t>(fs * channels * 2));
  put_u16(f, static_cast<std::uint16_t>(channels * 2));
  put_u16(f, 16);
  f.write("LIST", 4);
  put_u32(f, 4);
  f.write("INFO", 4);
  f.write("data", 4);
  put_u32(f, declared_data ? declared_data : data_bytes);
  for (auto s : interleaved) put_u16(f, static_cast<std::uint16_t>(s));
}

}  // namespace

TEST(AudioBuffer, RejectsNonFiniteAndBadShape) {
  EXPECT_THROW(AudioBuffer({1.0, std::nan("")}, 16000, 1), Error);
  EXPECT_THROW(AudioBuffer({1.0, 2.0, 3.0}, 16000, 2), Error);
  EXPECT_THROW(AudioBuffer({1.0}, 0, 1), Error);
  EXPECT_THROW(AudioBuffer({1.0}, 16000, 0), Error);
  AudioBuffer b({1, 2, 3, 4}, 8000, 2);
  EXPECT_EQ(b.frames(), 2u);
  EXPECT_EQ(b.channel(1)[0], 3.0);
  EXPECT_THROW((void)b.mono_samples(), Error);
}

TEST(ReadWav, Pcm16Scaling) {
  TempDir dir;
  write_pcm16_raw(dir / "a.wav", {16384, -32768, 0, 32767}, 1, 16000);
  const auto b = read_wav(dir / "a.wav");
  ASSERT_EQ(b.frames(), 4u);
  EXPECT_EQ(b.mono_samples()[0], 0.5);
  EXPECT_EQ(b.mono_samples()[1], -1.0);
  EXPECT_EQ(b.mono_samples()[3], 32767.0 / 32768.0);
}

TEST(ReadWav, StereoHeaderEcho) {
  TempDir dir;
  std::vector<std::int16_t> data(480 * 2);
  for (std::size_t i = 0; i < 480; ++i) {
    data[2 * i] = static_cast<std::int16_t>(i);
    data[2 * i + 1] = static_cast<std::int16_t>(-static_cast<int>(i));
  }
  write_pcm16_raw(dir / "s.wav", data, 2, 48000);
  const auto b = read_wav(dir / "s.wav");
  EXPECT_EQ(b.channels(), 2);
  EXPECT_EQ(b.frames(), 480u);
  EXPECT_EQ(b.sample_rate(), 48000);
  EXPECT_EQ(b.channel(1)[10], -10.0 / 32768.0);
}

TEST(ReadWav, TruncatedDataTrustsActualLength) {
  TempDir dir;
  write_pcm16_raw(dir / "t.wav", {1, 2, 3}, 1, 16000, 1000);
  const auto info = read_wav_info(dir / "t.wav");
  EXPECT_EQ(info.frames, 3u);
  EXPECT_FALSE(info.warnings.empty());
  EXPECT_EQ(read_wav(dir / "t.wav").frames(), 3u);
}

TEST(ReadWav, Errors) {
  TempDir dir;
  try {
    read_wav(dir / "missing.wav");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::IoError);
  }
  {
    std::ofstream f(dir / "junk.wav", std::ios::binary);
    f << "RIFX this is not a wave file at all";
  }
  try {
    read_wav(dir / "junk.wav");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::MalformedWav);
  }
  // ADPCM format tag.
  write_pcm16_raw(dir / "adpcm.wav", {0, 0}, 1, 16000);
  {
    std::fstream f(dir / "adpcm.wav", std::ios::binary | std::ios::in | std::ios::out);
    f.seekp(20);
    f.put(2);
  }
  try {
    read_wav(dir / "adpcm.wav");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::UnsupportedEncoding);
  }
}

TEST(WriteWav, FloatRoundTripIsExact) {
  TempDir dir;
  // float32 storage: pick values that are exactly representable.
  std::vector<double> x;
  for (const auto v : vbtest::white_noise(3000, 7)) x.push_back(static_cast<float>(v * 0.3));
  const AudioBuffer b(x, 22050, 3);
  write_wav(b, dir / "f.wav", WavEncoding::Float32);
  EXPECT_EQ(read_wav(dir / "f.wav"), b);

  const AudioBuffer d(vbtest::white_noise(1000, 8), 8000, 2);
  write_wav(d, dir / "d.wav", WavEncoding::Float64);
  EXPECT_EQ(read_wav(dir / "d.wav"), d);
}

TEST(WriteWav, IntegerQuantizationBound) {
  TempDir dir;
  const auto x = vbtest::white_noise(5000, 3, 0.3);
  std::vector<double> clipped_free;
  for (double v : x) clipped_free.push_back(std::clamp(v, -1.0, 0.999));
  const auto b = vbtest::mono(clipped_free, 16000);
  for (auto [enc, bits] : {std::pair{WavEncoding::Pcm16, 16}, {WavEncoding::Pcm24, 24}, {WavEncoding::Pcm32, 32}}) {
    write_wav(b, dir / "q.wav", enc);
    const auto r = read_wav(dir / "q.wav");
    const auto info = read_wav_info(dir / "q.wav");
    EXPECT_EQ(info.bits_per_sample, bits);
    double worst = 0.0;
    for (std::size_t i = 0; i < r.frames(); ++i) {
      worst = std::max(worst, std::abs(r.mono_samples()[i] - clipped_free[i]));
    }
    EXPECT_LE(worst, std::ldexp(1.0, -(bits - 1))) << bits;
  }
}

TEST(WriteWav, ClampAndClipCount) {
  TempDir dir;
  const auto res = write_wav(vbtest::mono({0.5, 1.5, -2.0, 1.0}, 16000), dir / "c.wav", WavEncoding::Pcm16);
  EXPECT_EQ(res.clip_count, 2u);
  const auto buf = read_wav(dir / "c.wav");
  const auto r = buf.mono_samples();
  EXPECT_NEAR(r[0], 0.5, 1.0 / 32768);
  EXPECT_EQ(r[1], 1.0 - 1.0 / 32768);
  EXPECT_EQ(r[2], -1.0);
}

TEST(WriteWav, CreatesParentDirectories) {
  TempDir dir;
  write_wav(vbtest::mono({0.1}, 16000), dir / "a/b/c.wav");
  EXPECT_TRUE(std::filesystem::exists(dir / "a/b/c.wav"));
}

TEST(ToMono, Policies) {
  const auto m = vbtest::mono({0.1, 0.2}, 16000);
  EXPECT_EQ(to_mono(m), m);
  EXPECT_EQ(to_mono(m, MonoPolicy::select(0)), m);

  const AudioBuffer st({0.3, -0.2, -0.3, 0.2}, 16000, 2);
  const auto avg = to_mono(st);
  for (double v : avg.mono_samples()) EXPECT_EQ(v, 0.0);
  const auto second = to_mono(st, MonoPolicy::select(1));
  EXPECT_EQ(second.mono_samples()[0], -0.3);
  EXPECT_EQ(second.mono_samples()[1], 0.2);
  try {
    to_mono(st, MonoPolicy::select(2));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::ChannelOutOfRange);
  }
}

TEST(WavEncoding, Names) {
  for (auto e : {WavEncoding::Pcm16, WavEncoding::Pcm24, WavEncoding::Pcm32, WavEncoding::Float32,
                 WavEncoding::Float64}) {
    EXPECT_EQ(parse_wav_encoding(to_string(e)), e);
  }
  EXPECT_THROW(parse_wav_encoding("mp3"), Error);
}
