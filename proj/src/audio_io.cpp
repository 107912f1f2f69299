#include <algorithm>
#include <array>
#include <cmath>
#include <cstring>
#include <fstream>
#include <functional>
#include <sstream>
#include <thread>

#include "voicebench/audio.hpp"
#include "voicebench/error.hpp"

namespace voicebench {

namespace fs = std::filesystem;

AudioBuffer::AudioBuffer(std::vector<double> planar, int sample_rate_hz,
                         int channel_count)
    : samples_(std::move(planar)),
      sample_rate_(sample_rate_hz),
      channels_(channel_count),
      frames_(0) {
  if (sample_rate_ <= 0) {
    fail(Errc::InvalidArgument, "sample rate must be positive");
  }
  if (channels_ < 1) {
    fail(Errc::InvalidArgument, "channel count must be at least 1");
  }
  if (samples_.size() % static_cast<std::size_t>(channels_) != 0) {
    fail(Errc::InvalidArgument, "sample count is not a multiple of channels");
  }
  for (double v : samples_) {
    if (!std::isfinite(v)) fail(Errc::InvalidArgument, "non-finite sample");
  }
  frames_ = samples_.size() / static_cast<std::size_t>(channels_);
}

std::span<const double> AudioBuffer::channel(int index) const& {
  if (index < 0 || index >= channels_) {
    fail(Errc::ChannelOutOfRange, "channel " + std::to_string(index) +
                                      " of " + std::to_string(channels_));
  }
  return std::span<const double>(samples_).subspan(
      static_cast<std::size_t>(index) * frames_, frames_);
}

std::span<const double> AudioBuffer::mono_samples() const& {
  if (channels_ != 1) {
    fail(Errc::NotMono, "expected mono audio, got " +
                            std::to_string(channels_) + " channels");
  }
  return samples_;
}

WavEncoding parse_wav_encoding(const std::string& name) {
  if (name == "pcm16") return WavEncoding::Pcm16;
  if (name == "pcm24") return WavEncoding::Pcm24;
  if (name == "pcm32") return WavEncoding::Pcm32;
  if (name == "float32") return WavEncoding::Float32;
  if (name == "float64") return WavEncoding::Float64;
  fail(Errc::InvalidArgument, "unknown WAV encoding '" + name + "'");
}

std::string to_string(WavEncoding encoding) {
  switch (encoding) {
    case WavEncoding::Pcm16: return "pcm16";
    case WavEncoding::Pcm24: return "pcm24";
    case WavEncoding::Pcm32: return "pcm32";
    case WavEncoding::Float32: return "float32";
    case WavEncoding::Float64: return "float64";
  }
  return "float32";
}

namespace {

constexpr std::uint16_t kFormatPcm = 1;
constexpr std::uint16_t kFormatFloat = 3;
constexpr std::uint16_t kFormatExtensible = 0xFFFE;

std::uint16_t le16(const unsigned char* p) {
  return static_cast<std::uint16_t>(p[0] | (p[1] << 8));
}

std::uint32_t le32(const unsigned char* p) {
  return static_cast<std::uint32_t>(p[0]) |
         (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) |
         (static_cast<std::uint32_t>(p[3]) << 24);
}

struct ParsedHeader {
  WavInfo info;
  std::uint64_t data_offset = 0;
  std::uint64_t data_bytes = 0;
};

ParsedHeader parse_header(std::ifstream& in, const fs::path& path) {
  std::error_code ec;
  const std::uint64_t file_size = fs::file_size(path, ec);
  if (ec) fail(Errc::IoError, "cannot stat " + path.string());

  std::array<unsigned char, 12> riff{};
  if (!in.read(reinterpret_cast<char*>(riff.data()), riff.size())) {
    fail(Errc::MalformedWav, path.string() + ": shorter than a RIFF header");
  }
  if (std::memcmp(riff.data(), "RIFF", 4) != 0 ||
      std::memcmp(riff.data() + 8, "WAVE", 4) != 0) {
    fail(Errc::MalformedWav, path.string() + ": not a RIFF/WAVE file");
  }

  ParsedHeader out;
  bool have_fmt = false;
  bool have_data = false;
  std::uint16_t format = 0;
  std::uint16_t block_align = 0;
  std::uint64_t pos = 12;

  while (pos + 8 <= file_size) {
    std::array<unsigned char, 8> hdr{};
    in.seekg(static_cast<std::streamoff>(pos));
    if (!in.read(reinterpret_cast<char*>(hdr.data()), hdr.size())) break;
    const std::uint64_t size = le32(hdr.data() + 4);
    const std::uint64_t body = pos + 8;

    if (std::memcmp(hdr.data(), "fmt ", 4) == 0) {
      if (size < 16 || body + size > file_size) {
        fail(Errc::MalformedWav, path.string() + ": truncated fmt chunk");
      }
      std::vector<unsigned char> fmt(size);
      in.read(reinterpret_cast<char*>(fmt.data()),
              static_cast<std::streamsize>(size));
      format = le16(fmt.data());
      out.info.channel_count = le16(fmt.data() + 2);
      out.info.sample_rate_hz = static_cast<int>(le32(fmt.data() + 4));
      block_align = le16(fmt.data() + 12);
      out.info.bits_per_sample = le16(fmt.data() + 14);
      if (format == kFormatExtensible) {
        if (size < 40) {
          fail(Errc::MalformedWav, path.string() + ": short extensible fmt");
        }
        format = le16(fmt.data() + 24);
      }
      have_fmt = true;
    } else if (std::memcmp(hdr.data(), "data", 4) == 0) {
      out.data_offset = body;
      out.data_bytes = size;
      if (body + size > file_size) {
        out.data_bytes = file_size - body;
        out.info.warnings.push_back(
            "data chunk declares " + std::to_string(size) + " bytes but " +
            std::to_string(out.data_bytes) + " are present; using actual length");
      }
      have_data = true;
      break;
    }
    pos = body + size + (size & 1U);
  }

  if (!have_fmt) fail(Errc::MalformedWav, path.string() + ": missing fmt chunk");
  if (!have_data) fail(Errc::MalformedWav, path.string() + ": missing data chunk");

  auto& info = out.info;
  if (info.channel_count < 1 || info.sample_rate_hz <= 0) {
    fail(Errc::MalformedWav, path.string() + ": invalid channel count or rate");
  }
  if (format == kFormatPcm) {
    if (info.bits_per_sample != 16 && info.bits_per_sample != 24 &&
        info.bits_per_sample != 32) {
      fail(Errc::UnsupportedEncoding,
           path.string() + ": PCM with " +
               std::to_string(info.bits_per_sample) + " bits");
    }
  } else if (format == kFormatFloat) {
    if (info.bits_per_sample != 32 && info.bits_per_sample != 64) {
      fail(Errc::UnsupportedEncoding,
           path.string() + ": float with " +
               std::to_string(info.bits_per_sample) + " bits");
    }
    info.is_float = true;
  } else {
    fail(Errc::UnsupportedEncoding,
         path.string() + ": format tag " + std::to_string(format));
  }
  const std::size_t frame_bytes = static_cast<std::size_t>(
      info.channel_count * (info.bits_per_sample / 8));
  if (block_align != frame_bytes) {
    fail(Errc::MalformedWav, path.string() + ": block align " +
                                 std::to_string(block_align) + " != " +
                                 std::to_string(frame_bytes));
  }
  if (out.data_bytes % frame_bytes != 0) {
    info.warnings.push_back("data length is not a whole number of frames; "
                            "trailing bytes ignored");
  }
  info.frames = out.data_bytes / frame_bytes;
  return out;
}

double decode_sample(const unsigned char* p, const WavInfo& info) {
  if (info.is_float) {
    if (info.bits_per_sample == 32) {
      const std::uint32_t bits = le32(p);
      float f;
      std::memcpy(&f, &bits, sizeof f);
      return f;
    }
    const std::uint64_t bits = static_cast<std::uint64_t>(le32(p)) |
                               (static_cast<std::uint64_t>(le32(p + 4)) << 32);
    double d;
    std::memcpy(&d, &bits, sizeof d);
    return d;
  }
  switch (info.bits_per_sample) {
    case 16:
      return static_cast<std::int16_t>(le16(p)) / 32768.0;
    case 24: {
      std::int32_t v = p[0] | (p[1] << 8) | (p[2] << 16);
      if (v & 0x800000) v -= 0x1000000;
      return v / 8388608.0;
    }
    default:
      return static_cast<std::int32_t>(le32(p)) / 2147483648.0;
  }
}

}  // namespace

WavInfo read_wav_info(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(Errc::IoError, "cannot open " + path.string());
  return parse_header(in, path).info;
}

AudioBuffer read_wav(const fs::path& path) {
  WavInfo info;
  return read_wav(path, info);
}

AudioBuffer read_wav(const fs::path& path, WavInfo& info) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(Errc::IoError, "cannot open " + path.string());
  ParsedHeader header = parse_header(in, path);
  info = header.info;

  const std::size_t width = static_cast<std::size_t>(info.bits_per_sample / 8);
  const std::size_t channels = static_cast<std::size_t>(info.channel_count);
  std::vector<unsigned char> raw(info.frames * channels * width);
  in.clear();
  in.seekg(static_cast<std::streamoff>(header.data_offset));
  if (!in.read(reinterpret_cast<char*>(raw.data()),
               static_cast<std::streamsize>(raw.size()))) {
    fail(Errc::IoError, "short read on " + path.string());
  }

  std::vector<double> planar(raw.size() / width);
  for (std::size_t f = 0; f < info.frames; ++f) {
    for (std::size_t c = 0; c < channels; ++c) {
      const double v = decode_sample(raw.data() + (f * channels + c) * width, info);
      if (!std::isfinite(v)) {
        fail(Errc::MalformedWav, path.string() + ": non-finite float sample");
      }
      planar[c * info.frames + f] = v;
    }
  }
  return AudioBuffer(std::move(planar), info.sample_rate_hz, info.channel_count);
}

namespace {

void put16(std::string& out, std::uint16_t v) {
  out.push_back(static_cast<char>(v & 0xFF));
  out.push_back(static_cast<char>((v >> 8) & 0xFF));
}

void put32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

int bits_of(WavEncoding e) {
  switch (e) {
    case WavEncoding::Pcm16: return 16;
    case WavEncoding::Pcm24: return 24;
    case WavEncoding::Pcm32: return 32;
    case WavEncoding::Float32: return 32;
    case WavEncoding::Float64: return 64;
  }
  return 32;
}

}  // namespace

WavWriteResult write_wav(const AudioBuffer& buffer, const fs::path& path,
                         WavEncoding encoding) {
  const bool is_float =
      encoding == WavEncoding::Float32 || encoding == WavEncoding::Float64;
  const int bits = bits_of(encoding);
  const std::size_t channels = static_cast<std::size_t>(buffer.channels());
  const std::size_t frames = buffer.frames();
  const std::size_t width = static_cast<std::size_t>(bits / 8);
  const std::uint64_t data_bytes = frames * channels * width;
  if (data_bytes > 0xFFFFFFFFULL - 36) {
    fail(Errc::IoError, "audio too long for a RIFF/WAVE file");
  }

  std::string out;
  out.reserve(44 + data_bytes);
  out += "RIFF";
  put32(out, static_cast<std::uint32_t>(36 + data_bytes));
  out += "WAVEfmt ";
  put32(out, 16);
  put16(out, is_float ? kFormatFloat : kFormatPcm);
  put16(out, static_cast<std::uint16_t>(channels));
  put32(out, static_cast<std::uint32_t>(buffer.sample_rate()));
  put32(out, static_cast<std::uint32_t>(buffer.sample_rate() * channels * width));
  put16(out, static_cast<std::uint16_t>(channels * width));
  put16(out, static_cast<std::uint16_t>(bits));
  out += "data";
  put32(out, static_cast<std::uint32_t>(data_bytes));

  WavWriteResult result;
  const double scale = std::ldexp(1.0, bits - 1);
  const double lo = -scale;
  const double hi = scale - 1.0;
  for (std::size_t f = 0; f < frames; ++f) {
    for (std::size_t c = 0; c < channels; ++c) {
      const double x = buffer.channel(static_cast<int>(c))[f];
      if (encoding == WavEncoding::Float32) {
        const float v = static_cast<float>(x);
        std::uint32_t u;
        std::memcpy(&u, &v, sizeof u);
        put32(out, u);
      } else if (encoding == WavEncoding::Float64) {
        std::uint64_t u;
        std::memcpy(&u, &x, sizeof u);
        put32(out, static_cast<std::uint32_t>(u));
        put32(out, static_cast<std::uint32_t>(u >> 32));
      } else {
        if (std::abs(x) > 1.0) ++result.clip_count;
        const auto q = static_cast<std::int64_t>(
            std::clamp(std::nearbyint(x * scale), lo, hi));
        const auto u = static_cast<std::uint32_t>(q);
        for (std::size_t b = 0; b < width; ++b) {
          out.push_back(static_cast<char>((u >> (8 * b)) & 0xFF));
        }
      }
    }
  }

  if (path.has_parent_path()) {
    std::error_code ec;
    fs::create_directories(path.parent_path(), ec);
  }
  fs::path tmp = path;
  tmp += ".tmp." + std::to_string(std::hash<std::thread::id>{}(std::this_thread::get_id()));
  {
    std::ofstream file(tmp, std::ios::binary | std::ios::trunc);
    if (!file) fail(Errc::IoError, "cannot open " + tmp.string() + " for writing");
    file.write(out.data(), static_cast<std::streamsize>(out.size()));
    if (!file) fail(Errc::IoError, "write failed for " + tmp.string());
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) {
    fs::remove(tmp, ec);
    fail(Errc::IoError, "cannot rename into " + path.string());
  }
  return result;
}

AudioBuffer to_mono(const AudioBuffer& buffer, MonoPolicy policy) {
  if (policy.kind == MonoPolicy::Kind::Channel) {
    auto ch = buffer.channel(policy.channel);
    return AudioBuffer::mono(std::vector<double>(ch.begin(), ch.end()),
                             buffer.sample_rate());
  }
  if (buffer.is_mono()) return buffer;
  std::vector<double> out(buffer.frames(), 0.0);
  for (int c = 0; c < buffer.channels(); ++c) {
    auto ch = buffer.channel(c);
    for (std::size_t i = 0; i < out.size(); ++i) out[i] += ch[i];
  }
  const double inv = 1.0 / buffer.channels();
  for (double& v : out) v *= inv;
  return AudioBuffer::mono(std::move(out), buffer.sample_rate());
}

}  // namespace voicebench
