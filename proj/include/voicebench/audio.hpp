#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace voicebench {

/// Planar (channel-major) waveform. Immutable once constructed; every
/// sample is finite and all channels have the same length.
class AudioBuffer {
 public:
  AudioBuffer(std::vector<double> planar, int sample_rate_hz, int channel_count);

  static AudioBuffer mono(std::vector<double> samples, int sample_rate_hz) {
    return AudioBuffer(std::move(samples), sample_rate_hz, 1);
  }

  int sample_rate() const noexcept { return sample_rate_; }
  int channels() const noexcept { return channels_; }
  bool is_mono() const noexcept { return channels_ == 1; }
  std::size_t frames() const noexcept { return frames_; }
  double duration_s() const noexcept {
    return static_cast<double>(frames_) / sample_rate_;
  }

  std::span<const double> channel(int index) const&;
  std::span<const double> channel(int index) const&& = delete;
  std::span<const double> planar() const& noexcept { return samples_; }
  std::span<const double> planar() const&& = delete;

  /// Mono convenience accessor; throws NotMono for multi-channel buffers.
  std::span<const double> mono_samples() const&;
  std::span<const double> mono_samples() const&& = delete;

  bool operator==(const AudioBuffer&) const = default;

 private:
  std::vector<double> samples_;
  int sample_rate_;
  int channels_;
  std::size_t frames_;
};

enum class WavEncoding { Pcm16, Pcm24, Pcm32, Float32, Float64 };

WavEncoding parse_wav_encoding(const std::string& name);
std::string to_string(WavEncoding encoding);

struct WavInfo {
  int sample_rate_hz = 0;
  int channel_count = 0;
  int bits_per_sample = 0;
  bool is_float = false;
  std::size_t frames = 0;
  std::vector<std::string> warnings;
};

/// Parses only the header chunks. Frame count honours the actual file size
/// when the declared data length disagrees with it.
WavInfo read_wav_info(const std::filesystem::path& path);

AudioBuffer read_wav(const std::filesystem::path& path);
AudioBuffer read_wav(const std::filesystem::path& path, WavInfo& info);

struct WavWriteResult {
  std::size_t clip_count = 0;
};

/// Integer encodings clamp to [-1, 1 - 2^-(bits-1)] and count samples whose
/// magnitude exceeded 1. The file is written to a temporary sibling and
/// renamed into place.
WavWriteResult write_wav(const AudioBuffer& buffer,
                         const std::filesystem::path& path,
                         WavEncoding encoding = WavEncoding::Float32);

struct MonoPolicy {
  enum class Kind { Average, Channel } kind = Kind::Average;
  int channel = 0;

  static MonoPolicy average() { return {}; }
  static MonoPolicy select(int index) { return {Kind::Channel, index}; }
};

AudioBuffer to_mono(const AudioBuffer& buffer, MonoPolicy policy = {});

}  // namespace voicebench
