#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace voicebench {

/// Failure categories surfaced by the toolkit. The enumerator names are
/// the strings written into reports and printed by the CLI.
enum class Errc {
  IoError,
  MalformedWav,
  UnsupportedEncoding,
  InvalidArgument,
  ChannelOutOfRange,
  EmptySignal,
  EmptyInput,
  NonColaConfig,
  InvalidBand,
  InvalidCutoff,
  NotMono,
  RateMismatch,
  LengthMismatch,
  DegenerateSignal,
  ZeroEstimate,
  TooShort,
  SingularProjection,
  SilentOrGatedOut,
  TooManySources,
  UnknownMetric,
  MissingMixture,
  InvalidRoom,
  UnachievableRT60,
  SilentSpeech,
  SilentNoise,
  AssetNotFound,
  SameSpeaker,
  WrongRate,
  NoAssetsFound,
  DuplicateAssetId,
  InsufficientAssets,
  InvalidRecipe,
  SchemaVersionMismatch,
  MalformedLine,
};

std::string_view errc_name(Errc code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& message)
      : std::runtime_error(std::string(errc_name(code)) + ": " + message),
        code_(code) {}

  Errc code() const noexcept { return code_; }
  std::string_view name() const noexcept { return errc_name(code_); }

 private:
  Errc code_;
};

[[noreturn]] inline void fail(Errc code, const std::string& message) {
  throw Error(code, message);
}

}  // namespace voicebench
