#include "voicebench/error.hpp"

namespace voicebench {

std::string_view errc_name(Errc code) noexcept {
  switch (code) {
    case Errc::IoError: return "IoError";
    case Errc::MalformedWav: return "MalformedWav";
    case Errc::UnsupportedEncoding: return "UnsupportedEncoding";
    case Errc::InvalidArgument: return "InvalidArgument";
    case Errc::ChannelOutOfRange: return "ChannelOutOfRange";
    case Errc::EmptySignal: return "EmptySignal";
    case Errc::EmptyInput: return "EmptyInput";
    case Errc::NonColaConfig: return "NonColaConfig";
    case Errc::InvalidBand: return "InvalidBand";
    case Errc::InvalidCutoff: return "InvalidCutoff";
    case Errc::NotMono: return "NotMono";
    case Errc::RateMismatch: return "RateMismatch";
    case Errc::LengthMismatch: return "LengthMismatch";
    case Errc::DegenerateSignal: return "DegenerateSignal";
    case Errc::ZeroEstimate: return "ZeroEstimate";
    case Errc::TooShort: return "TooShort";
    case Errc::SingularProjection: return "SingularProjection";
    case Errc::SilentOrGatedOut: return "SilentOrGatedOut";
    case Errc::TooManySources: return "TooManySources";
    case Errc::UnknownMetric: return "UnknownMetric";
    case Errc::MissingMixture: return "MissingMixture";
    case Errc::InvalidRoom: return "InvalidRoom";
    case Errc::UnachievableRT60: return "UnachievableRT60";
    case Errc::SilentSpeech: return "SilentSpeech";
    case Errc::SilentNoise: return "SilentNoise";
    case Errc::AssetNotFound: return "AssetNotFound";
    case Errc::SameSpeaker: return "SameSpeaker";
    case Errc::WrongRate: return "WrongRate";
    case Errc::NoAssetsFound: return "NoAssetsFound";
    case Errc::DuplicateAssetId: return "DuplicateAssetId";
    case Errc::InsufficientAssets: return "InsufficientAssets";
    case Errc::InvalidRecipe: return "InvalidRecipe";
    case Errc::SchemaVersionMismatch: return "SchemaVersionMismatch";
    case Errc::MalformedLine: return "MalformedLine";
  }
  return "Unknown";
}

}  // namespace voicebench
