#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "voicebench/simulate.hpp"

namespace voicebench {

enum class AssetKind { Speech, Noise, Rir };

std::string to_string(AssetKind kind);
AssetKind parse_asset_kind(const std::string& text);

struct AssetInfo {
  std::filesystem::path path;
  int sample_rate_hz = 0;
  double duration_s = 0.0;
  AssetKind kind = AssetKind::Speech;
  /// First path component under the root; empty for files at the root.
  std::string speaker;
  /// Optional external quality score (e.g. a MOS estimate) for filtering.
  std::optional<double> score;
};

struct CorpusRoot {
  AssetKind kind = AssetKind::Speech;
  std::filesystem::path dir;
};

/// "speech=/data/clean" style root specification.
CorpusRoot parse_corpus_root(const std::string& text);

struct CorpusIndex {
  std::map<std::string, AssetInfo> entries;
  std::vector<std::string> warnings;

  std::vector<std::string> ids_of(AssetKind kind) const;
};

/// Recursively indexes *.wav under each root. Asset ids are paths relative
/// to their root (generic '/' separators). Unreadable files are skipped with
/// a warning; an id seen under two roots is a DuplicateAssetId error.
CorpusIndex scan_corpus(const std::vector<CorpusRoot>& roots);

/// TSV "asset_id<TAB>speaker" overriding inferred speakers.
void apply_speaker_map(CorpusIndex& index, const std::filesystem::path& tsv);

/// TSV "asset_id<TAB>score" attaching external quality scores.
void apply_asset_scores(CorpusIndex& index, const std::filesystem::path& tsv);

/// Reads mono audio from the indexed files, resampling to `target_rate_hz`
/// when given.
class CorpusAssets final : public AssetProvider {
 public:
  explicit CorpusAssets(const CorpusIndex& index, std::optional<int> target_rate_hz = {})
      : index_(index), target_rate_(target_rate_hz) {}
  AudioBuffer load(const std::string& asset_id) const override;

 private:
  const CorpusIndex& index_;
  std::optional<int> target_rate_;
};

using Range = std::pair<double, double>;

struct Recipe {
  std::string name = "train";
  MixtureKind kind = MixtureKind::Enhancement;
  std::size_t count = 1;
  std::uint64_t seed = 0;
  Range snr_noise_range_db{0.0, 15.0};
  std::optional<Range> snr_speech_range_db;
  double reverb_fraction = 0.3;
  std::optional<Range> cutoff_range_hz;
  GainPolicy gain_policy;
  /// Output split directory; defaults to `name`.
  std::string split;
  std::optional<int> sample_rate_hz;
  WavEncoding encoding = WavEncoding::Float32;
  /// Include noise in separation mixtures.
  bool separation_noise = true;
  /// Apply seeded 16k/8k band-limiting to noisy 48 kHz enhancement inputs.
  bool bandwidth_augment = false;
  double p16 = 0.10;
  double p8 = 0.05;
  /// Speech assets with an external score below this are not sampled.
  std::optional<double> min_speech_score;
  ReverbTarget reverb_target = ReverbTarget::Reverberant;

  void validate() const;
};

Recipe parse_recipe(const std::string& json_text);
Recipe load_recipe(const std::filesystem::path& path);

/// Draws recipe.count specs. Spec i gets seed derive_seed(recipe.seed, i)
/// and every random choice comes from named streams of that seed.
std::vector<MixtureSpec> sample_specs(const Recipe& recipe, const CorpusIndex& index);

inline constexpr std::string_view kManifestSchemaVersion = "1";

std::string to_json_line(const MixtureSpec& spec);
/// Throws MalformedLine (with `line_number`) or SchemaVersionMismatch.
MixtureSpec parse_json_line(const std::string& line, std::size_t line_number = 1);

void save_manifest(const std::vector<MixtureSpec>& specs, const std::filesystem::path& path);
void write_manifest(const std::vector<MixtureSpec>& specs, std::ostream& out);
std::vector<MixtureSpec> load_manifest(const std::filesystem::path& path);

}  // namespace voicebench
