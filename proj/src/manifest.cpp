#include <algorithm>
#include <cctype>
#include <cmath>
#include <iterator>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "voicebench/dsp.hpp"
#include "voicebench/error.hpp"
#include "voicebench/manifest.hpp"
#include "voicebench/rng.hpp"

namespace voicebench {

namespace fs = std::filesystem;
using ordered_json = nlohmann::ordered_json;

std::string to_string(AssetKind kind) {
  switch (kind) {
    case AssetKind::Speech: return "speech";
    case AssetKind::Noise: return "noise";
    case AssetKind::Rir: return "rir";
  }
  return "speech";
}

AssetKind parse_asset_kind(const std::string& text) {
  if (text == "speech") return AssetKind::Speech;
  if (text == "noise") return AssetKind::Noise;
  if (text == "rir") return AssetKind::Rir;
  fail(Errc::InvalidArgument, "asset kind must be speech, noise or rir, got '" + text + "'");
}

CorpusRoot parse_corpus_root(const std::string& text) {
  const auto eq = text.find('=');
  if (eq == std::string::npos) {
    fail(Errc::InvalidArgument, "corpus root must look like kind=dir, got '" + text + "'");
  }
  return {parse_asset_kind(text.substr(0, eq)), fs::path(text.substr(eq + 1))};
}

std::vector<std::string> CorpusIndex::ids_of(AssetKind kind) const {
  std::vector<std::string> out;
  for (const auto& [id, info] : entries) {
    if (info.kind == kind) out.push_back(id);
  }
  return out;
}

namespace {

bool is_wav(const fs::path& p) {
  std::string ext = p.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return ext == ".wav";
}

}  // namespace

CorpusIndex scan_corpus(const std::vector<CorpusRoot>& roots) {
  CorpusIndex index;
  for (const auto& root : roots) {
    std::error_code ec;
    if (!fs::is_directory(root.dir, ec)) {
      fail(Errc::IoError, "corpus root " + root.dir.string() + " is not a readable directory");
    }
    std::vector<fs::path> files;
    for (auto it = fs::recursive_directory_iterator(
             root.dir, fs::directory_options::skip_permission_denied, ec);
         !ec && it != fs::recursive_directory_iterator(); it.increment(ec)) {
      if (it->is_regular_file(ec) && is_wav(it->path())) files.push_back(it->path());
    }
    if (ec) index.warnings.push_back("error while walking " + root.dir.string() + ": " + ec.message());
    std::sort(files.begin(), files.end());

    for (const auto& file : files) {
      const fs::path rel = fs::relative(file, root.dir);
      const std::string id = rel.generic_string();
      if (auto found = index.entries.find(id); found != index.entries.end()) {
        fail(Errc::DuplicateAssetId, "asset id '" + id + "' appears in both " +
                                         found->second.path.string() + " and " + file.string());
      }
      WavInfo info;
      try {
        info = read_wav_info(file);
      } catch (const Error& e) {
        index.warnings.push_back("skipping " + file.string() + ": " + e.what());
        continue;
      }
      if (info.frames == 0) {
        index.warnings.push_back("skipping " + file.string() + ": no audio frames");
        continue;
      }
      for (const auto& w : info.warnings) index.warnings.push_back(file.string() + ": " + w);
      AssetInfo asset;
      asset.path = file;
      asset.sample_rate_hz = info.sample_rate_hz;
      asset.duration_s = static_cast<double>(info.frames) / info.sample_rate_hz;
      asset.kind = root.kind;
      auto first = rel.begin();
      if (std::distance(rel.begin(), rel.end()) > 1) asset.speaker = first->string();
      index.entries.emplace(id, std::move(asset));
    }
  }
  if (index.entries.empty()) fail(Errc::NoAssetsFound, "no readable WAV files under the corpus roots");
  return index;
}

namespace {

template <typename Fn>
void read_tsv(const fs::path& tsv, Fn&& fn) {
  std::ifstream in(tsv);
  if (!in) fail(Errc::IoError, "cannot open " + tsv.string());
  std::string line;
  std::size_t number = 0;
  while (std::getline(in, line)) {
    ++number;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line.front() == '#') continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos) {
      fail(Errc::MalformedLine, tsv.string() + ":" + std::to_string(number) + ": expected two tab-separated columns");
    }
    fn(line.substr(0, tab), line.substr(tab + 1), number);
  }
}

}  // namespace

void apply_speaker_map(CorpusIndex& index, const fs::path& tsv) {
  read_tsv(tsv, [&](const std::string& id, const std::string& speaker, std::size_t) {
    auto it = index.entries.find(id);
    if (it == index.entries.end()) {
      index.warnings.push_back("speaker map names unknown asset '" + id + "'");
      return;
    }
    it->second.speaker = speaker;
  });
}

void apply_asset_scores(CorpusIndex& index, const fs::path& tsv) {
  read_tsv(tsv, [&](const std::string& id, const std::string& value, std::size_t line) {
    auto it = index.entries.find(id);
    if (it == index.entries.end()) {
      index.warnings.push_back("score table names unknown asset '" + id + "'");
      return;
    }
    try {
      it->second.score = std::stod(value);
    } catch (const std::exception&) {
      fail(Errc::MalformedLine, tsv.string() + ":" + std::to_string(line) + ": bad score '" + value + "'");
    }
  });
}

AudioBuffer CorpusAssets::load(const std::string& asset_id) const {
  auto it = index_.entries.find(asset_id);
  if (it == index_.entries.end()) fail(Errc::AssetNotFound, "no asset '" + asset_id + "' in corpus");
  AudioBuffer audio = to_mono(read_wav(it->second.path));
  if (target_rate_ && audio.sample_rate() != *target_rate_) audio = resample(audio, *target_rate_);
  return audio;
}

// ---------------------------------------------------------------------------
// Recipes

void Recipe::validate() const {
  auto check_range = [](const Range& r, const char* what) {
    if (!std::isfinite(r.first) || !std::isfinite(r.second) || r.first > r.second) {
      fail(Errc::InvalidRecipe, std::string(what) + " needs finite lo <= hi");
    }
  };
  if (name.empty()) fail(Errc::InvalidRecipe, "recipe name is empty");
  if (count < 1) fail(Errc::InvalidRecipe, "count must be >= 1");
  check_range(snr_noise_range_db, "snr_noise_range_db");
  if (snr_speech_range_db) check_range(*snr_speech_range_db, "snr_speech_range_db");
  if (cutoff_range_hz) {
    check_range(*cutoff_range_hz, "cutoff_range_hz");
    if (cutoff_range_hz->first < 8000.0 || cutoff_range_hz->second > 16000.0) {
      fail(Errc::InvalidRecipe, "cutoff_range_hz must lie within [8000, 16000]");
    }
  }
  if (!(reverb_fraction >= 0.0 && reverb_fraction <= 1.0)) {
    fail(Errc::InvalidRecipe, "reverb_fraction must be in [0, 1]");
  }
  if (!(p16 >= 0.0) || !(p8 >= 0.0) || p16 + p8 > 1.0) {
    fail(Errc::InvalidRecipe, "p16 and p8 must be non-negative with p16 + p8 <= 1");
  }
  if (sample_rate_hz && *sample_rate_hz <= 0) fail(Errc::InvalidRecipe, "sample_rate_hz must be positive");
}

namespace {

Range parse_range(const ordered_json& j, const char* key) {
  if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number()) {
    fail(Errc::InvalidRecipe, std::string(key) + " must be [lo, hi]");
  }
  return {j[0].get<double>(), j[1].get<double>()};
}

ReverbTarget parse_reverb_target(const std::string& text) {
  if (text == "reverberant") return ReverbTarget::Reverberant;
  if (text == "dry") return ReverbTarget::Dry;
  if (text == "direct_path") return ReverbTarget::DirectPath;
  fail(Errc::InvalidRecipe, "reverb_target must be reverberant, dry or direct_path");
}

}  // namespace

Recipe parse_recipe(const std::string& json_text) {
  ordered_json j;
  try {
    j = ordered_json::parse(json_text);
  } catch (const std::exception& e) {
    fail(Errc::InvalidRecipe, std::string("recipe is not valid JSON: ") + e.what());
  }
  if (!j.is_object()) fail(Errc::InvalidRecipe, "recipe must be a JSON object");

  Recipe r;
  bool noise_range_given = false;
  try {
    for (const auto& [key, value] : j.items()) {
      if (key == "name") r.name = value.get<std::string>();
      else if (key == "kind") r.kind = parse_mixture_kind(value.get<std::string>());
      else if (key == "count") r.count = value.get<std::size_t>();
      else if (key == "seed") r.seed = value.get<std::uint64_t>();
      else if (key == "snr_noise_range_db") { r.snr_noise_range_db = parse_range(value, "snr_noise_range_db"); noise_range_given = true; }
      else if (key == "snr_speech_range_db") r.snr_speech_range_db = parse_range(value, "snr_speech_range_db");
      else if (key == "reverb_fraction") r.reverb_fraction = value.get<double>();
      else if (key == "cutoff_range_hz") r.cutoff_range_hz = parse_range(value, "cutoff_range_hz");
      else if (key == "gain_policy") r.gain_policy = GainPolicy::parse(value.get<std::string>());
      else if (key == "split") r.split = value.get<std::string>();
      else if (key == "sample_rate_hz") r.sample_rate_hz = value.get<int>();
      else if (key == "encoding") r.encoding = parse_wav_encoding(value.get<std::string>());
      else if (key == "separation_noise") r.separation_noise = value.get<bool>();
      else if (key == "bandwidth_augment") r.bandwidth_augment = value.get<bool>();
      else if (key == "p16") r.p16 = value.get<double>();
      else if (key == "p8") r.p8 = value.get<double>();
      else if (key == "min_speech_score") r.min_speech_score = value.get<double>();
      else if (key == "reverb_target") r.reverb_target = parse_reverb_target(value.get<std::string>());
      else fail(Errc::InvalidRecipe, "unknown recipe field '" + key + "'");
    }
  } catch (const nlohmann::json::exception& e) {
    fail(Errc::InvalidRecipe, std::string("recipe field has the wrong type: ") + e.what());
  } catch (const Error& e) {
    if (e.code() == Errc::InvalidRecipe) throw;
    fail(Errc::InvalidRecipe, e.what());
  }
  if (r.kind == MixtureKind::Separation) {
    if (!noise_range_given) r.snr_noise_range_db = {-5.0, 15.0};
    if (!r.snr_speech_range_db) r.snr_speech_range_db = Range{0.0, 5.0};
  }
  if (r.kind == MixtureKind::SrPair && !r.cutoff_range_hz) r.cutoff_range_hz = Range{8000.0, 16000.0};
  if (r.kind != MixtureKind::Enhancement && !j.contains("reverb_fraction")) r.reverb_fraction = 0.0;
  if (r.split.empty()) r.split = r.name;
  r.validate();
  return r;
}

Recipe load_recipe(const fs::path& path) {
  std::ifstream in(path);
  if (!in) fail(Errc::IoError, "cannot open recipe " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_recipe(ss.str());
}

std::vector<MixtureSpec> sample_specs(const Recipe& recipe, const CorpusIndex& index) {
  recipe.validate();
  std::vector<std::string> speech;
  for (const auto& id : index.ids_of(AssetKind::Speech)) {
    const auto& info = index.entries.at(id);
    if (recipe.min_speech_score && !(info.score && *info.score >= *recipe.min_speech_score)) continue;
    speech.push_back(id);
  }
  const auto noise = index.ids_of(AssetKind::Noise);
  const auto rirs = index.ids_of(AssetKind::Rir);

  if (speech.empty()) fail(Errc::InsufficientAssets, "recipe needs speech assets");
  const bool wants_noise = recipe.kind == MixtureKind::Enhancement ||
                           (recipe.kind == MixtureKind::Separation && recipe.separation_noise);
  if (wants_noise && noise.empty()) fail(Errc::InsufficientAssets, "recipe needs noise assets");
  if (recipe.kind == MixtureKind::Enhancement && recipe.reverb_fraction > 0.0 && rirs.empty()) {
    fail(Errc::InsufficientAssets, "reverb_fraction > 0 needs RIR assets");
  }

  // Speaker -> utterances, for picking two distinct speakers.
  std::map<std::string, std::vector<std::string>> by_speaker;
  for (const auto& id : speech) {
    const auto& spk = index.entries.at(id).speaker;
    by_speaker[spk.empty() ? id : spk].push_back(id);
  }
  std::vector<const std::vector<std::string>*> speakers;
  for (const auto& [spk, utts] : by_speaker) speakers.push_back(&utts);
  if (recipe.kind == MixtureKind::Separation && speakers.size() < 2) {
    fail(Errc::InsufficientAssets, "separation needs at least two speakers, found " +
                                       std::to_string(speakers.size()));
  }

  const int width = std::max<int>(6, static_cast<int>(std::to_string(recipe.count - 1).size()));
  std::vector<MixtureSpec> specs;
  specs.reserve(recipe.count);
  for (std::size_t i = 0; i < recipe.count; ++i) {
    MixtureSpec spec;
    spec.seed = derive_seed(recipe.seed, i);
    std::string num = std::to_string(i);
    spec.utterance_id = recipe.name + "_" + std::string(static_cast<std::size_t>(width) - std::min<std::size_t>(num.size(), static_cast<std::size_t>(width)), '0') + num;
    spec.kind = recipe.kind;
    spec.gain_policy = recipe.gain_policy;

    CounterRng speech_pick(spec.seed, rng_stream::kSpeechPick);
    auto draw = [&](std::uint64_t stream, const Range& r) {
      return CounterRng(spec.seed, stream).uniform(r.first, r.second);
    };

    switch (recipe.kind) {
      case MixtureKind::Enhancement: {
        spec.speech_ids = {speech[speech_pick.index(speech.size())]};
        spec.noise_id = noise[CounterRng(spec.seed, rng_stream::kNoisePick).index(noise.size())];
        spec.snr_noise_db = draw(rng_stream::kSnrNoise, recipe.snr_noise_range_db);
        spec.reverberant = CounterRng(spec.seed, rng_stream::kReverb).bernoulli(recipe.reverb_fraction);
        if (*spec.reverberant) {
          spec.rir_id = rirs[CounterRng(spec.seed, rng_stream::kRirPick).index(rirs.size())];
        }
        if (recipe.bandwidth_augment) {
          const auto branch = draw_bandwidth_branch(spec.seed, recipe.p16, recipe.p8);
          spec.extra_fields.emplace_back("bandwidth_branch", "\"" + to_string(branch) + "\"");
        }
        break;
      }
      case MixtureKind::Separation: {
        const std::size_t a = speech_pick.index(speakers.size());
        std::size_t b = speech_pick.index(speakers.size() - 1);
        if (b >= a) ++b;
        const auto& ua = *speakers[a];
        const auto& ub = *speakers[b];
        spec.speech_ids = {ua[speech_pick.index(ua.size())], ub[speech_pick.index(ub.size())]};
        spec.snr_speech_db = draw(rng_stream::kSnrSpeech, *recipe.snr_speech_range_db);
        if (recipe.separation_noise) {
          spec.noise_id = noise[CounterRng(spec.seed, rng_stream::kNoisePick).index(noise.size())];
          spec.snr_noise_db = draw(rng_stream::kSnrNoise, recipe.snr_noise_range_db);
        }
        spec.reverberant = false;
        break;
      }
      case MixtureKind::SrPair: {
        spec.speech_ids = {speech[speech_pick.index(speech.size())]};
        spec.cutoff_hz = draw(rng_stream::kCutoff, *recipe.cutoff_range_hz);
        spec.reverberant = false;
        break;
      }
    }
    specs.push_back(std::move(spec));
  }
  return specs;
}

// ---------------------------------------------------------------------------
// Manifest JSONL

namespace {

const std::set<std::string>& known_fields() {
  static const std::set<std::string> fields = {
      "schema_version", "utterance_id", "kind", "speech_ids", "noise_id", "rir_id",
      "snr_speech_db", "snr_noise_db", "reverberant", "cutoff_hz", "seed", "gain_policy", "rng"};
  return fields;
}

template <typename T>
ordered_json nullable(const std::optional<T>& v) {
  return v ? ordered_json(*v) : ordered_json(nullptr);
}

}  // namespace

std::string to_json_line(const MixtureSpec& spec) {
  ordered_json j;
  j["schema_version"] = std::string(kManifestSchemaVersion);
  j["utterance_id"] = spec.utterance_id;
  j["kind"] = to_string(spec.kind);
  j["speech_ids"] = spec.speech_ids;
  j["noise_id"] = nullable(spec.noise_id);
  j["rir_id"] = nullable(spec.rir_id);
  j["snr_speech_db"] = nullable(spec.snr_speech_db);
  j["snr_noise_db"] = nullable(spec.snr_noise_db);
  j["reverberant"] = nullable(spec.reverberant);
  j["cutoff_hz"] = nullable(spec.cutoff_hz);
  j["seed"] = spec.seed;
  j["gain_policy"] = spec.gain_policy.to_string();
  j["rng"] = std::string(kRngAlgorithm);
  for (const auto& [key, raw] : spec.extra_fields) j[key] = ordered_json::parse(raw);
  return j.dump();
}

MixtureSpec parse_json_line(const std::string& line, std::size_t line_number) {
  auto bad = [&](const std::string& why) -> void {
    fail(Errc::MalformedLine, "line " + std::to_string(line_number) + ": " + why);
  };
  ordered_json j;
  try {
    j = ordered_json::parse(line);
  } catch (const std::exception& e) {
    bad(std::string("invalid JSON (") + e.what() + ")");
  }
  if (!j.is_object()) bad("expected a JSON object");

  if (!j.contains("schema_version")) bad("missing schema_version");
  const auto& version = j["schema_version"];
  std::string v;
  if (version.is_string()) v = version.get<std::string>();
  else if (version.is_number_integer()) v = std::to_string(version.get<long long>());
  else bad("schema_version must be a string or integer");
  if (v != kManifestSchemaVersion) {
    fail(Errc::SchemaVersionMismatch, "line " + std::to_string(line_number) + ": schema_version " +
                                          v + ", reader supports " + std::string(kManifestSchemaVersion));
  }

  MixtureSpec spec;
  try {
    for (const char* key : {"utterance_id", "kind", "speech_ids", "seed", "gain_policy"}) {
      if (!j.contains(key)) bad(std::string("missing ") + key);
    }
    spec.utterance_id = j["utterance_id"].get<std::string>();
    spec.kind = parse_mixture_kind(j["kind"].get<std::string>());
    spec.speech_ids = j["speech_ids"].get<std::vector<std::string>>();
    const auto& seed = j["seed"];
    if (seed.is_number_unsigned()) spec.seed = seed.get<std::uint64_t>();
    else if (seed.is_string()) spec.seed = std::stoull(seed.get<std::string>());
    else bad("seed must be an unsigned integer");
    spec.gain_policy = GainPolicy::parse(j["gain_policy"].get<std::string>());

    auto opt_string = [&](const char* key, std::optional<std::string>& out) {
      if (j.contains(key) && !j[key].is_null()) out = j[key].get<std::string>();
    };
    auto opt_number = [&](const char* key, std::optional<double>& out) {
      if (j.contains(key) && !j[key].is_null()) {
        if (!j[key].is_number()) bad(std::string(key) + " must be a number");
        out = j[key].get<double>();
      }
    };
    opt_string("noise_id", spec.noise_id);
    opt_string("rir_id", spec.rir_id);
    opt_number("snr_speech_db", spec.snr_speech_db);
    opt_number("snr_noise_db", spec.snr_noise_db);
    opt_number("cutoff_hz", spec.cutoff_hz);
    if (j.contains("reverberant") && !j["reverberant"].is_null()) {
      spec.reverberant = j["reverberant"].get<bool>();
    }
    if (j.contains("rng") && j["rng"].get<std::string>() != kRngAlgorithm) {
      bad("unsupported rng '" + j["rng"].get<std::string>() + "'");
    }
  } catch (const nlohmann::json::exception& e) {
    bad(std::string("field has the wrong type (") + e.what() + ")");
  } catch (const std::invalid_argument&) {
    bad("seed is not a number");
  } catch (const Error& e) {
    if (e.code() == Errc::MalformedLine) throw;
    bad(e.what());
  }
  for (const auto& [key, value] : j.items()) {
    if (!known_fields().contains(key)) spec.extra_fields.emplace_back(key, value.dump());
  }
  return spec;
}

void write_manifest(const std::vector<MixtureSpec>& specs, std::ostream& out) {
  for (const auto& spec : specs) out << to_json_line(spec) << '\n';
}

void save_manifest(const std::vector<MixtureSpec>& specs, const fs::path& path) {
  if (path.has_parent_path()) {
    std::error_code ec;
    fs::create_directories(path.parent_path(), ec);
  }
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) fail(Errc::IoError, "cannot write " + tmp.string());
    write_manifest(specs, out);
    if (!out) fail(Errc::IoError, "write failed for " + tmp.string());
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) fail(Errc::IoError, "cannot rename into " + path.string());
}

std::vector<MixtureSpec> load_manifest(const fs::path& path) {
  std::ifstream in(path);
  if (!in) fail(Errc::IoError, "cannot open manifest " + path.string());
  std::vector<MixtureSpec> specs;
  std::string line;
  std::size_t number = 0;
  while (std::getline(in, line)) {
    ++number;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    specs.push_back(parse_json_line(line, number));
  }
  return specs;
}

}  // namespace voicebench
