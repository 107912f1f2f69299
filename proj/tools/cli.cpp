#include "cli.hpp"

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <optional>
#include <ostream>
#include <sstream>
#include <thread>

#include <CLI11.hpp>
#include <json.hpp>

#include "voicebench/audio.hpp"
#include "voicebench/dsp.hpp"
#include "voicebench/error.hpp"
#include "voicebench/manifest.hpp"
#include "voicebench/metrics.hpp"
#include "voicebench/report.hpp"
#include "voicebench/rng.hpp"
#include "voicebench/simulate.hpp"

namespace voicebench::cli {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

unsigned default_workers() {
  if (const char* env = std::getenv("VOICEBENCH_WORKERS")) {
    char* end = nullptr;
    const long n = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && n > 0) return static_cast<unsigned>(n);
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

namespace {

/// Usage-type failures exit 1, everything else found in the data exits 2.
int exit_code_for(Errc code) {
  switch (code) {
    case Errc::InvalidArgument:
    case Errc::UnknownMetric:
    case Errc::InvalidRoom:
    case Errc::UnachievableRT60:
    case Errc::InvalidRecipe:
    case Errc::InvalidCutoff:
    case Errc::TooManySources:
      return kUsage;
    default:
      return kDataError;
  }
}

int batch_exit(std::size_t ok, std::size_t failed) {
  if (ok == 0) return kDataError;
  return failed == 0 ? kOk : kPartialFailure;
}

/// Runs fn(i) for i in [0, n) on up to `workers` threads. fn must not throw.
template <typename Fn>
void parallel_for(std::size_t n, unsigned workers, Fn&& fn) {
  workers = std::max(1u, std::min<unsigned>(workers, static_cast<unsigned>(std::max<std::size_t>(n, 1))));
  if (workers == 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (unsigned w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) fn(i);
    });
  }
  for (auto& t : pool) t.join();
}

std::vector<std::string> list_wavs(const fs::path& dir) {
  std::vector<std::string> out;
  std::error_code ec;
  for (auto it = fs::recursive_directory_iterator(dir, ec); !ec && it != fs::recursive_directory_iterator();
       it.increment(ec)) {
    if (!it->is_regular_file()) continue;
    auto ext = it->path().extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
    if (ext == ".wav") out.push_back(fs::relative(it->path(), dir).generic_string());
  }
  if (ec) fail(Errc::IoError, "cannot list " + dir.string() + ": " + ec.message());
  std::sort(out.begin(), out.end());
  return out;
}

void write_text(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
    if (!f) fail(Errc::IoError, "cannot write " + path.string());
    f << text;
    if (!f) fail(Errc::IoError, "write failed for " + path.string());
  }
  fs::rename(tmp, path);
}

std::array<double, 3> parse_triple(const std::string& text, char sep) {
  std::array<double, 3> v{};
  std::stringstream ss(text);
  std::string part;
  std::size_t i = 0;
  while (std::getline(ss, part, sep)) {
    if (i == 3) break;
    try {
      std::size_t used = 0;
      v[i] = std::stod(part, &used);
      if (used != part.size()) throw std::invalid_argument(part);
    } catch (const std::exception&) {
      fail(Errc::InvalidArgument, "cannot parse '" + text + "' as three numbers");
    }
    ++i;
  }
  if (i != 3 || ss.rdbuf()->in_avail() > 0) {
    fail(Errc::InvalidArgument, "expected three numbers separated by '" + std::string(1, sep) + "', got '" + text + "'");
  }
  return v;
}

Range parse_range_arg(const std::string& text) {
  const auto comma = text.find(',');
  if (comma == std::string::npos) fail(Errc::InvalidArgument, "expected lo,hi, got '" + text + "'");
  try {
    return {std::stod(text.substr(0, comma)), std::stod(text.substr(comma + 1))};
  } catch (const std::exception&) {
    fail(Errc::InvalidArgument, "expected lo,hi, got '" + text + "'");
  }
}

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

AudioBuffer load_mono(const fs::path& path) { return to_mono(read_wav(path)); }

std::string strip_wav(const std::string& rel) {
  fs::path p(rel);
  return p.replace_extension().generic_string();
}

void emit_summary(const SummaryTable& table, TableFormat format, const std::string& out_path,
                  std::ostream& out) {
  const std::string text = emit(table, format);
  if (out_path.empty()) out << text;
  else write_text(out_path, text);
}

// ---------------------------------------------------------------------------
// score

struct ScoreArgs {
  std::string ref, est, mix, pairs, out, per_utt, dataset, model;
  std::string metrics = "snr,si_snr,stoi,lsd";
  std::string format = "csv";
  int sample_rate = 0;
  bool allow_resample = false;
  unsigned workers = 0;
};

struct ScoreJob {
  std::string id;
  fs::path ref, est;
  std::optional<fs::path> mix;
};

AudioBuffer match_rate(AudioBuffer audio, int rate, bool allow, const std::string& what) {
  if (audio.sample_rate() == rate) return audio;
  if (!allow) {
    fail(Errc::RateMismatch, what + " is " + std::to_string(audio.sample_rate()) + " Hz, reference is " +
                                 std::to_string(rate) + " Hz (use --allow-resample)");
  }
  return resample(audio, rate);
}

int cmd_score(const ScoreArgs& a, std::ostream& out, std::ostream& err) {
  const auto metrics = split_list(a.metrics);
  if (metrics.empty()) fail(Errc::InvalidArgument, "--metrics is empty");
  for (const auto& m : metrics) {
    if (!is_known_metric(m)) fail(Errc::UnknownMetric, "unknown metric '" + m + "'");
  }
  if (std::find(metrics.begin(), metrics.end(), "si_snri") != metrics.end() && a.mix.empty()) {
    fail(Errc::InvalidArgument, "si_snri needs --mix");
  }
  const TableFormat format = parse_table_format(a.format);

  std::vector<ScoreJob> jobs;
  const bool dir_mode = fs::is_directory(a.ref);
  if (dir_mode != fs::is_directory(a.est)) {
    fail(Errc::InvalidArgument, "--ref and --est must both be files or both be directories");
  }
  auto mix_for = [&](const std::string& rel) -> std::optional<fs::path> {
    if (a.mix.empty()) return std::nullopt;
    return fs::is_directory(a.mix) ? fs::path(a.mix) / rel : fs::path(a.mix);
  };
  if (!a.pairs.empty()) {
    std::ifstream in(a.pairs);
    if (!in) fail(Errc::IoError, "cannot open " + a.pairs);
    std::string line;
    while (std::getline(in, line)) {
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (line.empty() || line[0] == '#') continue;
      const auto tab = line.find('\t');
      if (tab == std::string::npos) fail(Errc::MalformedLine, "pairs file needs ref<TAB>est lines");
      const std::string r = line.substr(0, tab), e = line.substr(tab + 1);
      jobs.push_back({r, dir_mode ? fs::path(a.ref) / r : fs::path(r),
                      dir_mode ? fs::path(a.est) / e : fs::path(e), mix_for(r)});
    }
  } else if (dir_mode) {
    for (const auto& rel : list_wavs(a.ref)) {
      const fs::path est = fs::path(a.est) / rel;
      if (!fs::exists(est)) {
        err << "warning: no estimate for " << rel << "\n";
        continue;
      }
      jobs.push_back({rel, fs::path(a.ref) / rel, est, mix_for(rel)});
    }
  } else {
    jobs.push_back({fs::path(a.ref).filename().string(), a.ref, a.est, mix_for("")});
  }
  if (jobs.empty()) fail(Errc::EmptyInput, "no reference/estimate pairs matched");

  std::vector<std::optional<MetricReport>> reports(jobs.size());
  std::vector<std::string> errors(jobs.size());
  parallel_for(jobs.size(), a.workers, [&](std::size_t i) {
    const auto& job = jobs[i];
    try {
      AudioBuffer ref = load_mono(job.ref);
      AudioBuffer est = load_mono(job.est);
      if (a.sample_rate > 0) {
        ref = resample(ref, a.sample_rate);
        est = resample(est, a.sample_rate);
      }
      est = match_rate(est, ref.sample_rate(), a.allow_resample || a.sample_rate > 0, "estimate");
      std::optional<AudioBuffer> mix;
      if (job.mix) {
        mix = match_rate(load_mono(*job.mix), ref.sample_rate(), a.allow_resample || a.sample_rate > 0, "mixture");
      }
      MetricReport r = score_pair(ref, est, metrics, mix ? &*mix : nullptr, job.id);
      if (r.errors.size() == metrics.size()) {
        errors[i] = "every metric failed";
      }
      reports[i] = std::move(r);
    } catch (const std::exception& e) {
      errors[i] = e.what();
    }
  });

  // Jobs are in sorted order already except with --pairs; sort indices by id.
  std::vector<std::size_t> order(jobs.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(), [&](auto x, auto y) { return jobs[x].id < jobs[y].id; });

  std::vector<MetricReport> ok;
  std::string jsonl;
  std::size_t failed = 0;
  for (auto i : order) {
    if (!errors[i].empty()) {
      ++failed;
      err << "error: " << jobs[i].id << ": " << errors[i] << "\n";
      json j;
      j["utterance_id"] = jobs[i].id;
      j["error"] = errors[i];
      jsonl += j.dump() + "\n";
      continue;
    }
    jsonl += to_json_line(*reports[i]) + "\n";
    ok.push_back(*reports[i]);
  }
  if (!a.per_utt.empty()) {
    if (fs::path(a.per_utt).extension() == ".csv") write_text(a.per_utt, per_utterance_csv(ok));
    else write_text(a.per_utt, jsonl);
  }
  if (ok.empty()) {
    err << "no utterance could be scored\n";
    return kDataError;
  }
  emit_summary(aggregate(ok, {a.dataset, a.model}), format, a.out, out);
  return batch_exit(ok.size(), failed);
}

// ---------------------------------------------------------------------------
// compare

struct CompareArgs {
  std::string refs, ests, mix, out, per_utt;
  std::string metric = "si_snr";
  std::string format = "csv";
  unsigned workers = 0;
};

std::vector<std::string> source_dirs(const fs::path& root) {
  std::vector<std::pair<int, std::string>> found;
  std::error_code ec;
  for (const auto& e : fs::directory_iterator(root, ec)) {
    const std::string name = e.path().filename().string();
    if (!e.is_directory() || name.size() < 2 || name[0] != 's') continue;
    if (!std::all_of(name.begin() + 1, name.end(), [](unsigned char c) { return std::isdigit(c); })) continue;
    found.emplace_back(std::stoi(name.substr(1)), name);
  }
  if (ec) fail(Errc::IoError, "cannot list " + root.string());
  std::sort(found.begin(), found.end());
  std::vector<std::string> out;
  for (auto& [n, name] : found) out.push_back(name);
  return out;
}

int cmd_compare(const CompareArgs& a, std::ostream& out, std::ostream& err) {
  const PitMetric metric = parse_pit_metric(a.metric);
  const TableFormat format = parse_table_format(a.format);
  const auto sources = source_dirs(a.refs);
  if (sources.empty()) fail(Errc::EmptyInput, "no s1, s2, ... directories under " + a.refs);
  if (sources.size() > kMaxPitSources) {
    fail(Errc::TooManySources, std::to_string(sources.size()) + " sources, at most " +
                                   std::to_string(kMaxPitSources) + " supported");
  }
  const auto utts = list_wavs(fs::path(a.refs) / sources[0]);
  if (utts.empty()) fail(Errc::EmptyInput, "no reference files under " + a.refs);

  const std::string score_name = "pit_" + a.metric;
  std::vector<std::optional<MetricReport>> reports(utts.size());
  std::vector<json> lines(utts.size());
  std::vector<std::string> errors(utts.size());
  parallel_for(utts.size(), a.workers, [&](std::size_t i) {
    const auto& rel = utts[i];
    try {
      std::vector<AudioBuffer> refs, ests;
      for (const auto& s : sources) {
        refs.push_back(load_mono(fs::path(a.refs) / s / rel));
        ests.push_back(load_mono(fs::path(a.ests) / s / rel));
      }
      const PitResult pit = pit_score(refs, ests, metric);
      MetricReport r;
      r.utterance_id = rel;
      r.scores[score_name] = pit.mean_score;
      if (std::any_of(pit.per_pair_scores.begin(), pit.per_pair_scores.end(),
                      [](double v) { return v >= kCapDb; })) {
        r.metric_flags[score_name].push_back(std::string(flag::kCapped));
      }
      json line;
      line["utterance_id"] = rel;
      line["permutation"] = pit.permutation;
      line["scores"] = pit.per_pair_scores;
      line["mean"] = pit.mean_score;
      if (!a.mix.empty()) {
        const AudioBuffer mix = load_mono(fs::path(a.mix) / rel);
        std::vector<double> imp;
        double sum = 0.0;
        for (std::size_t k = 0; k < refs.size(); ++k) {
          imp.push_back(si_snr_improvement(mix, ests[pit.permutation[k]], refs[k]).value);
          sum += imp.back();
        }
        r.scores["si_snri"] = sum / static_cast<double>(imp.size());
        line["si_snri"] = imp;
      }
      for (const auto& [m, f] : r.metric_flags) r.flags.insert(r.flags.end(), f.begin(), f.end());
      reports[i] = std::move(r);
      lines[i] = std::move(line);
    } catch (const std::exception& e) {
      errors[i] = e.what();
    }
  });

  std::vector<MetricReport> ok;
  std::string jsonl;
  std::size_t failed = 0;
  for (std::size_t i = 0; i < utts.size(); ++i) {
    if (!errors[i].empty()) {
      ++failed;
      err << "error: " << utts[i] << ": " << errors[i] << "\n";
      json j;
      j["utterance_id"] = utts[i];
      j["error"] = errors[i];
      jsonl += j.dump() + "\n";
      continue;
    }
    std::string perm;
    for (auto p : reports[i] ? lines[i]["permutation"].get<std::vector<std::size_t>>() : std::vector<std::size_t>{}) {
      perm += (perm.empty() ? "" : ",") + std::to_string(p);
    }
    err << utts[i] << ": permutation (" << perm << ") " << score_name << " "
        << format_double(reports[i]->scores.at(score_name)) << "\n";
    jsonl += lines[i].dump() + "\n";
    ok.push_back(*reports[i]);
  }
  if (!a.per_utt.empty()) write_text(a.per_utt, jsonl);
  if (ok.empty()) return kDataError;
  emit_summary(aggregate(ok), format, a.out, out);
  return batch_exit(ok.size(), failed);
}

// ---------------------------------------------------------------------------
// simulate

struct SimulateArgs {
  std::string recipe, out, speaker_map, scores;
  std::vector<std::string> corpus;
  unsigned workers = 0;
  bool dry_run = false;
};

RealizeOptions realize_options(const Recipe& r) {
  RealizeOptions o;
  o.reverb_probability = r.reverb_fraction;
  o.enhancement_snr_db = r.snr_noise_range_db;
  o.separation_snr_noise_db = r.snr_noise_range_db;
  if (r.snr_speech_range_db) o.separation_snr_speech_db = *r.snr_speech_range_db;
  if (r.cutoff_range_hz) o.cutoff_range_hz = *r.cutoff_range_hz;
  o.reverb_target = r.reverb_target;
  return o;
}

int cmd_simulate(const SimulateArgs& a, std::ostream& out, std::ostream& err) {
  const Recipe recipe = load_recipe(a.recipe);
  std::vector<CorpusRoot> roots;
  for (const auto& c : a.corpus) roots.push_back(parse_corpus_root(c));
  if (roots.empty()) fail(Errc::InvalidArgument, "--corpus is required");
  CorpusIndex index = scan_corpus(roots);
  if (!a.speaker_map.empty()) apply_speaker_map(index, a.speaker_map);
  if (!a.scores.empty()) apply_asset_scores(index, a.scores);
  for (const auto& w : index.warnings) err << "warning: " << w << "\n";

  const auto specs = sample_specs(recipe, index);
  const fs::path split_dir = fs::path(a.out) / recipe.split;
  const fs::path manifest = split_dir / "manifest.jsonl";

  if (a.dry_run) {
    save_manifest(specs, manifest);
    out << "wrote " << specs.size() << " specs to " << manifest.string() << "\n";
    return kOk;
  }

  const CorpusAssets assets(index, recipe.sample_rate_hz);
  const RealizeOptions options = realize_options(recipe);
  std::vector<MixtureSpec> realized(specs.size());
  std::vector<std::string> errors(specs.size());
  std::vector<std::size_t> clipped(specs.size(), 0);
  auto put = [&](const AudioBuffer& audio, const char* sub, const std::string& id) {
    return write_wav(audio, split_dir / sub / (id + ".wav"), recipe.encoding).clip_count;
  };

  parallel_for(specs.size(), a.workers, [&](std::size_t i) {
    const auto& spec = specs[i];
    try {
      switch (spec.kind) {
        case MixtureKind::Enhancement: {
          auto pair = make_enhancement_pair(spec, assets, options);
          AudioBuffer noisy = pair.noisy;
          if (recipe.bandwidth_augment) {
            noisy = bandwidth_augment(noisy, spec.seed, recipe.p16, recipe.p8).audio;
          }
          clipped[i] += put(noisy, "noisy", spec.utterance_id);
          clipped[i] += put(pair.clean, "clean", spec.utterance_id);
          realized[i] = std::move(pair.realized);
          break;
        }
        case MixtureKind::Separation: {
          auto mix = make_separation_mixture(spec, assets, options);
          clipped[i] += put(mix.mixture, "mix", spec.utterance_id);
          clipped[i] += put(mix.ref1, "s1", spec.utterance_id);
          clipped[i] += put(mix.ref2, "s2", spec.utterance_id);
          realized[i] = std::move(mix.realized);
          break;
        }
        case MixtureKind::SrPair: {
          MixtureSpec r;
          auto pair = make_sr_pair(spec, assets, &r, options);
          clipped[i] += put(pair.lr_input, "lr", spec.utterance_id);
          clipped[i] += put(pair.hr_target, "hr", spec.utterance_id);
          realized[i] = std::move(r);
          break;
        }
      }
    } catch (const std::exception& e) {
      errors[i] = e.what();
    }
  });

  std::vector<MixtureSpec> written;
  std::size_t failed = 0;
  for (std::size_t i = 0; i < specs.size(); ++i) {
    if (!errors[i].empty()) {
      ++failed;
      err << "error: " << specs[i].utterance_id << ": " << errors[i] << "\n";
      continue;
    }
    if (clipped[i] > 0) err << "warning: " << specs[i].utterance_id << ": " << clipped[i] << " samples clipped\n";
    written.push_back(std::move(realized[i]));
  }
  save_manifest(written, manifest);
  out << "wrote " << written.size() << " of " << specs.size() << " utterances to " << split_dir.string() << "\n";
  return batch_exit(written.size(), failed);
}

// ---------------------------------------------------------------------------
// rir

struct RirArgs {
  std::string room = "4x5x3", src = "1,1,1.5", mic = "2,3,1.5", out, encoding = "float32";
  double rt60 = 0.3;
  int order = -1;
  int fs = 16000;
  std::size_t len = 4096;
  bool anechoic = false;
  bool no_highpass = false;
};

int cmd_rir(const RirArgs& a, std::ostream& out, std::ostream&) {
  RoomSpec room;
  room.dimensions_m = parse_triple(a.room, 'x');
  room.source_pos_m = parse_triple(a.src, ',');
  room.mic_pos_m = parse_triple(a.mic, ',');
  room.sample_rate_hz = a.fs;
  room.rir_length_samples = a.len;
  room.max_order = a.order;
  room.high_pass = !a.no_highpass;
  if (a.anechoic) {
    room.max_order = 0;
    room.reflection_coeffs = std::array<double, 6>{};
    room.high_pass = false;
  } else {
    room.rt60_s = a.rt60;
  }
  const AudioBuffer rir = generate_rir(room);
  write_wav(rir, a.out, parse_wav_encoding(a.encoding));
  out << "wrote " << rir.frames() << " samples to " << a.out << "\n";
  if (!a.anechoic) {
    if (auto t = estimate_rt60(rir.mono_samples(), a.fs)) out << "estimated rt60 " << format_double(*t) << " s\n";
  }
  return kOk;
}

// ---------------------------------------------------------------------------
// srpairs

struct SrArgs {
  std::string in, out, cutoff_range = "8000,16000", encoding = "float32";
  std::uint64_t seed = 0;
  unsigned workers = 0;
};

int cmd_srpairs(const SrArgs& a, std::ostream& out, std::ostream& err) {
  const Range range = parse_range_arg(a.cutoff_range);
  if (!(range.first >= 8000.0 && range.second <= 16000.0 && range.first <= range.second)) {
    fail(Errc::InvalidCutoff, "--cutoff-range must satisfy 8000 <= lo <= hi <= 16000");
  }
  const WavEncoding encoding = parse_wav_encoding(a.encoding);
  const CorpusIndex index = scan_corpus({CorpusRoot{AssetKind::Speech, a.in}});
  for (const auto& w : index.warnings) err << "warning: " << w << "\n";
  const auto ids = index.ids_of(AssetKind::Speech);
  const CorpusAssets assets(index);
  RealizeOptions options;
  options.cutoff_range_hz = range;

  std::vector<MixtureSpec> realized(ids.size());
  std::vector<std::string> errors(ids.size());
  parallel_for(ids.size(), a.workers, [&](std::size_t i) {
    MixtureSpec spec;
    spec.utterance_id = strip_wav(ids[i]);
    spec.kind = MixtureKind::SrPair;
    spec.speech_ids = {ids[i]};
    spec.seed = derive_seed(a.seed, i);
    spec.gain_policy = GainPolicy::none();
    try {
      const SrPair pair = make_sr_pair(spec, assets, &realized[i], options);
      write_wav(pair.lr_input, fs::path(a.out) / "lr" / ids[i], encoding);
      write_wav(pair.hr_target, fs::path(a.out) / "hr" / ids[i], encoding);
    } catch (const std::exception& e) {
      errors[i] = e.what();
    }
  });

  std::vector<MixtureSpec> written;
  std::size_t failed = 0;
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (!errors[i].empty()) {
      ++failed;
      err << "error: " << ids[i] << ": " << errors[i] << "\n";
    } else {
      written.push_back(realized[i]);
    }
  }
  if (!written.empty()) save_manifest(written, fs::path(a.out) / "manifest.jsonl");
  out << "wrote " << written.size() << " of " << ids.size() << " pairs to " << a.out << "\n";
  if (written.empty() && failed > 0) {
    // Surface the shared cause, e.g. every input at the wrong rate.
    return kDataError;
  }
  return batch_exit(written.size(), failed);
}

// ---------------------------------------------------------------------------
// loudness

int cmd_loudness(const std::string& in, std::ostream& out, std::ostream& err) {
  std::vector<fs::path> files;
  const bool dir = fs::is_directory(in);
  if (dir) {
    for (const auto& rel : list_wavs(in)) files.push_back(fs::path(in) / rel);
    if (files.empty()) fail(Errc::EmptyInput, "no WAV files under " + in);
  } else {
    files.push_back(in);
  }
  std::size_t ok = 0, failed = 0;
  double sum = 0.0;
  char buf[64];
  for (const auto& f : files) {
    const std::string name = dir ? fs::relative(f, in).generic_string() : f.string();
    try {
      const Score s = loudness_lufs(read_wav(f));
      std::snprintf(buf, sizeof buf, "%.2f", s.value);
      out << name << "\t" << buf << " LUFS\n";
      sum += s.value;
      ++ok;
    } catch (const Error& e) {
      ++failed;
      if (e.code() == Errc::SilentOrGatedOut) {
        out << name << "\tgated-out\n";
      } else {
        out << name << "\terror\n";
        err << "error: " << name << ": " << e.what() << "\n";
      }
    }
  }
  if (dir && ok > 0) {
    std::snprintf(buf, sizeof buf, "%.2f", sum / static_cast<double>(ok));
    out << "mean\t" << buf << " LUFS\n";
  }
  return batch_exit(ok, failed);
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Speech benchmark toolkit: objective metrics, data simulation and loudness", "voicebench"};
  app.set_version_flag("--version", std::string(toolkit_version()));
  app.require_subcommand(1);
  const unsigned workers = default_workers();

  ScoreArgs score;
  score.workers = workers;
  auto* sc = app.add_subcommand("score", "Score estimates against references");
  sc->add_option("--ref", score.ref, "Reference file or directory")->required();
  sc->add_option("--est", score.est, "Estimate file or directory")->required();
  sc->add_option("--mix", score.mix, "Unprocessed mixture file or directory (for si_snri)");
  sc->add_option("--metrics", score.metrics, "Comma-separated metric names")->capture_default_str();
  sc->add_option("--sample-rate", score.sample_rate, "Resample both signals to this rate");
  sc->add_flag("--allow-resample", score.allow_resample, "Resample estimates to the reference rate");
  sc->add_option("--pairs", score.pairs, "TSV of ref<TAB>est relative paths");
  sc->add_option("--workers", score.workers, "Worker threads")->capture_default_str();
  sc->add_option("--out", score.out, "Summary output path (default stdout)");
  sc->add_option("--per-utt", score.per_utt, "Per-utterance output (.jsonl or .csv)");
  sc->add_option("--format", score.format, "csv, json or markdown")->capture_default_str();
  sc->add_option("--dataset", score.dataset, "Dataset tag for the summary");
  sc->add_option("--model", score.model, "Model tag for the summary");

  CompareArgs compare;
  compare.workers = workers;
  auto* cc = app.add_subcommand("compare", "Permutation-invariant scoring of separated sources");
  cc->add_option("--refs", compare.refs, "Directory with s1, s2, ... subdirectories")->required();
  cc->add_option("--ests", compare.ests, "Estimate directory with the same layout")->required();
  cc->add_option("--mix", compare.mix, "Mixture directory, enables SI-SNRi");
  cc->add_option("--metric", compare.metric, "si_snr or snr")->capture_default_str();
  cc->add_option("--workers", compare.workers, "Worker threads")->capture_default_str();
  cc->add_option("--out", compare.out, "Summary output path (default stdout)");
  cc->add_option("--per-utt", compare.per_utt, "Per-utterance JSONL path");
  cc->add_option("--format", compare.format, "csv, json or markdown")->capture_default_str();

  SimulateArgs sim;
  sim.workers = workers;
  auto* sm = app.add_subcommand("simulate", "Build a synthetic dataset from a recipe");
  sm->add_option("--recipe", sim.recipe, "Recipe JSON file")->required();
  sm->add_option("--corpus", sim.corpus, "Corpus root as kind=dir (kind: speech, noise, rir)")->required();
  sm->add_option("--out", sim.out, "Output directory")->required();
  sm->add_option("--workers", sim.workers, "Worker threads")->capture_default_str();
  sm->add_flag("--dry-run", sim.dry_run, "Write the manifest only");
  sm->add_option("--speaker-map", sim.speaker_map, "TSV asset_id<TAB>speaker");
  sm->add_option("--asset-scores", sim.scores, "TSV asset_id<TAB>score");

  RirArgs rir;
  auto* rc = app.add_subcommand("rir", "Generate a room impulse response");
  rc->add_option("--room", rir.room, "Room size LxWxH in metres")->capture_default_str();
  rc->add_option("--src", rir.src, "Source position x,y,z")->capture_default_str();
  rc->add_option("--mic", rir.mic, "Microphone position x,y,z")->capture_default_str();
  rc->add_option("--rt60", rir.rt60, "Target RT60 in seconds")->capture_default_str();
  rc->add_option("--order", rir.order, "Maximum reflection order, -1 for all")->capture_default_str();
  rc->add_option("--fs", rir.fs, "Sample rate")->capture_default_str();
  rc->add_option("--len", rir.len, "Length in samples")->capture_default_str();
  rc->add_flag("--anechoic", rir.anechoic, "Direct path only");
  rc->add_flag("--no-highpass", rir.no_highpass, "Skip the 100 Hz high-pass");
  rc->add_option("--encoding", rir.encoding, "pcm16, pcm24, pcm32, float32 or float64")->capture_default_str();
  rc->add_option("--out", rir.out, "Output WAV")->required();

  SrArgs sr;
  sr.workers = workers;
  auto* sp = app.add_subcommand("srpairs", "Make low-pass/full-band pairs from 48 kHz audio");
  sp->add_option("--in", sr.in, "Directory of 48 kHz WAV files")->required();
  sp->add_option("--cutoff-range", sr.cutoff_range, "lo,hi cutoff in Hz")->capture_default_str();
  sp->add_option("--seed", sr.seed, "Seed")->capture_default_str();
  sp->add_option("--out", sr.out, "Output directory")->required();
  sp->add_option("--workers", sr.workers, "Worker threads")->capture_default_str();
  sp->add_option("--encoding", sr.encoding, "Output encoding")->capture_default_str();

  std::string loud_in;
  auto* lc = app.add_subcommand("loudness", "Integrated loudness in LUFS");
  lc->add_option("--in", loud_in, "WAV file or directory")->required();

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (sc->parsed()) return cmd_score(score, out, err);
    if (cc->parsed()) return cmd_compare(compare, out, err);
    if (sm->parsed()) return cmd_simulate(sim, out, err);
    if (rc->parsed()) return cmd_rir(rir, out, err);
    if (sp->parsed()) return cmd_srpairs(sr, out, err);
    if (lc->parsed()) return cmd_loudness(loud_in, out, err);
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return exit_code_for(e.code());
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kDataError;
  }
  return kUsage;
}

}  // namespace voicebench::cli
