#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "mtk/augmentation.hpp"
#include "mtk/error.hpp"
#include "mtk/metrics.hpp"
#include "mtk/midi.hpp"
#include "mtk/note.hpp"
#include "mtk/ptf/param_count.hpp"
#include "mtk/sampling.hpp"
#include "mtk/token_io.hpp"
#include "mtk/tokenizer.hpp"

namespace {

using nlohmann::ordered_json;
namespace fs = std::filesystem;

constexpr const char* kVersion = "0.1.0";
constexpr int kExitError = 2;
constexpr int kExitUsage = 64;

std::vector<std::uint8_t> read_bytes(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw mtk::Error("cannot open " + path);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

/// MIDI when the file starts with MThd, notes JSONL otherwise.
std::vector<mtk::Note> read_notes_any(const std::string& path) {
  const auto bytes = read_bytes(path);
  if (mtk::looks_like_midi(bytes)) return mtk::parse_midi(bytes);
  std::istringstream is(std::string(bytes.begin(), bytes.end()));
  return mtk::read_notes_jsonl(is);
}

void emit(const ordered_json& j, const std::string& path = "") {
  const std::string text = j.dump(2) + "\n";
  if (!path.empty()) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw mtk::Error("cannot write " + path);
    out << text;
  }
  std::cout << text;
}

ordered_json error_json(const std::string& type, const std::string& message) {
  return {{"error", {{"type", type}, {"message", message}}}};
}

// ---------------------------------------------------------------------------
// tokenize / detokenize

struct TokenizeArgs {
  std::string vocab = "full_plus";
  std::string channels = "single";
  double segment_start = 0.0;
  std::size_t n = 0;
  std::vector<int> annotated;
  std::string input;
  std::string output;
};

void run_tokenize(const TokenizeArgs& a) {
  const mtk::Vocabulary vocab(mtk::parse_vocab_variant(a.vocab));
  const bool multi = a.channels == "multi";
  const std::size_t n = a.n ? a.n : (multi ? mtk::kMultiChannelLength : mtk::kSingleChannelLength);
  const mtk::Segment seg = mtk::make_segment(read_notes_any(a.input), a.segment_start);

  mtk::TokenFile file;
  file.vocab = vocab.variant();
  file.length_limit = n;
  file.segment_start_s = a.segment_start;
  ordered_json summary;
  summary["vocab"] = a.vocab;
  summary["channels"] = a.channels;
  summary["n"] = n;
  summary["notes"] = seg.notes.size();
  summary["ties"] = seg.tie_notes.size();
  std::vector<std::size_t> full_lengths;
  if (multi) {
    mtk::ChannelSet annotated;
    if (a.annotated.empty()) annotated = mtk::all_channels();
    for (int c : a.annotated) {
      if (c < 0 || c >= mtk::kChannelCount)
        throw mtk::ContractError("annotated channel " + std::to_string(c) + " outside [0, 12]");
      annotated.set(static_cast<std::size_t>(c));
    }
    mtk::MultiChannelTargets t = mtk::build_multichannel_targets(
        seg, mtk::InstrumentGroupMap::standard(), annotated, vocab, n);
    file.annotated = annotated;
    for (auto& r : t.channels) {
      file.sequences.push_back(std::move(r.sequence));
      file.truncated_events.push_back(r.truncated_events);
      full_lengths.push_back(r.full_length);
    }
  } else {
    mtk::TokenizeResult r = mtk::tokenize_segment(seg, vocab, n);
    file.sequences.push_back(std::move(r.sequence));
    file.truncated_events.push_back(r.truncated_events);
    full_lengths.push_back(r.full_length);
  }
  mtk::write_token_file(a.output, file);
  summary["full_length"] = full_lengths;
  summary["truncated_events"] = file.truncated_events;
  emit(summary);
}

void run_detokenize(const std::string& input, const std::string& output) {
  const mtk::TokenFile file = mtk::read_token_file(input);
  const mtk::Vocabulary vocab(file.vocab);
  std::vector<mtk::Note> notes;
  std::size_t continuations = 0, ties = 0, closed_ties = 0;
  const bool multi = file.sequences.size() == static_cast<std::size_t>(mtk::kChannelCount);
  std::size_t decoded = 0;
  for (std::size_t c = 0; c < file.sequences.size(); ++c) {
    if (multi && !file.annotated.test(c)) continue;  // all PAD
    const mtk::TokenSequence& s = file.sequences[c];
    ++decoded;
    const mtk::DecodedSegment d = mtk::detokenize(s, vocab, file.segment_start_s);
    notes.insert(notes.end(), d.notes.begin(), d.notes.end());
    continuations += d.continuations.size();
    ties += d.ties.size();
    closed_ties += d.closed_ties.size();
  }
  std::sort(notes.begin(), notes.end(), mtk::note_less);
  mtk::write_notes_jsonl_file(output, notes);
  ordered_json summary;
  summary["sequences"] = file.sequences.size();
  summary["decoded"] = decoded;
  summary["notes"] = notes.size();
  summary["continuations"] = continuations;
  summary["ties"] = ties;
  summary["closed_ties"] = closed_ties;
  emit(summary);
}

// ---------------------------------------------------------------------------
// augment

struct AugmentArgs {
  std::string manifest;
  std::size_t cache_size = 0;
  std::size_t count = 0;
  double p_intra = 0.7;
  double tau = 0.3;
  std::size_t max_iter = 5;
  std::size_t max_len = 1024;
  double p_singing = 0.7;
  std::uint64_t seed = 0;
  unsigned threads = 1;
  std::string stats;
  std::string out_dir;
};

std::vector<float> read_f32(const std::string& path) {
  const auto bytes = read_bytes(path);
  if (bytes.size() % 4 != 0) throw mtk::ContractError(path + " is not a whole number of f32 samples");
  std::vector<float> audio(bytes.size() / 4);
  for (std::size_t i = 0; i < audio.size(); ++i) {
    const std::uint32_t bits = static_cast<std::uint32_t>(bytes[4 * i]) |
                               static_cast<std::uint32_t>(bytes[4 * i + 1]) << 8 |
                               static_cast<std::uint32_t>(bytes[4 * i + 2]) << 16 |
                               static_cast<std::uint32_t>(bytes[4 * i + 3]) << 24;
    std::memcpy(&audio[i], &bits, 4);
  }
  return audio;
}

void write_f32(const std::string& path, const std::vector<float>& audio) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw mtk::Error("cannot write " + path);
  for (float x : audio) {
    std::uint32_t bits;
    std::memcpy(&bits, &x, 4);
    const char b[4] = {static_cast<char>(bits & 0xff), static_cast<char>((bits >> 8) & 0xff),
                       static_cast<char>((bits >> 16) & 0xff), static_cast<char>(bits >> 24)};
    out.write(b, 4);
  }
}

/// Manifest: JSONL, one stem per line with segment_id, dataset, stem_id,
/// notes (inline array) or notes_path, optional audio_path (raw f32 LE) and
/// is_drum. Relative paths resolve against the manifest directory.
mtk::SegmentCache::Pool read_manifest(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw mtk::Error("cannot open " + path);
  const fs::path base = fs::path(path).parent_path();
  auto resolve = [&](const std::string& p) { return (fs::path(p).is_absolute() ? fs::path(p) : base / p).string(); };

  mtk::SegmentCache::Pool pool;
  std::map<std::string, std::size_t> index;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      const auto j = nlohmann::json::parse(line);
      const std::string seg_id = j.at("segment_id");
      std::vector<mtk::Note> notes;
      if (j.contains("notes")) {
        std::ostringstream os;
        for (const auto& n : j.at("notes")) os << n.dump() << '\n';
        std::istringstream is(os.str());
        notes = mtk::read_notes_jsonl(is);
      } else {
        notes = read_notes_any(resolve(j.at("notes_path")));
      }
      std::vector<float> audio;
      if (j.contains("audio_path")) audio = read_f32(resolve(j.at("audio_path")));
      mtk::StemSegment stem = mtk::make_stem(j.at("stem_id"), j.at("dataset"), std::move(audio),
                                             std::move(notes), j.value("is_drum", false));
      auto [it, fresh] = index.emplace(seg_id, pool.size());
      if (fresh) pool.push_back({seg_id, {}});
      pool[it->second].stems.push_back(std::move(stem));
    } catch (const nlohmann::json::exception& e) {
      throw mtk::ContractError("manifest line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  return pool;
}

void run_augment(const AugmentArgs& a) {
  mtk::SegmentCache::Pool pool = read_manifest(a.manifest);
  if (a.cache_size > 0) {
    if (a.cache_size > pool.size())
      throw mtk::ContractError("cache size " + std::to_string(a.cache_size) + " exceeds the " +
                               std::to_string(pool.size()) + " segments in the manifest");
    pool.resize(a.cache_size);
  }
  const mtk::SegmentCache cache(std::move(pool), 1);
  mtk::AugmentParams params;
  params.p_intra = a.p_intra;
  params.tau = a.tau;
  params.max_iterations = a.max_iter;
  params.max_length = a.max_len;
  mtk::MixingPolicy policy;
  policy.p_singing = a.p_singing;
  const std::size_t count = a.count ? a.count : cache.size();
  const auto examples = mtk::augment_batch(cache, params, policy, a.seed, count, a.threads);

  const auto snapshot = cache.snapshot();
  if (!a.out_dir.empty()) fs::create_directories(a.out_dir);
  ordered_json items = ordered_json::array();
  std::vector<std::size_t> hist(a.max_iter + 1, 0);
  for (std::size_t i = 0; i < examples.size(); ++i) {
    const mtk::MixedExample& ex = examples[i];
    char stem[32];
    std::snprintf(stem, sizeof stem, "mix_%06zu", i);
    if (!a.out_dir.empty()) {
      write_f32((fs::path(a.out_dir) / (std::string(stem) + ".f32")).string(), ex.audio);
      mtk::write_notes_jsonl_file((fs::path(a.out_dir) / (std::string(stem) + ".jsonl")).string(),
                                  ex.notes);
    }
    ++hist[std::min(ex.merges, a.max_iter)];
    ordered_json merged = ordered_json::array();
    for (std::size_t m : ex.merged_segments) merged.push_back((*snapshot)[m].segment_id);
    ordered_json stems = ordered_json::array();
    for (const auto& s : ex.stems) stems.push_back(s.dataset_id + "/" + s.stem_id);
    items.push_back({{"name", stem},
                     {"base", (*snapshot)[ex.base_index].segment_id},
                     {"merges", ex.merges},
                     {"iterations", ex.iterations},
                     {"merged", merged},
                     {"stems", stems},
                     {"notes", ex.notes.size()},
                     {"external_token_length", ex.external_token_length},
                     {"gain", ex.gain}});
  }
  ordered_json stats;
  stats["seed"] = a.seed;
  stats["count"] = count;
  stats["params"] = {{"p_intra", a.p_intra},
                     {"tau", a.tau},
                     {"max_iter", a.max_iter},
                     {"max_len", a.max_len},
                     {"p_singing", a.p_singing}};
  stats["merge_histogram"] = hist;
  stats["examples"] = items;
  if (!a.stats.empty()) {
    std::ofstream out(a.stats, std::ios::binary);
    if (!out) throw mtk::Error("cannot write " + a.stats);
    out << stats.dump(2) << '\n';
  }
  emit({{"count", count}, {"merge_histogram", hist}});
}

// ---------------------------------------------------------------------------
// evaluate

ordered_json score_json(const mtk::EvalResult& r) {
  ordered_json j;
  j["precision"] = r.precision;
  j["recall"] = r.recall;
  j["f1"] = r.f1;
  j["matched"] = r.matched;
  j["n_ref"] = r.n_ref;
  j["n_est"] = r.n_est;
  if (!r.per_instrument.empty()) {
    j["macro_f1"] = r.macro_f1;
    ordered_json per = ordered_json::object();
    const auto& names = mtk::InstrumentGroupMap::standard().names;
    for (const auto& [ch, s] : r.per_instrument)
      per[ch < 0 ? std::string("unmapped") : names[static_cast<std::size_t>(ch)]] = {{"channel", ch},   {"precision", s.precision},
                                                   {"recall", s.recall}, {"f1", s.f1},
                                                   {"matched", s.matched}, {"n_ref", s.n_ref},
                                                   {"n_est", s.n_est}};
    j["per_instrument"] = per;
  }
  return j;
}

void run_evaluate(const std::string& ref_path, const std::string& est_path,
                  const std::string& metric, double tol, const std::string& report) {
  const auto ref = read_notes_any(ref_path);
  const auto est = read_notes_any(est_path);
  ordered_json out;
  out["metric"] = metric;
  out["onset_tolerance_s"] = tol;
  if (metric == "inst_onset") {
    out["result"] = score_json(mtk::instrument_note_onset_f1(ref, est, mtk::InstrumentGroupMap::standard(), tol));
  } else if (metric == "agnostic") {
    mtk::MatchConfig cfg;
    cfg.onset_tolerance_s = tol;
    const auto r = mtk::agnostic_f1(ref, est, cfg);
    out["result"] = {{"onset", score_json(r.onset)}, {"offset", score_json(r.offset)}};
  } else {
    out["result"] = score_json(mtk::multi_f1(ref, est, mtk::InstrumentGroupMap::standard(), tol));
  }
  emit(out, report);
}

// ---------------------------------------------------------------------------
// sample-weights / param-count

void run_sample_weights(const std::string& sizes_path, double temperature, const std::string& preset) {
  mtk::DatasetWeights w;
  ordered_json out;
  if (!preset.empty()) {
    if (preset != "rebalanced") throw mtk::ContractError("unknown preset '" + preset + "'");
    w = mtk::default_rebalanced_weights();
    out["preset"] = preset;
  } else {
    if (sizes_path.empty()) throw mtk::ContractError("either --sizes or --preset is required");
    std::ifstream in(sizes_path);
    if (!in) throw mtk::Error("cannot open " + sizes_path);
    std::vector<std::pair<std::string, double>> sizes;
    try {
      const auto j = ordered_json::parse(in);
      if (j.is_object()) {
        for (const auto& [k, v] : j.items()) sizes.emplace_back(k, v.get<double>());
      } else {
        for (const auto& e : j) sizes.emplace_back(e.at("dataset"), e.at("size").get<double>());
      }
    } catch (const nlohmann::json::exception& e) {
      throw mtk::ContractError("bad sizes file " + sizes_path + ": " + e.what());
    }
    w = mtk::temperature_weights(sizes, temperature);
    out["temperature"] = temperature;
  }
  ordered_json weights = ordered_json::object();
  for (const auto& [id, v] : w.entries()) weights[id] = v;
  out["weights"] = weights;
  emit(out);
}

void run_param_count(const std::string& model) {
  const auto cfg = mtk::ptf::ModelConfig::preset(model);
  const auto c = mtk::ptf::count_parameters(cfg);
  ordered_json out;
  out["model"] = model;
  out["total"] = c.total;
  out["encoder"] = c.encoder;
  out["decoder"] = c.decoder;
  out["active"] = c.active;
  ordered_json parts = ordered_json::object();
  for (const auto& [name, n] : c.components) parts[name] = n;
  out["components"] = parts;
  emit(out);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Music transcription toolkit"};
  app.set_version_flag("--version", std::string("mtk ") + kVersion + " (config schema " +
                                        mtk::ptf::config_schema_hash() + ")");
  app.require_subcommand(1);
  app.failure_message(CLI::FailureMessage::help);

  TokenizeArgs tok;
  auto* tokenize = app.add_subcommand("tokenize", "Encode one segment as tokens");
  tokenize->add_option("--vocab", tok.vocab)->check(CLI::IsMember({"midi_plus", "full_plus"}));
  tokenize->add_option("--channels", tok.channels)->check(CLI::IsMember({"single", "multi"}));
  tokenize->add_option("--segment-start", tok.segment_start, "Segment start in seconds");
  tokenize->add_option("--n", tok.n, "Sequence length (1024 single, 256 multi)")->check(CLI::PositiveNumber);
  tokenize->add_option("--annotated", tok.annotated, "Annotated channels (multi)")->delimiter(',');
  tokenize->add_option("input", tok.input, "MIDI or notes JSONL")->required();
  tokenize->add_option("output", tok.output, "Token file")->required();

  std::string detok_in, detok_out;
  auto* detokenize = app.add_subcommand("detokenize", "Decode a token file to notes JSONL");
  detokenize->add_option("input", detok_in)->required();
  detokenize->add_option("output", detok_out)->required();

  AugmentArgs aug;
  auto* augment = app.add_subcommand("augment", "Cross-dataset stem augmentation");
  augment->add_option("--manifest", aug.manifest, "Stem manifest (JSONL)")->required();
  augment->add_option("--cache-size", aug.cache_size);
  augment->add_option("--count", aug.count, "Examples to produce (default: cache size)");
  augment->add_option("--p-intra", aug.p_intra);
  augment->add_option("--tau", aug.tau);
  augment->add_option("--max-iter", aug.max_iter);
  augment->add_option("--max-len", aug.max_len);
  augment->add_option("--p-singing", aug.p_singing);
  augment->add_option("--seed", aug.seed)->required();
  augment->add_option("--threads", aug.threads)->check(CLI::PositiveNumber);
  augment->add_option("--stats", aug.stats, "Merge statistics JSON");
  augment->add_option("--out-dir", aug.out_dir, "Mixed audio (.f32) and notes (.jsonl)");

  std::string ref, est, metric = "multi", report;
  double onset_tol = mtk::kDefaultOnsetTolerance;
  auto* evaluate = app.add_subcommand("evaluate", "Score estimated notes against a reference");
  evaluate->add_option("--ref", ref)->required();
  evaluate->add_option("--est", est)->required();
  evaluate->add_option("--metric", metric)->check(CLI::IsMember({"inst_onset", "agnostic", "multi"}));
  evaluate->add_option("--onset-tol", onset_tol)->check(CLI::PositiveNumber);
  evaluate->add_option("--report", report);

  std::string sizes, preset;
  double temperature = 1.0;
  auto* sample_weights = app.add_subcommand("sample-weights", "Dataset sampling weights");
  auto* sizes_opt = sample_weights->add_option("--sizes", sizes, "JSON object of dataset sizes");
  sample_weights->add_option("--temperature", temperature)->check(CLI::PositiveNumber);
  sample_weights->add_option("--preset", preset)->check(CLI::IsMember({"rebalanced"}))->excludes(sizes_opt);

  std::string model;
  auto* param_count = app.add_subcommand("param-count", "Model parameter totals");
  param_count->add_option("--model", model)->required()->check(CLI::IsMember({"ymt3", "yptf", "yptf_moe"}));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (*tokenize) run_tokenize(tok);
    else if (*detokenize) run_detokenize(detok_in, detok_out);
    else if (*augment) run_augment(aug);
    else if (*evaluate) run_evaluate(ref, est, metric, onset_tol, report);
    else if (*sample_weights) run_sample_weights(sizes, temperature, preset);
    else if (*param_count) run_param_count(model);
  } catch (const mtk::MidiParseError& e) {
    auto j = error_json("midi_parse", e.what());
    j["error"]["offset"] = e.offset();
    std::cerr << j.dump() << '\n';
    return kExitError;
  } catch (const mtk::DecodeError& e) {
    auto j = error_json("decode", e.what());
    j["error"]["token_index"] = e.index();
    std::cerr << j.dump() << '\n';
    return kExitError;
  } catch (const mtk::ContractError& e) {
    std::cerr << error_json("contract", e.what()).dump() << '\n';
    return kExitError;
  } catch (const mtk::Error& e) {
    std::cerr << error_json("io", e.what()).dump() << '\n';
    return kExitError;
  } catch (const std::exception& e) {
    std::cerr << error_json("internal", e.what()).dump() << '\n';
    return kExitError;
  }
  return 0;
}
