#include "mtk/augmentation.hpp"

#include <algorithm>
#include <cmath>
#include <thread>

#include "mtk/error.hpp"
#include "mtk/tokenizer.hpp"

namespace mtk {

StemSegment make_stem(std::string stem_id, std::string dataset_id, std::vector<float> audio,
                      std::vector<Note> notes, bool is_drum_stem, const InstrumentGroupMap& map) {
  StemSegment s;
  s.stem_id = std::move(stem_id);
  s.dataset_id = std::move(dataset_id);
  s.audio = audio.empty() ? std::vector<float>(kSegmentFrames, 0.0f) : std::move(audio);
  s.notes = std::move(notes);
  s.is_drum_stem = is_drum_stem;
  for (const Note& n : s.notes) {
    const int c = channel_of(n, map);
    if (c != kUnmapped) s.program_set.insert(c);
    if (n.is_drum) s.is_drum_stem = true;
  }
  s.has_singing = s.program_set.count(map.singing_channel) > 0;
  validate_stem(s);
  return s;
}

void validate_stem(const StemSegment& stem) {
  if (stem.audio.size() != kSegmentFrames)
    throw ContractError("stem '" + stem.stem_id + "' audio must have exactly 32767 frames");
  for (const Note& n : stem.notes) validate_note(n);
}

// ---------------------------------------------------------------------------

SegmentCache::SegmentCache(Pool segments, std::size_t batch_size) : batch_size_(batch_size) {
  validate(segments, batch_size);
  pool_ = std::make_shared<const Pool>(std::move(segments));
}

void SegmentCache::validate(const Pool& segments, std::size_t batch_size) {
  if (segments.empty()) throw ContractError("segment cache is empty");
  if (batch_size == 0) throw ContractError("batch size must be positive");
  if (segments.size() < batch_size)
    throw ContractError("segment cache holds fewer segments than the batch size");
  for (const SourceSegment& s : segments)
    for (const StemSegment& stem : s.stems) validate_stem(stem);
}

std::shared_ptr<const SegmentCache::Pool> SegmentCache::snapshot() const {
  std::shared_lock lock(mutex_);
  return pool_;
}

void SegmentCache::refill(Pool segments) {
  validate(segments, batch_size_);
  auto next = std::make_shared<const Pool>(std::move(segments));
  std::unique_lock lock(mutex_);
  pool_ = std::move(next);
}

std::size_t SegmentCache::size() const { return snapshot()->size(); }

void MixingPolicy::validate() const {
  if (!(p_singing >= 0.0 && p_singing <= 1.0)) throw ContractError("p_singing must be in [0, 1]");
  if (max_subunit_stems < 1) throw ContractError("max_subunit_stems must be at least 1");
}

void AugmentParams::validate() const {
  if (!(p_intra >= 0.0 && p_intra <= 1.0)) throw ContractError("p_intra must be in [0, 1]");
  if (!(tau > 0.0)) throw ContractError("tau must be positive");
  if (max_length < 1) throw ContractError("max_length must be at least 1");
  if (max_pitch_shift < 0) throw ContractError("pitch shift range must be non-negative");
}

// ---------------------------------------------------------------------------

std::vector<StemSegment> intra_stem_select(const std::vector<StemSegment>& stems, double p,
                                           Rng& rng) {
  if (!(p >= 0.0 && p <= 1.0)) throw ContractError("selection probability must be in [0, 1]");
  if (stems.size() <= 1) return stems;
  constexpr int kMaxDraws = 8;
  for (int draw = 0; draw < kMaxDraws; ++draw) {
    std::vector<StemSegment> kept;
    for (const StemSegment& s : stems)
      if (rng.bernoulli(p)) kept.push_back(s);
    if (!kept.empty()) return kept;
  }
  return stems;
}

std::vector<StemSegment> intra_stem_select(const std::vector<StemSegment>& stems, double p,
                                           std::uint64_t seed) {
  Rng rng(seed);
  return intra_stem_select(stems, p, rng);
}

std::vector<StemSegment> filter_policy(const std::vector<StemSegment>& candidates,
                                       const std::vector<StemSegment>& current,
                                       const MixingPolicy& policy, Rng& rng) {
  policy.validate();
  std::set<int> channels;
  bool has_drums = false;
  for (const StemSegment& s : current) {
    channels.insert(s.program_set.begin(), s.program_set.end());
    has_drums = has_drums || s.is_drum_stem;
  }
  std::size_t total = current.size();

  std::vector<StemSegment> kept;
  for (const StemSegment& s : candidates) {
    if (total >= policy.max_subunit_stems) break;
    if (!policy.allow_instrument_overlap &&
        std::any_of(s.program_set.begin(), s.program_set.end(),
                    [&](int c) { return channels.count(c) > 0; }))
      continue;
    if (!policy.allow_multiple_drums && s.is_drum_stem && has_drums) continue;
    if (s.has_singing && !rng.bernoulli(policy.p_singing)) continue;
    channels.insert(s.program_set.begin(), s.program_set.end());
    has_drums = has_drums || s.is_drum_stem;
    ++total;
    kept.push_back(s);
  }
  return kept;
}

bool satisfies_policy(const std::vector<StemSegment>& stems, const MixingPolicy& policy) {
  if (stems.size() > policy.max_subunit_stems) return false;
  std::size_t drums = 0;
  std::set<int> channels;
  for (const StemSegment& s : stems) {
    drums += s.is_drum_stem ? 1 : 0;
    if (!policy.allow_instrument_overlap)
      for (int c : s.program_set)
        if (!channels.insert(c).second) return false;
  }
  return policy.allow_multiple_drums || drums <= 1;
}

void mix_stems(MixedExample& out) {
  out.audio.assign(kSegmentFrames, 0.0f);
  out.notes.clear();
  for (const StemSegment& s : out.stems) {
    for (std::size_t i = 0; i < kSegmentFrames; ++i) out.audio[i] += s.audio[i];
    out.notes.insert(out.notes.end(), s.notes.begin(), s.notes.end());
  }
  float peak = 0.0f;
  for (float x : out.audio) peak = std::max(peak, std::abs(x));
  out.gain = peak > 1.0f ? 1.0f / peak : 1.0f;
  if (out.gain != 1.0f)
    for (float& x : out.audio) x *= out.gain;
  std::stable_sort(out.notes.begin(), out.notes.end(), note_less);
}

namespace {

std::size_t token_length(const std::vector<Note>& notes) {
  static const Vocabulary vocab(VocabVariant::kFullPlus);
  return tokenize_segment(make_segment(notes, 0.0), vocab, kUnlimitedLength).full_length;
}

}  // namespace

MixedExample cross_stem_augment(std::size_t base_index, const SegmentCache::Pool& pool,
                                const AugmentParams& params, const MixingPolicy& policy,
                                std::uint64_t seed) {
  params.validate();
  policy.validate();
  if (pool.empty()) throw ContractError("segment cache is empty");
  if (base_index >= pool.size()) throw ContractError("base segment index outside the cache");
  Rng rng(seed);

  MixedExample out;
  out.base_index = base_index;
  const std::vector<StemSegment> base = intra_stem_select(pool[base_index].stems, params.p_intra, rng);

  std::vector<StemSegment> external;
  std::vector<Note> external_notes;
  std::size_t j = 0;
  // Each pass draws the survival variate first so the RNG stream does not
  // depend on which criterion ends the loop. Passes are capped at J so the
  // loop halts even when every sampled segment is filtered to nothing.
  while (out.iterations < params.max_iterations) {
    const double r = rng.uniform();
    if (!(r < std::exp(-params.tau * static_cast<double>(j)))) break;
    if (out.external_token_length >= params.max_length) break;
    if (j >= params.max_iterations) break;
    if (pool.size() < 2) break;
    ++out.iterations;

    std::uint64_t pick = rng.below(pool.size() - 1);
    if (pick >= base_index) ++pick;
    std::vector<StemSegment> current = base;
    current.insert(current.end(), external.begin(), external.end());
    std::vector<StemSegment> kept = filter_policy(pool[pick].stems, current, policy, rng);
    if (kept.empty()) continue;
    for (StemSegment& s : kept) {
      external_notes.insert(external_notes.end(), s.notes.begin(), s.notes.end());
      external.push_back(std::move(s));
    }
    out.merged_segments.push_back(static_cast<std::size_t>(pick));
    ++j;
    out.external_token_length = token_length(external_notes);
  }
  out.merges = j;
  out.stems = base;
  out.stems.insert(out.stems.end(), external.begin(), external.end());
  mix_stems(out);
  return out;
}

MixedExample cross_stem_augment(std::size_t base_index, const SegmentCache& cache,
                                const AugmentParams& params, const MixingPolicy& policy,
                                std::uint64_t seed) {
  const auto pool = cache.snapshot();
  return cross_stem_augment(base_index, *pool, params, policy, seed);
}

std::vector<MixedExample> augment_batch(const SegmentCache& cache, const AugmentParams& params,
                                        const MixingPolicy& policy, std::uint64_t seed,
                                        std::size_t count, unsigned threads) {
  const auto pool = cache.snapshot();
  std::vector<MixedExample> out(count);
  auto work = [&](std::size_t first, std::size_t stride) {
    for (std::size_t i = first; i < count; i += stride)
      out[i] = cross_stem_augment(i % pool->size(), *pool, params, policy, derive_seed(seed, i));
  };
  threads = std::max(1u, threads);
  if (threads == 1) {
    work(0, 1);
    return out;
  }
  std::vector<std::thread> workers;
  std::vector<std::exception_ptr> errors(threads);
  for (unsigned t = 0; t < threads; ++t)
    workers.emplace_back([&, t] {
      try {
        work(t, threads);
      } catch (...) {
        errors[t] = std::current_exception();
      }
    });
  for (std::thread& w : workers) w.join();
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);
  return out;
}

std::vector<Note> pitch_shift_labels(const std::vector<Note>& notes, int semitones,
                                     int max_shift) {
  if (semitones < -max_shift || semitones > max_shift)
    throw ContractError("pitch shift of " + std::to_string(semitones) +
                        " semitones is outside the allowed range");
  std::vector<Note> out;
  out.reserve(notes.size());
  for (Note n : notes) {
    if (!n.is_drum) {
      n.pitch += semitones;
      if (n.pitch < 0 || n.pitch > 127) continue;
    }
    out.push_back(n);
  }
  return out;
}

std::vector<int> assign_shift_groups(std::size_t batch_size, std::uint64_t seed) {
  if (batch_size == 0) throw ContractError("batch size must be positive");
  Rng rng(seed);
  std::vector<int> groups(batch_size);
  for (int& g : groups) g = static_cast<int>(rng.below(5)) - 2;
  return groups;
}

}  // namespace mtk
