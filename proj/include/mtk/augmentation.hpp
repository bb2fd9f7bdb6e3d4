#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <mutex>
#include <set>
#include <shared_mutex>
#include <string>
#include <vector>

#include "mtk/note.hpp"
#include "mtk/random.hpp"

namespace mtk {

inline constexpr std::size_t kSegmentFrames = 32767;
inline constexpr int kSampleRate = 16000;

/// One stem of one segment: audio, annotations and the channels it covers.
/// Note times are relative to the segment start.
struct StemSegment {
  std::string stem_id;
  std::string dataset_id;
  std::vector<float> audio;
  std::vector<Note> notes;
  bool is_drum_stem = false;
  bool has_singing = false;
  std::set<int> program_set;
};

/// Builds a stem and derives program_set / has_singing / is_drum_stem from
/// its notes. Empty audio becomes silence.
StemSegment make_stem(std::string stem_id, std::string dataset_id, std::vector<float> audio,
                      std::vector<Note> notes, bool is_drum_stem = false,
                      const InstrumentGroupMap& map = InstrumentGroupMap::standard());

void validate_stem(const StemSegment& stem);

struct SourceSegment {
  std::string segment_id;
  std::vector<StemSegment> stems;
};

/// Pool of cached segments. Readers take immutable snapshots; refill swaps
/// in a new pool under an exclusive lock.
class SegmentCache {
 public:
  using Pool = std::vector<SourceSegment>;

  SegmentCache(Pool segments, std::size_t batch_size);

  std::shared_ptr<const Pool> snapshot() const;
  void refill(Pool segments);
  std::size_t size() const;
  std::size_t batch_size() const { return batch_size_; }

 private:
  static void validate(const Pool& segments, std::size_t batch_size);

  std::size_t batch_size_;
  mutable std::shared_mutex mutex_;
  std::shared_ptr<const Pool> pool_;
};

struct MixingPolicy {
  bool allow_instrument_overlap = false;
  bool allow_multiple_drums = false;
  std::size_t max_subunit_stems = 12;
  double p_singing = 0.7;

  void validate() const;
};

struct AugmentParams {
  double p_intra = 0.7;
  double tau = 0.3;
  std::size_t max_iterations = 5;  // J
  std::size_t max_length = 1024;   // L
  int max_pitch_shift = 2;

  void validate() const;
};

/// Keeps each stem with probability p. An empty draw is redrawn up to 8
/// times, after which the full set is kept. A single stem is returned as is.
std::vector<StemSegment> intra_stem_select(const std::vector<StemSegment>& stems, double p,
                                           Rng& rng);
std::vector<StemSegment> intra_stem_select(const std::vector<StemSegment>& stems, double p,
                                           std::uint64_t seed);

/// Stems of `candidates` that may join `current` under the policy. Singing
/// stems survive with probability p_singing.
std::vector<StemSegment> filter_policy(const std::vector<StemSegment>& candidates,
                                       const std::vector<StemSegment>& current,
                                       const MixingPolicy& policy, Rng& rng);

/// True when the stem set satisfies the deterministic parts of the policy.
bool satisfies_policy(const std::vector<StemSegment>& stems, const MixingPolicy& policy);

struct MixedExample {
  std::size_t base_index = 0;
  std::vector<StemSegment> stems;
  std::vector<float> audio;
  std::vector<Note> notes;
  std::size_t merges = 0;
  std::size_t iterations = 0;
  std::vector<std::size_t> merged_segments;
  std::size_t external_token_length = 0;
  float gain = 1.0f;
};

/// Sums stem audio at unit gain, peak-normalizes to |x| <= 1 when it clips,
/// and unions the note lists.
void mix_stems(MixedExample& out);

/// Cross-dataset stem augmentation of the segment at `base_index`.
MixedExample cross_stem_augment(std::size_t base_index, const SegmentCache::Pool& pool,
                                const AugmentParams& params, const MixingPolicy& policy,
                                std::uint64_t seed);
MixedExample cross_stem_augment(std::size_t base_index, const SegmentCache& cache,
                                const AugmentParams& params, const MixingPolicy& policy,
                                std::uint64_t seed);

/// Augments `count` elements (base segment i % cache size, RNG stream
/// derived from (seed, i)). Output does not depend on `threads`.
std::vector<MixedExample> augment_batch(const SegmentCache& cache, const AugmentParams& params,
                                        const MixingPolicy& policy, std::uint64_t seed,
                                        std::size_t count, unsigned threads = 1);

/// Shifts non-drum pitches; notes leaving [0, 127] are dropped.
std::vector<Note> pitch_shift_labels(const std::vector<Note>& notes, int semitones,
                                     int max_shift = 2);

/// One semitone group in {-2, ..., +2} per batch element, uniformly.
std::vector<int> assign_shift_groups(std::size_t batch_size, std::uint64_t seed);

}  // namespace mtk
