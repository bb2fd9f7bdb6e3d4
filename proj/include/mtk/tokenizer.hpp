#pragma once

#include <array>
#include <bitset>
#include <cstddef>
#include <limits>
#include <optional>
#include <vector>

#include "mtk/note.hpp"
#include "mtk/vocabulary.hpp"

namespace mtk {

inline constexpr std::size_t kSingleChannelLength = 1024;
inline constexpr std::size_t kMultiChannelLength = 256;
inline constexpr std::size_t kUnlimitedLength = std::numeric_limits<std::size_t>::max();

struct TieNote {
  int program = 0;
  int pitch = 0;
  friend auto operator<=>(const TieNote&, const TieNote&) = default;
};

/// Notes overlapping one 2.048 s window. Non-drum notes whose onset precedes
/// start_s are tie notes and must be listed in tie_notes.
struct Segment {
  double start_s = 0.0;
  double duration_s = kSegmentSeconds;
  std::vector<Note> notes;
  std::vector<TieNote> tie_notes;

  double end_s() const { return start_s + duration_s; }
};

/// Selects the notes of `notes` that overlap [start_s, start_s + 2.048) and
/// derives the tie list.
Segment make_segment(const std::vector<Note>& notes, double start_s);

struct TokenSequence {
  std::vector<TokenId> ids;
  std::optional<int> channel;
  std::size_t length_limit = kSingleChannelLength;
};

struct TokenizeResult {
  TokenSequence sequence;
  std::size_t truncated_events = 0;
  std::size_t truncated_tokens = 0;
  /// Token count of the untruncated encoding including EOS, excluding PAD.
  std::size_t full_length = 0;
};

/// Encodes a segment as: tie section (program/pitch pairs, then
/// TIE_SECTION_END), time-ordered events with run-length-encoded shift,
/// program and velocity tokens, EOS, then PAD up to `length_limit`. Whole
/// events are dropped from the tail when the limit is hit.
/// Throws ContractError for notes outside the window or an inconsistent tie
/// list.
TokenizeResult tokenize_segment(const Segment& seg, const Vocabulary& vocab,
                                std::size_t length_limit = kSingleChannelLength);

struct OpenNote {
  double onset_s = 0.0;
  int pitch = 0;
  int program = 0;
  friend bool operator==(const OpenNote&, const OpenNote&) = default;
};

struct ClosedTie {
  int program = 0;
  int pitch = 0;
  double offset_s = 0.0;
  friend bool operator==(const ClosedTie&, const ClosedTie&) = default;
};

struct DecodedSegment {
  /// Notes with onset and offset inside the segment, plus drum notes.
  std::vector<Note> notes;
  /// Onsets inside the segment whose offset did not appear.
  std::vector<OpenNote> continuations;
  /// Tie section entries in sequence order.
  std::vector<TieNote> ties;
  /// Tie notes whose offset appears inside the segment.
  std::vector<ClosedTie> closed_ties;
};

/// Inverse of tokenize_segment. A velocity-0 pitch closes the most recently
/// opened note with the same program and pitch. Throws DecodeError naming the
/// offending token index.
DecodedSegment detokenize(const TokenSequence& tokens, const Vocabulary& vocab,
                          double segment_start_s = 0.0);

using ChannelSet = std::bitset<kChannelCount>;

struct MultiChannelTargets {
  std::array<TokenizeResult, kChannelCount> channels;
  ChannelSet annotated;
};

/// One sequence per instrument channel. Channels outside `annotated` are all
/// PAD so their loss can be masked. Unmapped programs are not represented.
MultiChannelTargets build_multichannel_targets(
    const Segment& seg, const InstrumentGroupMap& map, const ChannelSet& annotated,
    const Vocabulary& vocab, std::size_t length_limit = kMultiChannelLength);

inline ChannelSet all_channels() { return ChannelSet{}.set(); }

struct TruncationReport {
  std::size_t dropped_tokens = 0;
  std::size_t total_tokens = 0;
  double rate = 0.0;
  /// One entry per channel for multi-channel targets, one entry otherwise.
  std::vector<double> per_channel_rate;
  std::vector<std::size_t> per_channel_dropped;
  std::vector<std::size_t> per_channel_total;
};

/// dropped_tokens / total_tokens over a corpus. Throws ContractError on an
/// empty corpus.
TruncationReport truncation_loss_rate(const std::vector<Segment>& corpus, std::size_t length_limit,
                                      const Vocabulary& vocab, bool multi_channel = false,
                                      const InstrumentGroupMap& map = InstrumentGroupMap::standard());

}  // namespace mtk
