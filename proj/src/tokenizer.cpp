#include "mtk/tokenizer.hpp"

#include <algorithm>
#include <map>
#include <string>
#include <tuple>

#include "mtk/error.hpp"

namespace mtk {

Segment make_segment(const std::vector<Note>& notes, double start_s) {
  Segment seg;
  seg.start_s = start_s;
  const double end = seg.end_s();
  for (const Note& n : notes) {
    if (n.is_drum) {
      if (n.onset_s >= start_s && n.onset_s < end) seg.notes.push_back(n);
      continue;
    }
    if (n.onset_s < end && n.offset_s > start_s) {
      seg.notes.push_back(n);
      if (n.onset_s < start_s) seg.tie_notes.push_back({n.program, n.pitch});
    }
  }
  std::sort(seg.tie_notes.begin(), seg.tie_notes.end());
  return seg;
}

namespace {

struct Event {
  int bin = 0;
  int program_key = 0;  // 128 for drums
  int velocity = 0;
  int pitch = 0;
};

bool event_less(const Event& a, const Event& b) {
  return std::tie(a.bin, a.program_key, a.velocity, a.pitch) <
         std::tie(b.bin, b.program_key, b.velocity, b.pitch);
}

// Encoder state carried across events for run-length encoding.
struct EncoderState {
  int bin = 0;
  int program = -1;
  int velocity = -1;
};

void append_event(const Event& e, EncoderState& st, std::vector<TokenId>& out) {
  if (e.bin != st.bin) {
    out.push_back(Vocabulary::shift(e.bin));
    st.bin = e.bin;
  }
  const bool drum = e.program_key == 128;
  if (!drum && e.program_key != st.program) {
    out.push_back(Vocabulary::program(e.program_key));
    st.program = e.program_key;
  }
  if (e.velocity != st.velocity) {
    out.push_back(Vocabulary::velocity(e.velocity));
    st.velocity = e.velocity;
  }
  out.push_back(drum ? Vocabulary::drum(e.pitch) : Vocabulary::pitch(e.pitch));
}

void check_window(const Segment& seg) {
  const double start = seg.start_s;
  const double end = seg.end_s();
  if (!(seg.duration_s > 0.0) || seg.duration_s > kSegmentSeconds + 1e-9)
    throw ContractError("segment duration must be in (0, 2.048] s");
  std::vector<TieNote> expected_ties;
  for (const Note& n : seg.notes) {
    validate_note(n);
    if (n.is_drum) {
      if (n.onset_s < start || n.onset_s >= end)
        throw ContractError("drum note onset outside the segment window");
      continue;
    }
    if (n.onset_s >= end || n.offset_s <= start)
      throw ContractError("note does not overlap the segment window");
    if (n.onset_s < start) expected_ties.push_back({n.program, n.pitch});
  }
  std::vector<TieNote> declared = seg.tie_notes;
  std::sort(declared.begin(), declared.end());
  std::sort(expected_ties.begin(), expected_ties.end());
  if (declared != expected_ties)
    throw ContractError("tie list does not match the notes that start before the segment");
}

}  // namespace

TokenizeResult tokenize_segment(const Segment& seg, const Vocabulary& vocab,
                                std::size_t length_limit) {
  check_window(seg);
  if (length_limit < 2) throw ContractError("length limit must be at least 2");

  std::vector<TieNote> ties;
  for (const TieNote& t : seg.tie_notes) ties.push_back({vocab.project_program(t.program), t.pitch});
  std::sort(ties.begin(), ties.end());

  std::vector<Event> events;
  events.reserve(seg.notes.size() * 2);
  for (const Note& n : seg.notes) {
    const double rel_on = n.onset_s - seg.start_s;
    if (n.is_drum) {
      events.push_back({time_to_bin(rel_on), 128, 1, n.pitch});
      continue;
    }
    const int program = vocab.project_program(n.program);
    const bool tie = rel_on < 0.0;
    int on_bin = 0;
    if (!tie) {
      on_bin = time_to_bin(rel_on);
      events.push_back({on_bin, program, 1, n.pitch});
    }
    if (n.offset_s <= seg.end_s()) {
      int off_bin = time_to_bin(n.offset_s - seg.start_s);
      // An onset and its offset never share a bin; bin 205 absorbs the
      // overflow at the window end.
      if (!tie) off_bin = std::max(off_bin, on_bin + 1);
      events.push_back({off_bin, program, 0, n.pitch});
    }
  }
  std::stable_sort(events.begin(), events.end(), event_less);

  // Full (unlimited) encoding, remembering where each unit ends so that
  // truncation can keep a grammatical prefix.
  std::vector<TokenId> full;
  std::vector<std::size_t> tie_ends;
  int tie_program = -1;
  for (const TieNote& t : ties) {
    if (t.program != tie_program) {
      full.push_back(Vocabulary::program(t.program));
      tie_program = t.program;
    }
    full.push_back(Vocabulary::pitch(t.pitch));
    tie_ends.push_back(full.size());
  }
  full.push_back(Vocabulary::kTieSectionEnd);
  const std::size_t tie_section_len = full.size();

  std::vector<std::size_t> event_ends;
  EncoderState st;
  for (const Event& e : events) {
    append_event(e, st, full);
    event_ends.push_back(full.size());
  }

  TokenizeResult result;
  result.full_length = full.size() + 1;  // + EOS
  result.sequence.length_limit = length_limit;
  std::vector<TokenId>& ids = result.sequence.ids;

  if (result.full_length <= length_limit) {
    ids = std::move(full);
  } else if (tie_section_len + 1 <= length_limit) {
    const std::size_t budget = length_limit - 1;
    const auto kept = static_cast<std::size_t>(
        std::upper_bound(event_ends.begin(), event_ends.end(), budget) - event_ends.begin());
    const std::size_t keep_len = kept == 0 ? tie_section_len : event_ends[kept - 1];
    ids.assign(full.begin(), full.begin() + static_cast<std::ptrdiff_t>(keep_len));
    result.truncated_events = events.size() - kept;
  } else {
    // Even the tie section does not fit: keep a prefix of whole tie entries.
    const std::size_t budget = length_limit - 2;
    const auto kept = static_cast<std::size_t>(
        std::upper_bound(tie_ends.begin(), tie_ends.end(), budget) - tie_ends.begin());
    const std::size_t keep_len = kept == 0 ? 0 : tie_ends[kept - 1];
    ids.assign(full.begin(), full.begin() + static_cast<std::ptrdiff_t>(keep_len));
    ids.push_back(Vocabulary::kTieSectionEnd);
    result.truncated_events = events.size() + (ties.size() - kept);
  }
  ids.push_back(Vocabulary::kEos);
  result.truncated_tokens = result.full_length - ids.size();
  if (length_limit != kUnlimitedLength) ids.resize(length_limit, Vocabulary::kPad);
  return result;
}

DecodedSegment detokenize(const TokenSequence& tokens, const Vocabulary& vocab,
                          double segment_start_s) {
  (void)vocab;
  const std::vector<TokenId>& ids = tokens.ids;
  if (tokens.length_limit != kUnlimitedLength && ids.size() > tokens.length_limit)
    throw DecodeError("sequence longer than its length limit", tokens.length_limit);

  DecodedSegment out;
  std::size_t i = 0;

  // Tie section.
  int program = -1;
  bool tie_end_seen = false;
  for (; i < ids.size(); ++i) {
    const DecodedToken t = Vocabulary::decode(ids[i]);
    if (t.type == TokenType::kTieSectionEnd) {
      tie_end_seen = true;
      ++i;
      break;
    }
    if (t.type == TokenType::kProgram) {
      program = t.value;
    } else if (t.type == TokenType::kPitch) {
      if (program < 0) throw DecodeError("tie pitch before any program", i);
      out.ties.push_back({program, t.value});
    } else {
      throw DecodeError("unexpected token in tie section", i);
    }
  }
  if (!tie_end_seen) throw DecodeError("missing TIE_SECTION_END", ids.size());

  // Open notes per (program, pitch), most recent last. A negative onset bin
  // marks a tie note.
  std::map<std::pair<int, int>, std::vector<int>> open;
  for (const TieNote& t : out.ties) open[{t.program, t.pitch}].push_back(-1);

  int bin = 0;
  program = -1;
  int velocity = -1;
  bool eos_seen = false;
  for (; i < ids.size(); ++i) {
    const DecodedToken t = Vocabulary::decode(ids[i]);
    switch (t.type) {
      case TokenType::kShift:
        if (t.value < bin) throw DecodeError("shift moves backwards", i);
        bin = t.value;
        break;
      case TokenType::kProgram:
        program = t.value;
        break;
      case TokenType::kVelocity:
        velocity = t.value;
        break;
      case TokenType::kPitch: {
        if (program < 0) throw DecodeError("pitch before any program", i);
        if (velocity < 0) throw DecodeError("pitch before any velocity", i);
        auto& stack = open[{program, t.value}];
        if (velocity == 1) {
          stack.push_back(bin);
          break;
        }
        if (stack.empty()) throw DecodeError("offset for a note that was never opened", i);
        const int on_bin = stack.back();
        stack.pop_back();
        const double off = bin_to_time(segment_start_s, bin);
        if (on_bin < 0) {
          out.closed_ties.push_back({program, t.value, off});
        } else {
          if (on_bin >= bin) throw DecodeError("offset not after its onset", i);
          out.notes.push_back(
              Note{bin_to_time(segment_start_s, on_bin), off, t.value, program, 1, false});
        }
        break;
      }
      case TokenType::kDrum: {
        if (velocity != 1) throw DecodeError("drum hit needs velocity 1", i);
        out.notes.push_back(make_drum_note(bin_to_time(segment_start_s, bin), t.value));
        break;
      }
      case TokenType::kEos:
        eos_seen = true;
        break;
      case TokenType::kPad:
        throw DecodeError("PAD before EOS", i);
      case TokenType::kTieSectionEnd:
        throw DecodeError("TIE_SECTION_END outside the tie section", i);
      case TokenType::kInvalid:
        throw DecodeError("token id outside the vocabulary", i);
    }
    if (eos_seen) {
      ++i;
      break;
    }
  }
  if (!eos_seen) throw DecodeError("missing EOS", ids.size());
  for (; i < ids.size(); ++i)
    if (ids[i] != Vocabulary::kPad) throw DecodeError("non-PAD token after EOS", i);

  for (const auto& [key, stack] : open)
    for (int on_bin : stack)
      if (on_bin >= 0)
        out.continuations.push_back({bin_to_time(segment_start_s, on_bin), key.second, key.first});

  std::stable_sort(out.notes.begin(), out.notes.end(), note_less);
  std::sort(out.continuations.begin(), out.continuations.end(),
            [](const OpenNote& a, const OpenNote& b) {
              return std::tie(a.onset_s, a.program, a.pitch) <
                     std::tie(b.onset_s, b.program, b.pitch);
            });
  return out;
}

MultiChannelTargets build_multichannel_targets(const Segment& seg, const InstrumentGroupMap& map,
                                               const ChannelSet& annotated,
                                               const Vocabulary& vocab, std::size_t length_limit) {
  check_window(seg);
  std::array<Segment, kChannelCount> parts;
  for (Segment& p : parts) {
    p.start_s = seg.start_s;
    p.duration_s = seg.duration_s;
  }
  for (const Note& n : seg.notes) {
    const int c = channel_of(n, map);
    if (c != kUnmapped) parts[static_cast<std::size_t>(c)].notes.push_back(n);
  }
  for (const TieNote& t : seg.tie_notes) {
    const int c = map_program_to_channel(t.program, false, map);
    if (c != kUnmapped) parts[static_cast<std::size_t>(c)].tie_notes.push_back(t);
  }

  MultiChannelTargets out;
  out.annotated = annotated;
  for (int c = 0; c < kChannelCount; ++c) {
    TokenizeResult& r = out.channels[static_cast<std::size_t>(c)];
    if (annotated.test(static_cast<std::size_t>(c))) {
      r = tokenize_segment(parts[static_cast<std::size_t>(c)], vocab, length_limit);
    } else {
      r.sequence.ids.assign(length_limit, Vocabulary::kPad);
      r.sequence.length_limit = length_limit;
    }
    r.sequence.channel = c;
  }
  return out;
}

TruncationReport truncation_loss_rate(const std::vector<Segment>& corpus, std::size_t length_limit,
                                      const Vocabulary& vocab, bool multi_channel,
                                      const InstrumentGroupMap& map) {
  if (corpus.empty()) throw ContractError("truncation loss needs a non-empty corpus");
  TruncationReport rep;
  const std::size_t n_channels = multi_channel ? kChannelCount : 1;
  rep.per_channel_dropped.assign(n_channels, 0);
  rep.per_channel_total.assign(n_channels, 0);
  for (const Segment& seg : corpus) {
    if (multi_channel) {
      const MultiChannelTargets t =
          build_multichannel_targets(seg, map, all_channels(), vocab, length_limit);
      for (std::size_t c = 0; c < n_channels; ++c) {
        rep.per_channel_dropped[c] += t.channels[c].truncated_tokens;
        rep.per_channel_total[c] += t.channels[c].full_length;
      }
    } else {
      const TokenizeResult r = tokenize_segment(seg, vocab, length_limit);
      rep.per_channel_dropped[0] += r.truncated_tokens;
      rep.per_channel_total[0] += r.full_length;
    }
  }
  for (std::size_t c = 0; c < n_channels; ++c) {
    rep.dropped_tokens += rep.per_channel_dropped[c];
    rep.total_tokens += rep.per_channel_total[c];
    rep.per_channel_rate.push_back(
        rep.per_channel_total[c] == 0
            ? 0.0
            : static_cast<double>(rep.per_channel_dropped[c]) /
                  static_cast<double>(rep.per_channel_total[c]));
  }
  rep.rate = rep.total_tokens == 0 ? 0.0
                                   : static_cast<double>(rep.dropped_tokens) /
                                         static_cast<double>(rep.total_tokens);
  return rep;
}

}  // namespace mtk
