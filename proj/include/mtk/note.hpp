#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace mtk {

inline constexpr double kDrumDuration = 0.010;
inline constexpr int kSingingMelodyProgram = 100;
inline constexpr int kSingingChorusProgram = 101;

/// A pitched or drum note. Drum notes are onset-only; their offset is
/// materialized at onset + kDrumDuration. Drum notes carry program 0.
struct Note {
  double onset_s = 0.0;
  double offset_s = 0.0;
  int pitch = 0;
  int program = 0;
  int velocity = 1;
  bool is_drum = false;

  friend bool operator==(const Note&, const Note&) = default;
};

/// Orders by (onset, program, pitch) then the remaining fields.
bool note_less(const Note& a, const Note& b);

/// Throws ContractError when a Note invariant does not hold.
void validate_note(const Note& n);

Note make_drum_note(double onset_s, int pitch);

enum class EventKind : std::uint8_t { kOnset, kOffset };

struct NoteEvent {
  double time_s = 0.0;
  EventKind kind = EventKind::kOnset;
  int pitch = 0;
  int program = 0;
  int velocity = 1;
  bool is_drum = false;
  std::uint32_t link_id = 0;

  friend bool operator==(const NoteEvent&, const NoteEvent&) = default;
};

/// Onset and offset events, time sorted; simultaneous events are ordered by
/// (program, velocity, pitch) with drums after pitched programs. link_id is
/// the index of the note in (onset, program, pitch) order.
std::vector<NoteEvent> notes_to_events(const std::vector<Note>& notes);

/// Inverse of notes_to_events. Throws ContractError on unmatched links.
std::vector<Note> events_to_notes(const std::vector<NoteEvent>& events);

// ---------------------------------------------------------------------------
// Instrument groups

inline constexpr int kChannelCount = 13;
inline constexpr int kUnmapped = -1;

struct ProgramRange {
  int lo = 0;
  int hi = 0;
  int channel = 0;
};

/// Program ranges onto the 13 decoder channels. Drums and singing have their
/// own channels; programs not covered by any range are unmapped.
struct InstrumentGroupMap {
  std::vector<ProgramRange> ranges;
  int drum_channel = 12;
  int singing_channel = 11;
  std::array<std::string, kChannelCount> names{};

  static const InstrumentGroupMap& standard();
};

/// Channel index in [0, 12] or kUnmapped.
int map_program_to_channel(int program, bool is_drum,
                           const InstrumentGroupMap& map = InstrumentGroupMap::standard());

inline int channel_of(const Note& n,
                      const InstrumentGroupMap& map = InstrumentGroupMap::standard()) {
  return map_program_to_channel(n.program, n.is_drum, map);
}

// ---------------------------------------------------------------------------
// JSONL

/// One JSON object per line with the six Note fields; times with 9 decimals.
std::string note_to_json_line(const Note& n);
void write_notes_jsonl(std::ostream& os, const std::vector<Note>& notes);
std::vector<Note> read_notes_jsonl(std::istream& is);
std::vector<Note> read_notes_jsonl_file(const std::string& path);
void write_notes_jsonl_file(const std::string& path, const std::vector<Note>& notes);

}  // namespace mtk
