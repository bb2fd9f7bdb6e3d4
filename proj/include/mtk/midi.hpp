#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "mtk/note.hpp"

namespace mtk {

/// Parses a Standard MIDI File (format 0 or 1) into notes sorted by
/// (onset, program, pitch). Channel 10 is drums. Note-on with velocity 0 is a
/// note-off. Overlapping notes of the same program and pitch are resolved by
/// truncating the earlier one at the later onset; zero-length notes are
/// dropped. Throws MidiParseError.
std::vector<Note> parse_midi(std::span<const std::uint8_t> bytes);

std::vector<Note> parse_midi_file(const std::string& path);

/// True when the buffer starts with an "MThd" chunk.
bool looks_like_midi(std::span<const std::uint8_t> bytes);

}  // namespace mtk
