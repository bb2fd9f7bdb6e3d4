#include "mtk/note.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <tuple>

#include <json.hpp>

#include "mtk/error.hpp"

namespace mtk {

bool note_less(const Note& a, const Note& b) {
  return std::tie(a.onset_s, a.program, a.pitch, a.is_drum, a.offset_s, a.velocity) <
         std::tie(b.onset_s, b.program, b.pitch, b.is_drum, b.offset_s, b.velocity);
}

void validate_note(const Note& n) {
  if (!std::isfinite(n.onset_s) || !std::isfinite(n.offset_s) || n.onset_s < 0.0)
    throw ContractError("note onset must be finite and non-negative");
  if (n.pitch < 0 || n.pitch > 127) throw ContractError("pitch outside [0, 127]");
  if (n.program < 0 || n.program > 127) throw ContractError("program outside [0, 127]");
  if (n.velocity != 0 && n.velocity != 1) throw ContractError("velocity must be 0 or 1");
  if (!n.is_drum && !(n.offset_s > n.onset_s))
    throw ContractError("non-drum note needs offset > onset");
}

Note make_drum_note(double onset_s, int pitch) {
  return Note{onset_s, onset_s + kDrumDuration, pitch, 0, 1, true};
}

namespace {

// Drums sort after every pitched program at the same instant.
int program_sort_key(bool is_drum, int program) { return is_drum ? 128 : program; }

}  // namespace

std::vector<NoteEvent> notes_to_events(const std::vector<Note>& notes) {
  std::vector<Note> sorted = notes;
  std::stable_sort(sorted.begin(), sorted.end(), note_less);

  std::vector<NoteEvent> events;
  events.reserve(sorted.size() * 2);
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    const Note& n = sorted[i];
    const auto id = static_cast<std::uint32_t>(i);
    events.push_back({n.onset_s, EventKind::kOnset, n.pitch, n.program, 1, n.is_drum, id});
    events.push_back({n.offset_s, EventKind::kOffset, n.pitch, n.program, 0, n.is_drum, id});
  }
  std::stable_sort(events.begin(), events.end(), [](const NoteEvent& a, const NoteEvent& b) {
    return std::make_tuple(a.time_s, program_sort_key(a.is_drum, a.program), a.velocity,
                           a.pitch) < std::make_tuple(b.time_s,
                                                      program_sort_key(b.is_drum, b.program),
                                                      b.velocity, b.pitch);
  });
  return events;
}

std::vector<Note> events_to_notes(const std::vector<NoteEvent>& events) {
  std::map<std::uint32_t, Note> open;
  std::vector<Note> out;
  for (const NoteEvent& e : events) {
    if (e.kind == EventKind::kOnset) {
      if (!open.emplace(e.link_id, Note{e.time_s, e.time_s, e.pitch, e.program, 1, e.is_drum})
               .second)
        throw ContractError("duplicate onset for link " + std::to_string(e.link_id));
      continue;
    }
    auto it = open.find(e.link_id);
    if (it == open.end())
      throw ContractError("offset without onset for link " + std::to_string(e.link_id));
    it->second.offset_s = e.time_s;
    out.push_back(it->second);
    open.erase(it);
  }
  if (!open.empty()) throw ContractError("onset without offset");
  std::stable_sort(out.begin(), out.end(), note_less);
  return out;
}

// ---------------------------------------------------------------------------

const InstrumentGroupMap& InstrumentGroupMap::standard() {
  static const InstrumentGroupMap map = [] {
    InstrumentGroupMap m;
    m.ranges = {{0, 7, 0},     {8, 15, 1},   {16, 23, 2},  {24, 31, 3},
                {32, 39, 4},   {40, 55, 5},  {56, 63, 6},  {64, 71, 7},
                {72, 79, 8},   {80, 87, 9},  {88, 95, 10}, {100, 101, 11}};
    m.singing_channel = 11;
    m.drum_channel = 12;
    m.names = {"piano", "chromatic_percussion", "organ",      "guitar",     "bass",
               "strings", "brass",              "reed",       "pipe",       "synth_lead",
               "synth_pad", "singing",          "drums"};
    return m;
  }();
  return map;
}

int map_program_to_channel(int program, bool is_drum, const InstrumentGroupMap& map) {
  if (is_drum) return map.drum_channel;
  for (const ProgramRange& r : map.ranges)
    if (program >= r.lo && program <= r.hi) return r.channel;
  return kUnmapped;
}

// ---------------------------------------------------------------------------

std::string note_to_json_line(const Note& n) {
  char buf[192];
  std::snprintf(buf, sizeof buf,
                "{\"onset_s\":%.9f,\"offset_s\":%.9f,\"pitch\":%d,\"program\":%d,"
                "\"velocity\":%d,\"is_drum\":%s}",
                n.onset_s, n.offset_s, n.pitch, n.program, n.velocity,
                n.is_drum ? "true" : "false");
  return buf;
}

void write_notes_jsonl(std::ostream& os, const std::vector<Note>& notes) {
  for (const Note& n : notes) os << note_to_json_line(n) << '\n';
}

std::vector<Note> read_notes_jsonl(std::istream& is) {
  std::vector<Note> notes;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      const auto j = nlohmann::json::parse(line);
      Note n;
      n.onset_s = j.at("onset_s").get<double>();
      n.offset_s = j.at("offset_s").get<double>();
      n.pitch = j.at("pitch").get<int>();
      n.program = j.at("program").get<int>();
      n.velocity = j.value("velocity", 1);
      n.is_drum = j.value("is_drum", false);
      validate_note(n);
      notes.push_back(n);
    } catch (const nlohmann::json::exception& e) {
      throw Error("notes JSONL line " + std::to_string(lineno) + ": " + e.what());
    } catch (const ContractError& e) {
      throw ContractError("notes JSONL line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  return notes;
}

std::vector<Note> read_notes_jsonl_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path);
  return read_notes_jsonl(in);
}

void write_notes_jsonl_file(const std::string& path, const std::vector<Note>& notes) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path);
  write_notes_jsonl(out, notes);
}

}  // namespace mtk
