#include "mtk/midi.hpp"

#include <algorithm>
#include <array>
#include <fstream>
#include <iterator>
#include <map>
#include <optional>
#include <tuple>

#include "mtk/error.hpp"

namespace mtk {
namespace {

enum class RawKind : std::uint8_t { kNoteOn, kNoteOff, kProgram, kTempo };

struct RawEvent {
  std::uint64_t tick = 0;
  std::uint32_t track = 0;
  std::uint32_t order = 0;
  RawKind kind = RawKind::kNoteOn;
  std::uint8_t channel = 0;
  std::uint8_t data1 = 0;
  std::uint8_t data2 = 0;
  std::uint32_t tempo = 0;
};

class Reader {
 public:
  explicit Reader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

  std::size_t pos() const { return pos_; }
  std::size_t remaining() const { return bytes_.size() - pos_; }
  void seek(std::size_t p) { pos_ = p; }

  std::uint8_t u8() {
    if (pos_ >= bytes_.size()) throw MidiParseError("unexpected end of data", pos_);
    return bytes_[pos_++];
  }
  std::uint8_t peek() const {
    if (pos_ >= bytes_.size()) throw MidiParseError("unexpected end of data", pos_);
    return bytes_[pos_];
  }
  std::uint16_t u16() {
    const std::uint16_t hi = u8();
    return static_cast<std::uint16_t>((hi << 8) | u8());
  }
  std::uint32_t u32() {
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v = (v << 8) | u8();
    return v;
  }
  std::uint32_t varlen() {
    const std::size_t start = pos_;
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) {
      const std::uint8_t b = u8();
      v = (v << 7) | (b & 0x7F);
      if (!(b & 0x80)) return v;
    }
    throw MidiParseError("variable-length quantity longer than 4 bytes", start);
  }
  void skip(std::size_t n) {
    if (n > remaining()) throw MidiParseError("chunk data runs past end of file", pos_);
    pos_ += n;
  }
  bool tag_is(const char* tag) const {
    return remaining() >= 4 && std::equal(tag, tag + 4, bytes_.begin() + pos_);
  }

 private:
  std::span<const std::uint8_t> bytes_;
  std::size_t pos_ = 0;
};

void parse_track(Reader& r, std::size_t end, std::uint32_t track, std::vector<RawEvent>& out) {
  std::uint64_t tick = 0;
  std::uint32_t order = 0;
  std::uint8_t running = 0;
  while (r.pos() < end) {
    tick += r.varlen();
    const std::size_t at = r.pos();
    std::uint8_t status = r.peek();
    if (status & 0x80) {
      r.u8();
    } else {
      if (running == 0) throw MidiParseError("data byte without running status", at);
      status = running;
    }

    if (status == 0xFF) {
      running = 0;
      const std::uint8_t type = r.u8();
      const std::uint32_t len = r.varlen();
      if (r.pos() + len > end) throw MidiParseError("meta event overruns track", at);
      if (type == 0x51) {
        if (len != 3) throw MidiParseError("tempo meta event must have length 3", at);
        std::uint32_t tempo = r.u8();
        tempo = (tempo << 8) | r.u8();
        tempo = (tempo << 8) | r.u8();
        if (tempo == 0) throw MidiParseError("zero tempo", at);
        out.push_back({tick, track, order++, RawKind::kTempo, 0, 0, 0, tempo});
      } else if (type == 0x2F) {
        r.skip(len);
        r.seek(end);
        return;
      } else {
        r.skip(len);
      }
      continue;
    }
    if (status == 0xF0 || status == 0xF7) {
      running = 0;
      const std::uint32_t len = r.varlen();
      if (r.pos() + len > end) throw MidiParseError("sysex overruns track", at);
      r.skip(len);
      continue;
    }
    if (status >= 0xF0) throw MidiParseError("unsupported system message in track", at);

    running = status;
    const std::uint8_t type = status & 0xF0;
    const std::uint8_t channel = status & 0x0F;
    const std::uint8_t d1 = r.u8();
    if (d1 & 0x80) throw MidiParseError("data byte out of range", r.pos() - 1);
    std::uint8_t d2 = 0;
    if (type != 0xC0 && type != 0xD0) {
      d2 = r.u8();
      if (d2 & 0x80) throw MidiParseError("data byte out of range", r.pos() - 1);
    }
    switch (type) {
      case 0x90:
        out.push_back({tick, track, order++, d2 == 0 ? RawKind::kNoteOff : RawKind::kNoteOn,
                       channel, d1, d2, 0});
        break;
      case 0x80:
        out.push_back({tick, track, order++, RawKind::kNoteOff, channel, d1, d2, 0});
        break;
      case 0xC0:
        out.push_back({tick, track, order++, RawKind::kProgram, channel, d1, 0, 0});
        break;
      default:
        break;
    }
  }
  if (r.pos() != end) throw MidiParseError("track events overrun chunk", r.pos());
}

// Converts ticks to seconds. Elapsed time is accumulated exactly as
// sum(delta_ticks * tempo_us) and divided once at the end.
class TickClock {
 public:
  TickClock(std::uint16_t division, std::size_t division_offset) {
    if (division & 0x8000) {
      const int fps = -static_cast<int>(static_cast<std::int8_t>(division >> 8));
      const int tpf = division & 0xFF;
      if (fps <= 0 || tpf == 0) throw MidiParseError("zero SMPTE division", division_offset);
      smpte_ = true;
      // 29 means 29.97 drop-frame: 30000/1001 frames per second.
      if (fps == 29) {
        smpte_num_ = 1001;
        smpte_den_ = 30000ULL * static_cast<unsigned>(tpf);
      } else {
        smpte_num_ = 1;
        smpte_den_ = static_cast<unsigned long long>(fps) * static_cast<unsigned>(tpf);
      }
    } else {
      if (division == 0) throw MidiParseError("zero ticks-per-quarter division", division_offset);
      ppq_ = division;
    }
  }

  void advance_to(std::uint64_t tick) {
    acc_ += static_cast<unsigned __int128>(tick - tick_) * tempo_;
    tick_ = tick;
  }
  void set_tempo(std::uint32_t t) { tempo_ = t; }

  double seconds() const {
    if (smpte_)
      return static_cast<double>(static_cast<long double>(tick_) * smpte_num_ /
                                 static_cast<long double>(smpte_den_));
    const unsigned __int128 den = static_cast<unsigned __int128>(ppq_) * 1000000u;
    const unsigned __int128 whole = acc_ / den;
    const unsigned __int128 rem = acc_ % den;
    return static_cast<double>(whole) +
           static_cast<double>(static_cast<long double>(rem) / static_cast<long double>(den));
  }

 private:
  bool smpte_ = false;
  unsigned long long smpte_num_ = 1;
  unsigned long long smpte_den_ = 1;
  std::uint32_t ppq_ = 1;
  std::uint32_t tempo_ = 500000;
  std::uint64_t tick_ = 0;
  unsigned __int128 acc_ = 0;
};

}  // namespace

bool looks_like_midi(std::span<const std::uint8_t> bytes) {
  return bytes.size() >= 4 && bytes[0] == 'M' && bytes[1] == 'T' && bytes[2] == 'h' &&
         bytes[3] == 'd';
}

std::vector<Note> parse_midi(std::span<const std::uint8_t> bytes) {
  Reader r(bytes);
  if (!r.tag_is("MThd")) throw MidiParseError("missing MThd header", 0);
  r.skip(4);
  const std::uint32_t header_len = r.u32();
  if (header_len < 6) throw MidiParseError("MThd chunk shorter than 6 bytes", 4);
  const std::size_t header_start = r.pos();
  const std::uint16_t format = r.u16();
  const std::uint16_t ntracks = r.u16();
  const std::size_t division_offset = r.pos();
  const std::uint16_t division = r.u16();
  if (format > 1) throw MidiParseError("only SMF format 0 and 1 are supported", header_start);
  if (format == 0 && ntracks != 1)
    throw MidiParseError("format 0 file must have exactly one track", header_start + 2);
  r.seek(header_start);
  r.skip(header_len);
  TickClock clock(division, division_offset);

  std::vector<RawEvent> raw;
  std::uint32_t track = 0;
  while (track < ntracks) {
    const std::size_t chunk_at = r.pos();
    if (r.remaining() < 8) throw MidiParseError("missing track chunk", chunk_at);
    const bool is_track = r.tag_is("MTrk");
    r.skip(4);
    const std::uint32_t len = r.u32();
    if (len > r.remaining()) throw MidiParseError("chunk length runs past end of file", chunk_at);
    const std::size_t end = r.pos() + len;
    if (is_track) {
      parse_track(r, end, track, raw);
      ++track;
    }
    r.seek(end);
  }

  std::stable_sort(raw.begin(), raw.end(), [](const RawEvent& a, const RawEvent& b) {
    return std::tie(a.tick, a.track, a.order) < std::tie(b.tick, b.track, b.order);
  });

  std::array<int, 16> program{};
  std::map<std::pair<int, int>, Note> open;  // (channel, pitch)
  std::vector<Note> notes;
  auto close = [&](auto it, double t) {
    if (t > it->second.onset_s) {
      it->second.offset_s = t;
      notes.push_back(it->second);
    }
    open.erase(it);
  };

  for (const RawEvent& e : raw) {
    clock.advance_to(e.tick);
    const double t = clock.seconds();
    switch (e.kind) {
      case RawKind::kTempo:
        clock.set_tempo(e.tempo);
        break;
      case RawKind::kProgram:
        program[e.channel] = e.data1;
        break;
      case RawKind::kNoteOn: {
        if (e.channel == 9) {
          notes.push_back(make_drum_note(t, e.data1));
          break;
        }
        const std::pair<int, int> key{e.channel, e.data1};
        if (auto it = open.find(key); it != open.end()) close(it, t);
        open.emplace(key, Note{t, t, e.data1, program[e.channel], 1, false});
        break;
      }
      case RawKind::kNoteOff: {
        if (e.channel == 9) break;
        if (auto it = open.find(std::pair<int, int>{e.channel, e.data1}); it != open.end())
          close(it, t);
        break;
      }
    }
  }
  const double end_time = clock.seconds();
  while (!open.empty()) close(open.begin(), end_time);

  // Same program and pitch across channels: truncate the earlier note.
  std::stable_sort(notes.begin(), notes.end(), note_less);
  std::map<std::pair<int, int>, std::size_t> last;  // (program, pitch) -> index
  std::vector<bool> keep(notes.size(), true);
  for (std::size_t i = 0; i < notes.size(); ++i) {
    if (notes[i].is_drum) continue;
    const std::pair<int, int> key{notes[i].program, notes[i].pitch};
    if (auto it = last.find(key); it != last.end()) {
      Note& prev = notes[it->second];
      if (notes[i].onset_s < prev.offset_s) {
        prev.offset_s = notes[i].onset_s;
        if (!(prev.offset_s > prev.onset_s)) keep[it->second] = false;
      }
    }
    last[key] = i;
  }
  std::vector<Note> result;
  result.reserve(notes.size());
  for (std::size_t i = 0; i < notes.size(); ++i)
    if (keep[i]) result.push_back(notes[i]);
  std::stable_sort(result.begin(), result.end(), note_less);
  return result;
}

std::vector<Note> parse_midi_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path);
  const std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                        std::istreambuf_iterator<char>());
  return parse_midi(bytes);
}

}  // namespace mtk
