#include <gtest/gtest.h>

#include "mtk/error.hpp"
#include "mtk/midi.hpp"
#include "mtk/random.hpp"
#include "oracles.hpp"
#include "smf_writer.hpp"

using namespace mtk;
using namespace mtk::testing;

TEST(Midi, SingleNoteDefaultTempo) {
  SmfTrack t;
  t.program(0, 0, 33);
  t.note_on(480, 0, 60);
  t.note_off(960, 0, 60);
  const auto notes = parse_midi(write_smf({t}));
  ASSERT_EQ(notes.size(), 1u);
  EXPECT_DOUBLE_EQ(notes[0].onset_s, 0.5);
  EXPECT_DOUBLE_EQ(notes[0].offset_s, 1.0);
  EXPECT_EQ(notes[0].pitch, 60);
  EXPECT_EQ(notes[0].program, 33);
  EXPECT_FALSE(notes[0].is_drum);
}

TEST(Midi, VelocityZeroIsNoteOff) {
  SmfTrack t;
  t.note_on(0, 0, 64);
  t.note_on(240, 0, 64, 0);
  const auto notes = parse_midi(write_smf({t}));
  ASSERT_EQ(notes.size(), 1u);
  EXPECT_DOUBLE_EQ(notes[0].offset_s, 0.25);
}

TEST(Midi, RunningStatusMatchesExplicitStatus) {
  SmfTrack t;
  for (int i = 0; i < 8; ++i) {
    t.note_on(static_cast<std::uint64_t>(i) * 100, 0, 60 + i);
    t.note_on(static_cast<std::uint64_t>(i) * 100 + 50, 0, 60 + i, 0);
  }
  EXPECT_EQ(parse_midi(write_smf({t}, 480, true)), parse_midi(write_smf({t}, 480, false)));
}

TEST(Midi, DrumChannelProducesOnsetOnlyNotes) {
  SmfTrack t;
  t.program(0, 9, 25);
  t.note_on(480, 9, 36);
  t.note_off(2000, 9, 36);
  const auto notes = parse_midi(write_smf({t}));
  ASSERT_EQ(notes.size(), 1u);
  EXPECT_TRUE(notes[0].is_drum);
  EXPECT_EQ(notes[0].program, 0);
  EXPECT_NEAR(notes[0].offset_s - notes[0].onset_s, kDrumDuration, 1e-12);
}

TEST(Midi, OverlapTruncatesEarlierNote) {
  SmfTrack t;
  t.note_on(0, 0, 60);
  t.note_on(0, 1, 60);  // same program (0) and pitch on another channel
  t.note_off(480, 1, 60);
  t.note_off(960, 0, 60);
  SmfTrack u;
  u.note_on(240, 2, 60);
  u.note_off(300, 2, 60);
  const auto notes = parse_midi(write_smf({t, u}));
  // The two notes at 0 collapse: the first is truncated to zero length.
  for (const Note& n : notes) EXPECT_GT(n.offset_s, n.onset_s);
  for (std::size_t i = 1; i < notes.size(); ++i)
    if (notes[i].pitch == notes[i - 1].pitch && notes[i].program == notes[i - 1].program)
      EXPECT_LE(notes[i - 1].offset_s, notes[i].onset_s);
}

TEST(Midi, TempoMapMatchesTickWalker) {
  Rng rng(7);
  for (int trial = 0; trial < 50; ++trial) {
    const int ppq = 96 + static_cast<int>(rng.below(900));
    SmfTrack conductor, music;
    std::vector<TempoChange> changes;
    for (int k = 0; k < 6; ++k) {
      const std::uint64_t tick = rng.below(20000);
      const auto tempo = static_cast<std::uint32_t>(200000 + rng.below(1500000));
      conductor.tempo(tick, tempo);
      changes.push_back({tick, tempo});
    }
    conductor.text(5, "marker");
    std::vector<std::pair<std::uint64_t, std::uint64_t>> spans;
    for (int k = 0; k < 10; ++k) {
      const std::uint64_t on = rng.below(20000);
      const std::uint64_t off = on + 1 + rng.below(3000);
      music.note_on(on, 0, 30 + k * 3);
      music.note_off(off, 0, 30 + k * 3);
      spans.emplace_back(on, off);
    }
    const auto notes = parse_midi(write_smf({conductor, music}, static_cast<std::uint16_t>(ppq)));
    ASSERT_EQ(notes.size(), 10u);
    for (int k = 0; k < 10; ++k) {
      const int pitch = 30 + k * 3;
      const auto it = std::find_if(notes.begin(), notes.end(),
                                   [&](const Note& n) { return n.pitch == pitch; });
      ASSERT_NE(it, notes.end());
      EXPECT_NEAR(it->onset_s, walk_ticks(spans[static_cast<std::size_t>(k)].first, changes, ppq), 1e-9);
      EXPECT_NEAR(it->offset_s, walk_ticks(spans[static_cast<std::size_t>(k)].second, changes, ppq), 1e-9);
    }
  }
}

TEST(Midi, OutputSortedByOnsetProgramPitch) {
  SmfTrack t;
  t.program(0, 1, 40);
  t.note_on(0, 1, 70);
  t.note_on(0, 0, 72);
  t.note_on(0, 0, 50);
  t.note_off(100, 0, 72);
  t.note_off(100, 0, 50);
  t.note_off(100, 1, 70);
  const auto notes = parse_midi(write_smf({t}));
  ASSERT_EQ(notes.size(), 3u);
  EXPECT_TRUE(std::is_sorted(notes.begin(), notes.end(), note_less));
  EXPECT_EQ(notes[0].pitch, 50);
  EXPECT_EQ(notes[2].program, 40);
}

TEST(Midi, UnterminatedNoteClosesAtEnd) {
  SmfTrack t;
  t.note_on(0, 0, 60);
  t.note_on(480, 0, 61);
  t.note_off(960, 0, 61);
  const auto notes = parse_midi(write_smf({t}));
  ASSERT_EQ(notes.size(), 2u);
  EXPECT_DOUBLE_EQ(notes[0].offset_s, 1.0);
}

TEST(Midi, Errors) {
  std::vector<std::uint8_t> bad = {'R', 'I', 'F', 'F'};
  EXPECT_THROW(parse_midi(bad), MidiParseError);

  SmfTrack t;
  t.note_on(0, 0, 60);
  auto bytes = write_smf({t});
  auto truncated = bytes;
  truncated.resize(truncated.size() - 6);
  EXPECT_THROW(parse_midi(truncated), MidiParseError);

  auto zero_div = write_smf({t}, 0);
  try {
    parse_midi(zero_div);
    FAIL();
  } catch (const MidiParseError& e) {
    EXPECT_EQ(e.offset(), 12u);
  }

  SmfTrack z;
  z.tempo(0, 0);
  EXPECT_THROW(parse_midi(write_smf({z})), MidiParseError);

  auto fmt2 = bytes;
  fmt2[9] = 2;
  EXPECT_THROW(parse_midi(fmt2), MidiParseError);
}

TEST(Midi, SmpteDivision) {
  SmfTrack t;
  t.note_on(0, 0, 60);
  t.note_off(100, 0, 60);
  // 25 fps, 40 ticks per frame: 1000 ticks per second.
  const std::uint16_t division = static_cast<std::uint16_t>((static_cast<std::uint8_t>(-25) << 8) | 40);
  const auto notes = parse_midi(write_smf({t}, division));
  ASSERT_EQ(notes.size(), 1u);
  EXPECT_NEAR(notes[0].offset_s, 0.1, 1e-12);
}

TEST(Midi, LooksLikeMidi) {
  EXPECT_TRUE(looks_like_midi(write_smf({SmfTrack{}})));
  const std::vector<std::uint8_t> json = {'{', '}'};
  EXPECT_FALSE(looks_like_midi(json));
}
