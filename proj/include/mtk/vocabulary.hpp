#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace mtk {

using TokenId = std::uint16_t;

enum class VocabVariant : std::uint8_t { kMidiPlus, kFullPlus };

std::string_view to_string(VocabVariant v);
/// Accepts "midi_plus" / "full_plus". Throws ContractError otherwise.
VocabVariant parse_vocab_variant(std::string_view name);

inline constexpr double kShiftSeconds = 0.010;
inline constexpr double kSegmentSeconds = 2.048;

enum class TokenType : std::uint8_t {
  kPad,
  kEos,
  kTieSectionEnd,
  kShift,
  kPitch,
  kVelocity,
  kProgram,
  kDrum,
  kInvalid
};

struct DecodedToken {
  TokenType type = TokenType::kInvalid;
  int value = 0;
};

/// Dense token layout, PAD = 0:
///   PAD, EOS, TIE_SECTION_END, shift[206], pitch[128], velocity[2],
///   program[128], drum[128].
/// Both variants share the layout; MIDI_PLUS only ever emits the first
/// program of each GM family plus the singing programs.
class Vocabulary {
 public:
  static constexpr int kShiftCount = 206;
  static constexpr int kPitchCount = 128;
  static constexpr int kVelocityCount = 2;
  static constexpr int kProgramCount = 128;
  static constexpr int kDrumCount = 128;

  static constexpr TokenId kPad = 0;
  static constexpr TokenId kEos = 1;
  static constexpr TokenId kTieSectionEnd = 2;
  static constexpr TokenId kShiftBase = 3;
  static constexpr TokenId kPitchBase = kShiftBase + kShiftCount;
  static constexpr TokenId kVelocityBase = kPitchBase + kPitchCount;
  static constexpr TokenId kProgramBase = kVelocityBase + kVelocityCount;
  static constexpr TokenId kDrumBase = kProgramBase + kProgramCount;
  static constexpr int kSize = kDrumBase + kDrumCount;

  explicit Vocabulary(VocabVariant variant = VocabVariant::kFullPlus) : variant_(variant) {}

  VocabVariant variant() const { return variant_; }
  static constexpr int size() { return kSize; }

  static TokenId shift(int bin);
  static TokenId pitch(int p);
  static TokenId velocity(int v);
  static TokenId program(int p);
  static TokenId drum(int p);
  static DecodedToken decode(TokenId id);

  /// Program as represented under this variant.
  int project_program(int program) const;

 private:
  VocabVariant variant_;
};

/// MIDI_PLUS projection: each GM family collapses to its first program;
/// singing programs 100 and 101 are kept.
int collapse_program(int program);

/// Shift bin of a segment-relative time: floor(t / 10 ms), clamped to the
/// last bin.
int time_to_bin(double relative_s);
inline double bin_to_time(double segment_start_s, int bin) {
  return segment_start_s + bin * kShiftSeconds;
}

}  // namespace mtk
