#include "mtk/vocabulary.hpp"

#include <cmath>

#include "mtk/error.hpp"
#include "mtk/note.hpp"

namespace mtk {

std::string_view to_string(VocabVariant v) {
  return v == VocabVariant::kMidiPlus ? "midi_plus" : "full_plus";
}

VocabVariant parse_vocab_variant(std::string_view name) {
  if (name == "midi_plus") return VocabVariant::kMidiPlus;
  if (name == "full_plus") return VocabVariant::kFullPlus;
  throw ContractError("unknown vocabulary '" + std::string(name) + "'");
}

namespace {
TokenId checked(int base, int value, int count, const char* what) {
  if (value < 0 || value >= count) throw ContractError(std::string(what) + " out of range");
  return static_cast<TokenId>(base + value);
}
}  // namespace

TokenId Vocabulary::shift(int bin) { return checked(kShiftBase, bin, kShiftCount, "shift bin"); }
TokenId Vocabulary::pitch(int p) { return checked(kPitchBase, p, kPitchCount, "pitch"); }
TokenId Vocabulary::velocity(int v) {
  return checked(kVelocityBase, v, kVelocityCount, "velocity");
}
TokenId Vocabulary::program(int p) { return checked(kProgramBase, p, kProgramCount, "program"); }
TokenId Vocabulary::drum(int p) { return checked(kDrumBase, p, kDrumCount, "drum pitch"); }

DecodedToken Vocabulary::decode(TokenId id) {
  if (id == kPad) return {TokenType::kPad, 0};
  if (id == kEos) return {TokenType::kEos, 0};
  if (id == kTieSectionEnd) return {TokenType::kTieSectionEnd, 0};
  if (id < kPitchBase) return {TokenType::kShift, id - kShiftBase};
  if (id < kVelocityBase) return {TokenType::kPitch, id - kPitchBase};
  if (id < kProgramBase) return {TokenType::kVelocity, id - kVelocityBase};
  if (id < kDrumBase) return {TokenType::kProgram, id - kProgramBase};
  if (id < kSize) return {TokenType::kDrum, id - kDrumBase};
  return {TokenType::kInvalid, id};
}

int Vocabulary::project_program(int program) const {
  return variant_ == VocabVariant::kMidiPlus ? collapse_program(program) : program;
}

int collapse_program(int program) {
  if (program == kSingingMelodyProgram || program == kSingingChorusProgram) return program;
  return (program / 8) * 8;
}

int time_to_bin(double relative_s) {
  // The epsilon absorbs representation error, e.g. 0.29 / 0.01 = 28.999...
  const double scaled = std::floor(relative_s / kShiftSeconds + 1e-6);
  if (scaled <= 0.0) return 0;
  if (scaled >= Vocabulary::kShiftCount - 1) return Vocabulary::kShiftCount - 1;
  return static_cast<int>(scaled);
}

}  // namespace mtk
