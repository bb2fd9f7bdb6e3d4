#pragma once

#include <cstddef>
#include <map>
#include <utility>
#include <vector>

#include "mtk/note.hpp"

namespace mtk {

inline constexpr double kDefaultOnsetTolerance = 0.050;
inline constexpr double kSingingOnsetTolerance = 0.100;

struct MatchConfig {
  double onset_tolerance_s = kDefaultOnsetTolerance;
  bool offset_enabled = false;
  /// Offset tolerance is max(offset_min_tolerance_s, offset_ratio * ref duration).
  double offset_ratio = 0.2;
  double offset_min_tolerance_s = 0.050;
  bool require_program = false;
  bool drum_offsets_ignored = true;
  const InstrumentGroupMap* map = nullptr;

  void validate() const;
};

/// Pair admissibility: same drum flag, |onset diff| <= tolerance (closed),
/// equal pitch, equal program group when required, and the offset rule when
/// enabled (never for drums).
bool notes_match(const Note& ref, const Note& est, const MatchConfig& cfg);

/// Maximum one-to-one matching of admissible pairs as (ref, est) indices.
std::vector<std::pair<std::size_t, std::size_t>> match_notes(const std::vector<Note>& ref,
                                                             const std::vector<Note>& est,
                                                             const MatchConfig& cfg);

struct Score {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  std::size_t matched = 0;
  std::size_t n_ref = 0;
  std::size_t n_est = 0;
};

/// P = matched / n_est, R = matched / n_ref, F1 = 2PR / (P + R); each is 0
/// when its denominator is 0.
Score make_score(std::size_t matched, std::size_t n_ref, std::size_t n_est);

struct EvalResult {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  std::size_t matched = 0;
  std::size_t n_ref = 0;
  std::size_t n_est = 0;
  /// Mean F1 over channels present in either list.
  double macro_f1 = 0.0;
  std::map<int, Score> per_instrument;
};

/// Per-channel onset F1 (onset + pitch within a channel); micro totals and
/// macro mean. Unmapped programs are not scored.
EvalResult instrument_note_onset_f1(const std::vector<Note>& ref, const std::vector<Note>& est,
                                    const InstrumentGroupMap& map = InstrumentGroupMap::standard(),
                                    double onset_tolerance_s = kDefaultOnsetTolerance);

struct AgnosticResult {
  EvalResult onset;
  EvalResult offset;
};

/// Instrument-agnostic onset and onset+offset F1 over non-drum notes.
AgnosticResult agnostic_f1(const std::vector<Note>& ref, const std::vector<Note>& est,
                           const MatchConfig& cfg = {});

/// Multi-instrument F1: onset, pitch, program group and offset must match;
/// drum offsets are ignored.
EvalResult multi_f1(const std::vector<Note>& ref, const std::vector<Note>& est,
                    const InstrumentGroupMap& map = InstrumentGroupMap::standard(),
                    double onset_tolerance_s = kDefaultOnsetTolerance);

}  // namespace mtk
