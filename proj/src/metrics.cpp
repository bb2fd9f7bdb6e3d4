#include "mtk/metrics.hpp"

#include <algorithm>
#include <cmath>

#include "mtk/error.hpp"
#include "mtk/matching.hpp"

namespace mtk {
namespace {

// Absorbs representation error so that a gap of exactly the tolerance counts
// as a match.
constexpr double kTimeEpsilon = 1e-9;

bool same_program_group(const Note& a, const Note& b, const InstrumentGroupMap& map) {
  const int ca = channel_of(a, map);
  const int cb = channel_of(b, map);
  if (ca == kUnmapped || cb == kUnmapped) return ca == cb && a.program == b.program;
  return ca == cb;
}

EvalResult from_matching(const std::vector<Note>& ref, const std::vector<Note>& est,
                         const std::vector<std::pair<std::size_t, std::size_t>>& pairs,
                         const InstrumentGroupMap* map) {
  EvalResult r;
  const Score s = make_score(pairs.size(), ref.size(), est.size());
  r.precision = s.precision;
  r.recall = s.recall;
  r.f1 = s.f1;
  r.matched = s.matched;
  r.n_ref = s.n_ref;
  r.n_est = s.n_est;
  if (map == nullptr) {
    r.macro_f1 = r.f1;
    return r;
  }
  std::map<int, std::size_t> n_ref, n_est, matched;
  for (const Note& n : ref) ++n_ref[channel_of(n, *map)];
  for (const Note& n : est) ++n_est[channel_of(n, *map)];
  for (const auto& [i, j] : pairs) ++matched[channel_of(ref[i], *map)];
  std::map<int, bool> present;
  for (const auto& [c, k] : n_ref) present[c] = true;
  for (const auto& [c, k] : n_est) present[c] = true;
  double sum = 0.0;
  for (const auto& [c, unused] : present) {
    r.per_instrument[c] = make_score(matched[c], n_ref[c], n_est[c]);
    sum += r.per_instrument[c].f1;
  }
  r.macro_f1 = present.empty() ? 0.0 : sum / static_cast<double>(present.size());
  return r;
}

}  // namespace

void MatchConfig::validate() const {
  if (!(onset_tolerance_s > 0.0)) throw ContractError("onset tolerance must be positive");
  if (!(offset_min_tolerance_s > 0.0) || !(offset_ratio >= 0.0))
    throw ContractError("offset tolerance must be positive");
}

bool notes_match(const Note& ref, const Note& est, const MatchConfig& cfg) {
  if (ref.is_drum != est.is_drum) return false;
  if (ref.pitch != est.pitch) return false;
  if (std::abs(ref.onset_s - est.onset_s) > cfg.onset_tolerance_s + kTimeEpsilon) return false;
  if (cfg.require_program &&
      !same_program_group(ref, est, cfg.map ? *cfg.map : InstrumentGroupMap::standard()))
    return false;
  if (cfg.offset_enabled && !(ref.is_drum && cfg.drum_offsets_ignored)) {
    const double tol = std::max(cfg.offset_min_tolerance_s,
                                cfg.offset_ratio * (ref.offset_s - ref.onset_s));
    if (std::abs(ref.offset_s - est.offset_s) > tol + kTimeEpsilon) return false;
  }
  return true;
}

std::vector<std::pair<std::size_t, std::size_t>> match_notes(const std::vector<Note>& ref,
                                                             const std::vector<Note>& est,
                                                             const MatchConfig& cfg) {
  cfg.validate();
  std::vector<std::vector<std::size_t>> adj(ref.size());
  for (std::size_t i = 0; i < ref.size(); ++i)
    for (std::size_t j = 0; j < est.size(); ++j)
      if (notes_match(ref[i], est[j], cfg)) adj[i].push_back(j);
  return maximum_bipartite_matching(adj, est.size());
}

Score make_score(std::size_t matched, std::size_t n_ref, std::size_t n_est) {
  Score s;
  s.matched = matched;
  s.n_ref = n_ref;
  s.n_est = n_est;
  s.precision = n_est == 0 ? 0.0 : static_cast<double>(matched) / static_cast<double>(n_est);
  s.recall = n_ref == 0 ? 0.0 : static_cast<double>(matched) / static_cast<double>(n_ref);
  s.f1 = s.precision + s.recall == 0.0
             ? 0.0
             : 2.0 * s.precision * s.recall / (s.precision + s.recall);
  return s;
}

EvalResult instrument_note_onset_f1(const std::vector<Note>& ref, const std::vector<Note>& est,
                                    const InstrumentGroupMap& map, double onset_tolerance_s) {
  MatchConfig cfg;
  cfg.onset_tolerance_s = onset_tolerance_s;
  cfg.map = &map;

  EvalResult r;
  std::size_t matched = 0, n_ref = 0, n_est = 0;
  double f1_sum = 0.0;
  for (int c = 0; c < kChannelCount; ++c) {
    std::vector<Note> rc, ec;
    for (const Note& n : ref)
      if (channel_of(n, map) == c) rc.push_back(n);
    for (const Note& n : est)
      if (channel_of(n, map) == c) ec.push_back(n);
    if (rc.empty() && ec.empty()) continue;
    const Score s = make_score(match_notes(rc, ec, cfg).size(), rc.size(), ec.size());
    r.per_instrument[c] = s;
    matched += s.matched;
    n_ref += s.n_ref;
    n_est += s.n_est;
    f1_sum += s.f1;
  }
  const Score total = make_score(matched, n_ref, n_est);
  r.precision = total.precision;
  r.recall = total.recall;
  r.f1 = total.f1;
  r.matched = matched;
  r.n_ref = n_ref;
  r.n_est = n_est;
  r.macro_f1 =
      r.per_instrument.empty() ? 0.0 : f1_sum / static_cast<double>(r.per_instrument.size());
  return r;
}

AgnosticResult agnostic_f1(const std::vector<Note>& ref, const std::vector<Note>& est,
                           const MatchConfig& cfg) {
  std::vector<Note> r, e;
  std::copy_if(ref.begin(), ref.end(), std::back_inserter(r), [](const Note& n) { return !n.is_drum; });
  std::copy_if(est.begin(), est.end(), std::back_inserter(e), [](const Note& n) { return !n.is_drum; });

  MatchConfig onset_cfg = cfg;
  onset_cfg.require_program = false;
  onset_cfg.offset_enabled = false;
  MatchConfig offset_cfg = onset_cfg;
  offset_cfg.offset_enabled = true;

  AgnosticResult out;
  out.onset = from_matching(r, e, match_notes(r, e, onset_cfg), nullptr);
  out.offset = from_matching(r, e, match_notes(r, e, offset_cfg), nullptr);
  return out;
}

EvalResult multi_f1(const std::vector<Note>& ref, const std::vector<Note>& est,
                    const InstrumentGroupMap& map, double onset_tolerance_s) {
  MatchConfig cfg;
  cfg.onset_tolerance_s = onset_tolerance_s;
  cfg.offset_enabled = true;
  cfg.require_program = true;
  cfg.drum_offsets_ignored = true;
  cfg.map = &map;
  return from_matching(ref, est, match_notes(ref, est, cfg), &map);
}

}  // namespace mtk
