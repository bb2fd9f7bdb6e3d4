#include <gtest/gtest.h>

#include "generators.hpp"
#include "mtk/error.hpp"
#include "mtk/matching.hpp"
#include "mtk/metrics.hpp"
#include "oracles.hpp"

using namespace mtk;
using namespace mtk::testing;

TEST(Matching, HopcroftKarpMatchesBruteForce) {
  Rng rng(21);
  for (int trial = 0; trial < 500; ++trial) {
    const std::size_t nl = rng.below(9), nr = rng.below(9);
    std::vector<std::vector<bool>> edge(nl, std::vector<bool>(nr));
    std::vector<std::vector<std::size_t>> adj(nl);
    for (std::size_t i = 0; i < nl; ++i)
      for (std::size_t j = 0; j < nr; ++j)
        if ((edge[i][j] = rng.bernoulli(0.3))) adj[i].push_back(j);
    const auto m = maximum_bipartite_matching(adj, nr);
    EXPECT_EQ(m.size(), brute_force_matching(nl, nr, [&](auto i, auto j) { return bool(edge[i][j]); }));
    std::vector<bool> used(nr, false);
    for (const auto& [i, j] : m) {
      EXPECT_TRUE(edge[i][j]);
      EXPECT_FALSE(used[j]);
      used[j] = true;
    }
  }
}

TEST(Matching, LargeChain) {
  // Greedy matching would stop at 1; the maximum is n.
  const std::size_t n = 2000;
  std::vector<std::vector<std::size_t>> adj(n);
  for (std::size_t i = 0; i < n; ++i) {
    adj[i].push_back(i);
    if (i + 1 < n) adj[i].push_back(i + 1);
  }
  EXPECT_EQ(maximum_bipartite_matching(adj, n).size(), n);
}

TEST(Metrics, AllFamiliesMatchBruteForce) {
  Rng rng(8);
  for (int trial = 0; trial < 500; ++trial) {
    const auto ref = random_eval_notes(rng, 8);
    const auto est = random_eval_notes(rng, 8);
    const auto inst = instrument_note_onset_f1(ref, est);
    const auto c_inst = oracle_counts(MetricKind::kInstOnset, ref, est, 0.05);
    EXPECT_EQ(inst.matched, c_inst.matched);
    EXPECT_EQ(inst.n_ref, c_inst.n_ref);
    EXPECT_DOUBLE_EQ(inst.f1, oracle_f1(c_inst));

    const auto ag = agnostic_f1(ref, est);
    const auto c_on = oracle_counts(MetricKind::kAgnosticOnset, ref, est, 0.05);
    const auto c_off = oracle_counts(MetricKind::kAgnosticOffset, ref, est, 0.05);
    EXPECT_EQ(ag.onset.matched, c_on.matched);
    EXPECT_EQ(ag.offset.matched, c_off.matched);
    EXPECT_DOUBLE_EQ(ag.offset.f1, oracle_f1(c_off));

    const auto mf = multi_f1(ref, est);
    const auto c_m = oracle_counts(MetricKind::kMulti, ref, est, 0.05);
    EXPECT_EQ(mf.matched, c_m.matched);
    EXPECT_EQ(mf.n_est, c_m.n_est);
    EXPECT_DOUBLE_EQ(mf.f1, oracle_f1(c_m));
  }
}

TEST(Metrics, OnsetToleranceIsClosed) {
  const std::vector<Note> ref = {Note{1.0, 2.0, 60, 0, 1, false}};
  const std::vector<Note> at = {Note{1.05, 2.0, 60, 0, 1, false}};
  const std::vector<Note> past = {Note{1.0500001, 2.0, 60, 0, 1, false}};
  EXPECT_DOUBLE_EQ(multi_f1(ref, at).f1, 1.0);
  EXPECT_DOUBLE_EQ(multi_f1(ref, past).f1, 0.0);
  EXPECT_DOUBLE_EQ(instrument_note_onset_f1(ref, at).f1, 1.0);
}

TEST(Metrics, DrumOffsetsIgnored) {
  const std::vector<Note> ref = {make_drum_note(0.5, 36)};
  std::vector<Note> est = {make_drum_note(0.52, 36)};
  est[0].offset_s = 3.0;
  EXPECT_DOUBLE_EQ(multi_f1(ref, est).f1, 1.0);
  est[0].pitch = 38;
  EXPECT_DOUBLE_EQ(multi_f1(ref, est).f1, 0.0);
}

TEST(Metrics, OffsetTolerance) {
  const std::vector<Note> ref = {Note{0.0, 1.0, 60, 0, 1, false}};
  EXPECT_DOUBLE_EQ(agnostic_f1(ref, {Note{0.0, 1.2, 60, 5, 1, false}}).offset.f1, 1.0);
  EXPECT_DOUBLE_EQ(agnostic_f1(ref, {Note{0.0, 1.21, 60, 5, 1, false}}).offset.f1, 0.0);
  EXPECT_DOUBLE_EQ(agnostic_f1(ref, {Note{0.0, 1.21, 60, 5, 1, false}}).onset.f1, 1.0);
}

TEST(Metrics, ProgramGroups) {
  const std::vector<Note> ref = {Note{0.0, 1.0, 60, 0, 1, false}};
  EXPECT_DOUBLE_EQ(multi_f1(ref, {Note{0.0, 1.0, 60, 7, 1, false}}).f1, 1.0);
  EXPECT_DOUBLE_EQ(multi_f1(ref, {Note{0.0, 1.0, 60, 8, 1, false}}).f1, 0.0);
  const std::vector<Note> odd = {Note{0.0, 1.0, 60, 97, 1, false}};
  EXPECT_DOUBLE_EQ(multi_f1(odd, odd).f1, 1.0);
  EXPECT_DOUBLE_EQ(multi_f1(odd, {Note{0.0, 1.0, 60, 98, 1, false}}).f1, 0.0);
  EXPECT_EQ(instrument_note_onset_f1(odd, odd).n_ref, 0u);
}

TEST(Metrics, PerfectAndEmpty) {
  Rng rng(4);
  for (int i = 0; i < 50; ++i) {
    auto notes = random_eval_notes(rng, 8);
    if (notes.empty()) continue;
    EXPECT_DOUBLE_EQ(multi_f1(notes, notes).f1, 1.0);
  }
  EXPECT_DOUBLE_EQ(multi_f1({}, {}).f1, 0.0);
  const auto r = multi_f1({Note{0, 1, 60, 0, 1, false}}, {});
  EXPECT_DOUBLE_EQ(r.recall, 0.0);
  EXPECT_DOUBLE_EQ(r.precision, 0.0);
}

TEST(Metrics, MacroAverage) {
  const std::vector<Note> ref = {Note{0, 1, 60, 0, 1, false}, Note{0, 1, 40, 33, 1, false}};
  const std::vector<Note> est = {Note{0, 1, 60, 0, 1, false}};
  const auto r = instrument_note_onset_f1(ref, est);
  EXPECT_EQ(r.per_instrument.size(), 2u);
  EXPECT_DOUBLE_EQ(r.macro_f1, 0.5);
  EXPECT_NEAR(r.f1, 2.0 / 3.0, 1e-12);
}

TEST(Metrics, InvalidTolerance) {
  MatchConfig cfg;
  cfg.onset_tolerance_s = 0.0;
  EXPECT_THROW(match_notes({}, {}, cfg), ContractError);
}
