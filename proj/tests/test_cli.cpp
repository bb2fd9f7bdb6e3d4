#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>

#include <json.hpp>

#include "run.hpp"
#include "smf_writer.hpp"

using namespace mtk::testing;
namespace fs = std::filesystem;

namespace {

const std::string kCli = MTK_CLI_PATH;

fs::path scratch() {
  const fs::path d = fs::temp_directory_path() / "mtk_cli_test";
  fs::create_directories(d);
  return d;
}

std::string simple_midi() {
  SmfTrack t;
  t.program(0, 0, 40);
  t.note_on(0, 0, 60);
  t.note_off(240, 0, 60);
  t.note_on(480, 9, 36);
  t.note_on(480, 1, 67);
  t.note_off(960, 1, 67);
  const auto path = (scratch() / "simple.mid").string();
  write_file(path, write_smf({t}));
  return path;
}

}  // namespace

TEST(Cli, ParamCount) {
  const auto r = run_command(kCli + " param-count --model ymt3");
  ASSERT_EQ(r.exit_code, 0);
  const auto j = nlohmann::json::parse(r.out);
  EXPECT_NEAR(j["total"].get<double>() / 1e6, 44.7, 44.7 * 0.02);
  for (const char* k : {"total", "encoder", "decoder", "active"}) EXPECT_TRUE(j.contains(k));
}

TEST(Cli, EvaluateSameMidiIsPerfect) {
  const auto mid = simple_midi();
  for (const char* metric : {"multi", "inst_onset"}) {
    const auto r = run_command(kCli + " evaluate --ref " + mid + " --est " + mid + " --metric " + metric);
    ASSERT_EQ(r.exit_code, 0);
    EXPECT_DOUBLE_EQ(nlohmann::json::parse(r.out)["result"]["f1"].get<double>(), 1.0);
  }
  const auto report = (scratch() / "report.json").string();
  const auto r = run_command(kCli + " evaluate --ref " + mid + " --est " + mid +
                             " --metric agnostic --report " + report);
  ASSERT_EQ(r.exit_code, 0);
  EXPECT_EQ(read_text(report), r.out);
}

TEST(Cli, TokenizeDetokenize) {
  const auto mid = simple_midi();
  const auto tok = (scratch() / "simple.tok").string();
  const auto out = (scratch() / "simple.jsonl").string();
  ASSERT_EQ(run_command(kCli + " tokenize --vocab midi_plus --channels single " + mid + " " + tok).exit_code, 0);
  EXPECT_EQ(fs::file_size(tok), 1024u * 2u);
  ASSERT_EQ(run_command(kCli + " detokenize " + tok + " " + out).exit_code, 0);
  std::ifstream in(out);
  std::string line;
  int n = 0;
  while (std::getline(in, line)) ++n;
  EXPECT_EQ(n, 3);
  ASSERT_EQ(run_command(kCli + " tokenize --channels multi --annotated 0,5,12 " + mid + " " + tok).exit_code, 0);
  EXPECT_EQ(fs::file_size(tok), 13u * 256u * 2u);
  ASSERT_EQ(run_command(kCli + " detokenize " + tok + " " + out).exit_code, 0);
}

TEST(Cli, SampleWeights) {
  const auto r = run_command(kCli + " sample-weights --preset rebalanced");
  ASSERT_EQ(r.exit_code, 0);
  const auto j = nlohmann::json::parse(r.out);
  EXPECT_DOUBLE_EQ(j["weights"]["Slakh"].get<double>(), 0.295);
  const auto sizes = (scratch() / "sizes.json").string();
  std::ofstream(sizes) << R"({"a": 10, "b": 10})";
  const auto t = run_command(kCli + " sample-weights --sizes " + sizes + " --temperature 3.33");
  ASSERT_EQ(t.exit_code, 0);
  EXPECT_NEAR(nlohmann::json::parse(t.out)["weights"]["a"].get<double>(), 0.5, 1e-12);
}

TEST(Cli, ExitCodes) {
  EXPECT_EQ(run_command(kCli + " param-count --model ymt3 --bogus").exit_code, 64);
  EXPECT_EQ(run_command(kCli + " frobnicate").exit_code, 64);
  EXPECT_EQ(run_command(kCli).exit_code, 64);
  EXPECT_EQ(run_command(kCli + " evaluate --ref /nonexistent --est /nonexistent").exit_code, 2);
  const auto bad = (scratch() / "bad.mid").string();
  std::ofstream(bad) << "MThd\x00\x00";
  EXPECT_EQ(run_command(kCli + " evaluate --ref " + bad + " --est " + bad).exit_code, 2);
  EXPECT_EQ(run_command(kCli + " augment --manifest x.jsonl").exit_code, 64);  // --seed is required
  const auto v = run_command(kCli + " --version");
  EXPECT_EQ(v.exit_code, 0);
  EXPECT_NE(v.out.find("config schema"), std::string::npos);
}

TEST(Cli, AugmentDeterministic) {
  const fs::path dir = scratch() / "aug";
  fs::create_directories(dir);
  {
    std::ofstream m(dir / "manifest.jsonl");
    for (int s = 0; s < 6; ++s) {
      m << R"({"segment_id":"s)" << s << R"(","dataset":"d)" << s % 3 << R"(","stem_id":"a","notes":[{"onset_s":0.1,"offset_s":0.5,"pitch":)"
        << 50 + s << R"(,"program":)" << s * 8 << R"(}]})" << "\n";
      m << R"({"segment_id":"s)" << s << R"(","dataset":"d)" << s % 3 << R"(","stem_id":"b","notes":[{"onset_s":0.2,"offset_s":0.6,"pitch":60,"program":120}]})" << "\n";
    }
  }
  const std::string base = kCli + " augment --manifest " + (dir / "manifest.jsonl").string() +
                           " --cache-size 6 --count 12 --seed 5 --threads 3 --out-dir " + (dir / "out").string();
  const auto a = run_command(base + " --stats " + (dir / "a.json").string());
  ASSERT_EQ(a.exit_code, 0);
  const std::string mix_a = read_text((dir / "out" / "mix_000003.f32").string());
  const auto b = run_command(base + " --stats " + (dir / "b.json").string());
  ASSERT_EQ(b.exit_code, 0);
  EXPECT_EQ(a.out, b.out);
  EXPECT_EQ(read_text((dir / "a.json").string()), read_text((dir / "b.json").string()));
  EXPECT_EQ(mix_a, read_text((dir / "out" / "mix_000003.f32").string()));
  EXPECT_EQ(mix_a.size(), 32767u * 4u);
  EXPECT_EQ(run_command(kCli + " augment --manifest " + (dir / "manifest.jsonl").string() +
                        " --cache-size 60 --seed 1").exit_code, 2);
}
