// Copyright 2026 The FedEmbed Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


#include <gtest/gtest.h>

#include <filesystem>

#include "fedembed/cli.h"
#include "fedembed/io.h"

namespace fedembed::cli {
namespace {

namespace fs = std::filesystem;

int Cli(std::vector<std::string> args) {
  args.insert(args.begin(), "fedembed");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  return RunCli(static_cast<int>(argv.size()), argv.data());
}

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("fedembed_cli_" +
            std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
    WriteFile(dir_ / "cfg.json", R"({
      "corpus": {"n_clients": 2, "pairs_per_client": [20, 20],
                 "query_vocab_size": 32, "chunk_vocab_size": 32,
                 "eval_queries": 6, "distractor_chunks": 10},
      "model": {"d_in": 8, "d_out": 3},
      "fed": {"rounds": 2, "lr": 0.01},
      "he": {"modulus_bits": 512}
    })");
  }
  void TearDown() override { fs::remove_all(dir_); }
  std::string P(const std::string& rel) const { return (dir_ / rel).string(); }

  fs::path dir_;
};

TEST_F(CliTest, FullPipelineIsDeterministic) {
  for (const std::string run : {"a", "b"}) {
    ASSERT_EQ(Cli({"gen", "--config", P("cfg.json"), "--out", P(run + "/data")}), 0);
    ASSERT_EQ(Cli({"train", "--config", P("cfg.json"), "--data", P(run + "/data"),
                   "--mode", "fede4rag", "--out", P(run + "/train"),
                   "--he-test-mode", "--transcript"}),
              0);
    ASSERT_EQ(Cli({"eval-retrieval", "--checkpoint", P(run + "/train/model.json"),
                   "--data", P(run + "/data"), "--out", P(run + "/eval")}),
              0);
  }
  for (const char* f :
       {"data/pairs_client_0.jsonl", "data/pairs_client_1.jsonl", "data/eval.jsonl",
        "data/corpus.jsonl", "data/manifest.json", "train/model.json",
        "train/rounds.jsonl", "train/manifest.json", "train/transcript.jsonl",
        "train/checkpoints/round_2.json", "eval/retrieval_report.json",
        "eval/retrieval_report.csv"}) {
    EXPECT_EQ(ReadFile(P(std::string("a/") + f)), ReadFile(P(std::string("b/") + f)))
        << f;
  }
}

TEST_F(CliTest, SeedOverrideChangesData) {
  ASSERT_EQ(Cli({"gen", "--config", P("cfg.json"), "--out", P("x"), "--seed", "1"}), 0);
  ASSERT_EQ(Cli({"gen", "--config", P("cfg.json"), "--out", P("y"), "--seed", "2"}), 0);
  EXPECT_NE(ReadFile(P("x/corpus.jsonl")), ReadFile(P("y/corpus.jsonl")));
}

TEST_F(CliTest, ConfigErrorsExitTwo) {
  WriteFile(dir_ / "bad.json", R"({"corpus": {"overlap_fraction": 1.5}})");
  EXPECT_EQ(Cli({"gen", "--config", P("bad.json"), "--out", P("o")}), kExitConfig);
  WriteFile(dir_ / "unk.json", R"({"fed": {"learning_rate": 1}})");
  EXPECT_EQ(Cli({"gen", "--config", P("unk.json"), "--out", P("o")}), kExitConfig);
  WriteFile(dir_ / "typ.json", R"({"fed": {"rounds": "many"}})");
  EXPECT_EQ(Cli({"gen", "--config", P("typ.json"), "--out", P("o")}), kExitConfig);
  EXPECT_EQ(Cli({"frobnicate"}), kExitConfig);
  EXPECT_EQ(Cli({"gen"}), kExitConfig);
}

TEST_F(CliTest, MissingFilesExitThree) {
  EXPECT_EQ(Cli({"gen", "--config", P("nope.json"), "--out", P("o")}), kExitIo);
  EXPECT_EQ(Cli({"train", "--data", P("nodata"), "--mode", "fedavg", "--out", P("o")}),
            kExitIo);
}

TEST_F(CliTest, UnknownModeExitTwo) {
  ASSERT_EQ(Cli({"gen", "--config", P("cfg.json"), "--out", P("d")}), 0);
  EXPECT_EQ(Cli({"train", "--data", P("d"), "--mode", "fedprox", "--out", P("o")}),
            kExitConfig);
}

TEST_F(CliTest, MissingGoldenExitFive) {
  ASSERT_EQ(Cli({"gen", "--config", P("cfg.json"), "--out", P("d")}), 0);
  ASSERT_EQ(Cli({"train", "--config", P("cfg.json"), "--data", P("d"), "--mode",
                 "vanilla", "--out", P("t")}),
            0);
  WriteFile(dir_ / "d/corpus.jsonl", "{\"chunk_id\":\"zz\",\"text\":\"c0001\"}\n");
  EXPECT_EQ(Cli({"eval-retrieval", "--checkpoint", P("t/model.json"), "--data", P("d"),
                 "--out", P("e")}),
            kExitDataIntegrity);
}

TEST_F(CliTest, EvalTextAndCompare) {
  WriteFile(dir_ / "answers.jsonl",
            "{\"query_id\":\"q1\",\"candidate\":\"a x c\",\"reference\":\"a b c\"}\n");
  ASSERT_EQ(Cli({"eval-text", "--answers", P("answers.jsonl"), "--out", P("g")}), 0);
  const std::string report = ReadFile(P("g/gen_report.json"));
  EXPECT_NE(report.find("\"wer\""), std::string::npos);

  WriteFile(dir_ / "r1.json", R"({"mrr": 0.5, "hit@10": 1.0})");
  WriteFile(dir_ / "r2.json", R"({"mrr": 0.25, "hit@10": 0.5})");
  WriteFile(dir_ / "r3.json", R"({"mrr": 0.25})");
  ASSERT_EQ(Cli({"compare", P("r1.json"), P("r2.json"), "--out", P("cmp.csv")}), 0);
  EXPECT_EQ(ReadFile(P("cmp.csv")), "metric," + P("r1.json") + "," + P("r2.json") +
                                        "\nmrr,0.5,0.25\nhit@10,1.0,0.5\n");
  EXPECT_EQ(Cli({"compare", P("r1.json"), P("r3.json")}), kExitConfig);
}

TEST(RunConfigTest, JsonRoundTrip) {
  RunConfig cfg;
  cfg.fed.mode = fed::Mode::kFedAvg;
  cfg.eval.acc_mode = retrieval::AccMode::kLabel;
  cfg.corpus.slice_overlap = 0.0;
  const RunConfig back = RunConfig::FromJson(cfg.ToJson().dump(), "mem");
  EXPECT_EQ(back.ToJson(), cfg.ToJson());
}

TEST(ExitCodeTest, Mapping) {
  EXPECT_EQ(ExitCodeFor(ErrorKind::kSchema), 2);
  EXPECT_EQ(ExitCodeFor(ErrorKind::kIo), 3);
  EXPECT_EQ(ExitCodeFor(ErrorKind::kOverflow), 4);
  EXPECT_EQ(ExitCodeFor(ErrorKind::kDataIntegrity), 5);
}

}  // namespace
}  // namespace fedembed::cli
