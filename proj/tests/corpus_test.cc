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

#include <algorithm>
#include <filesystem>
#include <set>
#include <sstream>

#include "fedembed/corpus.h"
#include "fedembed/error.h"
#include "fedembed/io.h"

namespace fedembed::corpus {
namespace {

std::vector<std::string> Words(const std::string& s) {
  std::istringstream in(s);
  std::vector<std::string> out;
  for (std::string w; in >> w;) out.push_back(w);
  return out;
}

int64_t IndexOf(const std::string& token) { return std::stoll(token.substr(1)); }

CorpusSpec SmallSpec() {
  CorpusSpec s;
  s.n_clients = 3;
  s.pairs_per_client = {30, 50, 20};
  s.query_vocab_size = s.chunk_vocab_size = 60;
  s.eval_queries = 12;
  s.distractor_chunks = 25;
  return s;
}

TEST(CorpusTest, PartitionSizesAndCounts) {
  const CorpusSpec spec = SmallSpec();
  const GeneratedCorpus g = Generate(spec);
  const PartitionReport r = MakePartitionReport(g.pairs);
  ASSERT_EQ(r.clients.size(), 3u);
  EXPECT_EQ(r.clients.at(0).pairs, 30);
  EXPECT_EQ(r.clients.at(1).pairs, 50);
  EXPECT_EQ(r.clients.at(2).pairs, 20);
  EXPECT_EQ(r.total, 100);
  EXPECT_EQ(g.eval.size(), 12u);
  EXPECT_EQ(g.corpus.size(), 12u + 25u);
}

TEST(CorpusTest, DefaultsGiveTwoHundredChunkCorpus) {
  const GeneratedCorpus g = Generate(CorpusSpec{});
  EXPECT_EQ(g.pairs.size(), 1000u);
  EXPECT_EQ(g.eval.size(), 50u);
  EXPECT_EQ(g.corpus.size(), 200u);
}

TEST(CorpusTest, SurfacesAreDisjoint) {
  for (uint64_t seed : {1, 2, 3}) {
    CorpusSpec spec = SmallSpec();
    spec.seed = seed;
    const GeneratedCorpus g = Generate(spec);
    std::set<std::string> q, c;
    for (const auto& p : g.pairs) {
      for (const auto& w : Words(p.query)) q.insert(w);
      for (const auto& w : Words(p.chunk)) c.insert(w);
    }
    for (const auto& e : g.eval) for (const auto& w : Words(e.query)) q.insert(w);
    for (const auto& ch : g.corpus) for (const auto& w : Words(ch.text)) c.insert(w);
    for (const auto& w : q) EXPECT_EQ(c.count(w), 0u) << w;
  }
}

TEST(CorpusTest, ChunksContainBijectionImages) {
  const CorpusSpec spec = SmallSpec();
  GroundTruth truth;
  const GeneratedCorpus g = Generate(spec, &truth);
  std::vector<int64_t> sorted = truth.bijection;
  std::sort(sorted.begin(), sorted.end());
  for (int64_t i = 0; i < spec.query_vocab_size; ++i) EXPECT_EQ(sorted[i], i);

  for (const auto& p : g.pairs) {
    std::set<int64_t> chunk;
    for (const auto& w : Words(p.chunk)) chunk.insert(IndexOf(w));
    const auto q = Words(p.query);
    EXPECT_EQ(static_cast<int64_t>(q.size()), spec.tokens_per_query);
    EXPECT_EQ(static_cast<int64_t>(Words(p.chunk).size()), spec.tokens_per_chunk);
    int64_t matched = 0;
    for (const auto& w : q) matched += chunk.count(truth.bijection[IndexOf(w)]);
    EXPECT_GE(matched, spec.SignalTokens());
    const auto& slice = truth.client_slices[p.client_id];
    for (const auto& w : q) {
      EXPECT_NE(std::find(slice.begin(), slice.end(), IndexOf(w)), slice.end());
    }
  }
}

TEST(CorpusTest, ZeroSliceOverlapGivesDisjointSlices) {
  CorpusSpec spec = SmallSpec();
  spec.slice_overlap = 0.0;
  GroundTruth truth;
  Generate(spec, &truth);
  std::set<int64_t> seen;
  for (const auto& slice : truth.client_slices) {
    for (int64_t t : slice) EXPECT_TRUE(seen.insert(t).second);
  }
}

TEST(CorpusTest, FullSliceOverlapSharesVocabulary) {
  CorpusSpec spec = SmallSpec();
  spec.slice_overlap = 1.0;
  GroundTruth truth;
  Generate(spec, &truth);
  for (const auto& slice : truth.client_slices) {
    EXPECT_EQ(static_cast<int64_t>(slice.size()), spec.query_vocab_size);
  }
}

TEST(CorpusTest, DeterministicPerSeed) {
  const CorpusSpec spec = SmallSpec();
  const GeneratedCorpus a = Generate(spec);
  const GeneratedCorpus b = Generate(spec);
  EXPECT_EQ(a.pairs, b.pairs);
  EXPECT_EQ(a.eval, b.eval);
  EXPECT_EQ(a.corpus, b.corpus);
  CorpusSpec other = spec;
  other.seed = 43;
  EXPECT_NE(Generate(other).pairs, a.pairs);
}

TEST(CorpusTest, GoldenIdsResolveAndIdsAreUnique) {
  const GeneratedCorpus g = Generate(SmallSpec());
  std::set<std::string> ids;
  for (const auto& c : g.corpus) EXPECT_TRUE(ids.insert(c.chunk_id).second);
  for (const auto& e : g.eval) {
    ASSERT_FALSE(e.golden_ids.empty());
    for (const auto& id : e.golden_ids) EXPECT_EQ(ids.count(id), 1u);
  }
}

TEST(CorpusTest, ValidationNamesTheKey) {
  CorpusSpec spec;
  spec.overlap_fraction = 1.5;
  try {
    spec.Validate();
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kConfig);
    EXPECT_NE(std::string(e.what()).find("overlap_fraction"), std::string::npos);
  }
  CorpusSpec mismatch;
  mismatch.pairs_per_client = {1, 2};
  EXPECT_THROW(mismatch.Validate(), Error);
}

TEST(CorpusTest, JsonlRoundTrip) {
  const GeneratedCorpus g = Generate(SmallSpec());
  EXPECT_EQ(ParsePairs(PairsToJsonl(g.pairs), "p"), g.pairs);
  EXPECT_EQ(ParseEval(EvalToJsonl(g.eval), "e"), g.eval);
  EXPECT_EQ(ParseCorpus(CorpusToJsonl(g.corpus), "c"), g.corpus);
  EXPECT_EQ(PairsToJsonl(ParsePairs(PairsToJsonl(g.pairs), "p")),
            PairsToJsonl(g.pairs));
}

TEST(CorpusTest, ParseErrors) {
  try {
    ParsePairs("{\"query\": \"q\", \"chunk\": \"c\"}\n", "f");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kSchema);
  }
  try {
    ParseCorpus("{\"chunk_id\": \"a\", \"text\": \"x\"}\n{oops\n", "f");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kParse);
    EXPECT_NE(std::string(e.what()).find("2"), std::string::npos);
  }
  EXPECT_THROW(ParseCorpus("{\"chunk_id\": \"a\", \"text\": \"x\"}\n"
                           "{\"chunk_id\": \"a\", \"text\": \"y\"}\n",
                           "f"),
               Error);
  EXPECT_TRUE(ParseCorpus("\n\n", "f").empty());
}

TEST(CorpusTest, LoadEvalDetectsMissingGolden) {
  const auto dir = std::filesystem::temp_directory_path() / "fedembed_corpus_test";
  std::filesystem::remove_all(dir);
  WriteFile(dir / "eval.jsonl",
            "{\"query_id\":\"ev-1\",\"query\":\"q1\",\"golden_ids\":[\"x\"]}\n");
  WriteFile(dir / "corpus.jsonl", "{\"chunk_id\":\"y\",\"text\":\"c1\"}\n");
  try {
    LoadEval(dir / "eval.jsonl", dir / "corpus.jsonl");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kDataIntegrity);
  }
  std::filesystem::remove_all(dir);
}

}  // namespace
}  // namespace fedembed::corpus
