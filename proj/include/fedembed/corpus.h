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

// Synthetic query/chunk corpora with a hidden token bijection.
//
// Queries are written in a query vocabulary ("q0001 q0420 ...") and chunks
// in a disjoint chunk vocabulary ("c0007 ..."). A secret bijection B links
// the two: a chunk that answers a query contains B(t) for a fraction of the
// query's tokens t. Since no surface string is shared, an untrained
// bag-of-words encoder retrieves at chance and any lift comes from learning.
//
// Clients draw query tokens from their own window of a shuffled query
// vocabulary. `slice_overlap` = 0 gives disjoint windows (maximally non-IID),
// 1 gives every client the full vocabulary.

#ifndef FEDEMBED_CORPUS_H_
#define FEDEMBED_CORPUS_H_

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace fedembed::corpus {

struct TrainPair {
  std::string query;
  std::string chunk;
  std::string chunk_id;
  int64_t client_id = 0;

  bool operator==(const TrainPair&) const = default;
};

struct EvalQuery {
  std::string query;
  std::vector<std::string> golden_ids;

  bool operator==(const EvalQuery&) const = default;
};

struct Chunk {
  std::string chunk_id;
  std::string text;

  bool operator==(const Chunk&) const = default;
};

struct CorpusSpec {
  int64_t n_clients = 5;
  std::vector<int64_t> pairs_per_client = {200, 200, 200, 200, 200};
  int64_t query_vocab_size = 128;
  int64_t chunk_vocab_size = 128;
  int64_t tokens_per_chunk = 16;
  int64_t tokens_per_query = 8;
  double overlap_fraction = 1.0;
  int64_t distractor_chunks = 150;
  int64_t eval_queries = 50;
  double slice_overlap = 0.5;
  uint64_t seed = 42;

  // Throws ConfigError naming the offending key.
  void Validate() const;
  // ceil(overlap_fraction * tokens_per_query)
  int64_t SignalTokens() const;
};

struct GeneratedCorpus {
  std::vector<TrainPair> pairs;
  std::vector<EvalQuery> eval;
  std::vector<Chunk> corpus;
};

// Also exposes the hidden structure so tests can check soundness.
struct GroundTruth {
  std::vector<int64_t> bijection;                 // query index -> chunk index
  std::vector<std::vector<int64_t>> client_slices;  // query token indices
};

GeneratedCorpus Generate(const CorpusSpec& spec,
                         GroundTruth* truth = nullptr);

std::string QueryToken(int64_t index, int64_t vocab_size);
std::string ChunkToken(int64_t index, int64_t vocab_size);

// JSONL in the exact key order of the external formats.
std::string PairsToJsonl(const std::vector<TrainPair>& pairs);
std::string EvalToJsonl(const std::vector<EvalQuery>& eval);
std::string CorpusToJsonl(const std::vector<Chunk>& corpus);

std::vector<TrainPair> ParsePairs(const std::string& text,
                                  const std::string& source);
std::vector<EvalQuery> ParseEval(const std::string& text,
                                 const std::string& source);
std::vector<Chunk> ParseCorpus(const std::string& text,
                               const std::string& source);

void SavePairs(const std::vector<TrainPair>& pairs,
               const std::filesystem::path& path);
std::vector<TrainPair> LoadPairs(const std::filesystem::path& path);

struct EvalData {
  std::vector<EvalQuery> queries;
  std::vector<Chunk> corpus;
};

void SaveEval(const EvalData& data, const std::filesystem::path& eval_path,
              const std::filesystem::path& corpus_path);
// Checks that every golden id exists in the corpus (DataIntegrityError).
EvalData LoadEval(const std::filesystem::path& eval_path,
                  const std::filesystem::path& corpus_path);

struct ClientStats {
  int64_t pairs = 0;
  std::map<std::string, int64_t> query_token_histogram;
};

struct PartitionReport {
  std::map<int64_t, ClientStats> clients;
  int64_t total = 0;
};

PartitionReport MakePartitionReport(const std::vector<TrainPair>& pairs);

}  // namespace fedembed::corpus

#endif  // FEDEMBED_CORPUS_H_
