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

#include "fedembed/corpus.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <set>
#include <unordered_set>

#include "fedembed/error.h"
#include "fedembed/io.h"
#include "fedembed/random.h"

namespace fedembed::corpus {
namespace {

constexpr uint64_t kBijectionStream = 1;
constexpr uint64_t kSliceStream = 2;
constexpr uint64_t kPairStream = 3;
constexpr uint64_t kEvalStream = 4;
constexpr uint64_t kDistractorStream = 5;
constexpr int kHeldOutAttempts = 1000;

std::string FormatToken(char prefix, int64_t index, int64_t vocab_size) {
  int width = 4;
  for (int64_t v = vocab_size - 1; v >= 10000; v /= 10) ++width;
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%c%0*lld", prefix, width,
                static_cast<long long>(index));
  return buf;
}

std::string FormatId(const char* prefix, size_t index) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%s-%06zu", prefix, index);
  return buf;
}

std::string Join(const std::vector<std::string>& tokens) {
  std::string out;
  for (size_t i = 0; i < tokens.size(); ++i) {
    if (i) out += ' ';
    out += tokens[i];
  }
  return out;
}

struct Generator {
  const CorpusSpec& spec;
  std::vector<int64_t> bijection;
  std::vector<std::vector<int64_t>> slices;

  // One (query, chunk) pair drawn from a client slice.
  std::pair<std::string, std::string> MakePair(Rng& rng, size_t client) const {
    const auto& slice = slices[client];
    const int64_t v = spec.query_vocab_size;
    const auto picks =
        rng.SampleWithoutReplacement(slice.size(), spec.tokens_per_query);
    std::vector<int64_t> query_idx;
    for (size_t p : picks) query_idx.push_back(slice[p]);

    std::unordered_set<int64_t> partners;
    for (int64_t t : query_idx) partners.insert(bijection[t]);

    std::vector<int64_t> chunk_idx;
    const int64_t signal = spec.SignalTokens();
    for (int64_t i = 0; i < signal; ++i) {
      chunk_idx.push_back(bijection[query_idx[i]]);
    }
    // Filler never contains a partner of any query token, so overlap 0
    // yields a chunk with no bijective link to its query.
    std::unordered_set<int64_t> used(chunk_idx.begin(), chunk_idx.end());
    while (static_cast<int64_t>(chunk_idx.size()) < spec.tokens_per_chunk) {
      const auto c = static_cast<int64_t>(rng.Below(v));
      if (partners.count(c) || used.count(c)) continue;
      used.insert(c);
      chunk_idx.push_back(c);
    }
    rng.Shuffle(chunk_idx);

    std::vector<std::string> q;
    for (int64_t t : query_idx) q.push_back(QueryToken(t, v));
    std::vector<std::string> c;
    for (int64_t t : chunk_idx) c.push_back(ChunkToken(t, v));
    return {Join(q), Join(c)};
  }
};

template <typename T>
T GetField(const nlohmann::json& record, const char* key, size_t line,
           const std::string& source) {
  const auto& v = RequireKey(record, key, line, source);
  try {
    return v.get<T>();
  } catch (const nlohmann::json::exception&) {
    throw SchemaError(source + ":" + std::to_string(line) + ": field \"" +
                      key + "\" has the wrong type");
  }
}

template <typename Fn>
void ForEachRecord(const std::string& text, const std::string& source,
                   Fn&& fn) {
  const auto lines = SplitLines(text);
  for (size_t i = 0; i < lines.size(); ++i) {
    if (lines[i].empty()) continue;
    fn(ParseJsonLine(lines[i], i + 1, source), i + 1);
  }
}

void RequireNonEmpty(const std::string& value, const char* key, size_t line,
                     const std::string& source) {
  if (value.empty()) {
    throw SchemaError(source + ":" + std::to_string(line) + ": field \"" +
                      key + "\" must be nonempty");
  }
}

}  // namespace

std::string QueryToken(int64_t index, int64_t vocab_size) {
  return FormatToken('q', index, vocab_size);
}

std::string ChunkToken(int64_t index, int64_t vocab_size) {
  return FormatToken('c', index, vocab_size);
}

int64_t CorpusSpec::SignalTokens() const {
  // Guard against 0.1 * 10 = 1.0000000000000002 style rounding.
  return static_cast<int64_t>(
      std::ceil(overlap_fraction * static_cast<double>(tokens_per_query) -
                1e-9));
}

void CorpusSpec::Validate() const {
  auto fail = [](const std::string& key, const std::string& why) {
    throw ConfigError("corpus." + key + ": " + why);
  };
  if (n_clients < 1) fail("n_clients", "must be >= 1");
  if (static_cast<int64_t>(pairs_per_client.size()) != n_clients) {
    fail("pairs_per_client", "length must equal n_clients");
  }
  for (int64_t n : pairs_per_client) {
    if (n < 1) fail("pairs_per_client", "every entry must be >= 1");
  }
  if (query_vocab_size < 1) fail("query_vocab_size", "must be >= 1");
  if (query_vocab_size != chunk_vocab_size) {
    fail("chunk_vocab_size", "must equal query_vocab_size");
  }
  if (tokens_per_query < 1 || tokens_per_query > query_vocab_size) {
    fail("tokens_per_query", "must be in [1, query_vocab_size]");
  }
  if (tokens_per_chunk < 1 || tokens_per_chunk > chunk_vocab_size) {
    fail("tokens_per_chunk", "must be in [1, chunk_vocab_size]");
  }
  if (!(overlap_fraction >= 0.0 && overlap_fraction <= 1.0)) {
    fail("overlap_fraction", "must be in [0, 1]");
  }
  if (SignalTokens() > tokens_per_chunk) {
    fail("tokens_per_chunk",
         "must hold ceil(overlap_fraction * tokens_per_query) signal tokens");
  }
  if (tokens_per_chunk - SignalTokens() > chunk_vocab_size - tokens_per_query) {
    fail("tokens_per_chunk", "not enough non-partner tokens for filler");
  }
  if (!(slice_overlap >= 0.0 && slice_overlap <= 1.0)) {
    fail("slice_overlap", "must be in [0, 1]");
  }
  if (query_vocab_size / n_clients < 1) {
    fail("query_vocab_size", "must be >= n_clients");
  }
  const int64_t base = query_vocab_size / n_clients;
  if (base < tokens_per_query && slice_overlap == 0.0) {
    fail("tokens_per_query", "exceeds the per-client vocabulary slice");
  }
  if (eval_queries < 1) fail("eval_queries", "must be >= 1");
  int64_t total = 0;
  for (int64_t n : pairs_per_client) total += n;
  if (distractor_chunks < 0 || distractor_chunks > total) {
    fail("distractor_chunks", "must be in [0, total training pairs]");
  }
}

GeneratedCorpus Generate(const CorpusSpec& spec, GroundTruth* truth) {
  spec.Validate();
  const int64_t v = spec.query_vocab_size;
  const auto k = static_cast<size_t>(spec.n_clients);

  Generator gen{spec, {}, {}};
  {
    Rng rng(DeriveSeed({spec.seed, kBijectionStream}));
    for (size_t c : rng.Permutation(static_cast<size_t>(v))) {
      gen.bijection.push_back(static_cast<int64_t>(c));
    }
  }
  {
    // Client k owns a window of a shuffled vocabulary starting at k*V/K.
    // Width grows linearly from V/K (disjoint) to V (shared) with
    // slice_overlap.
    Rng rng(DeriveSeed({spec.seed, kSliceStream}));
    const auto perm = rng.Permutation(static_cast<size_t>(v));
    const double base = static_cast<double>(v) / static_cast<double>(k);
    auto width = static_cast<int64_t>(std::llround(
        base * (1.0 + spec.slice_overlap * static_cast<double>(k - 1))));
    width = std::clamp<int64_t>(width, spec.tokens_per_query, v);
    for (size_t c = 0; c < k; ++c) {
      const auto start = static_cast<int64_t>(
          std::floor(static_cast<double>(c) * base));
      std::vector<int64_t> slice;
      for (int64_t i = 0; i < width; ++i) {
        slice.push_back(static_cast<int64_t>(perm[(start + i) % v]));
      }
      gen.slices.push_back(std::move(slice));
    }
  }

  GeneratedCorpus out;
  std::set<std::string> train_queries;
  for (size_t c = 0; c < k; ++c) {
    Rng rng(DeriveSeed({spec.seed, kPairStream, c}));
    for (int64_t i = 0; i < spec.pairs_per_client[c]; ++i) {
      auto [query, chunk] = gen.MakePair(rng, c);
      train_queries.insert(query);
      out.pairs.push_back(TrainPair{std::move(query), std::move(chunk),
                                    FormatId("tr", out.pairs.size()),
                                    static_cast<int64_t>(c)});
    }
  }

  Rng eval_rng(DeriveSeed({spec.seed, kEvalStream}));
  std::set<std::string> eval_queries;
  for (int64_t e = 0; e < spec.eval_queries; ++e) {
    const size_t c = static_cast<size_t>(e) % k;
    for (int attempt = 0;; ++attempt) {
      if (attempt == kHeldOutAttempts) {
        throw ConfigError(
            "corpus: cannot draw held-out eval queries; vocabulary too small");
      }
      auto [query, chunk] = gen.MakePair(eval_rng, c);
      if (train_queries.count(query) || eval_queries.count(query)) continue;
      eval_queries.insert(query);
      const std::string id = FormatId("ev", static_cast<size_t>(e));
      out.eval.push_back(EvalQuery{std::move(query), {id}});
      out.corpus.push_back(Chunk{id, std::move(chunk)});
      break;
    }
  }

  Rng distractor_rng(DeriveSeed({spec.seed, kDistractorStream}));
  for (size_t i : distractor_rng.SampleWithoutReplacement(
           out.pairs.size(), static_cast<size_t>(spec.distractor_chunks))) {
    out.corpus.push_back(Chunk{out.pairs[i].chunk_id, out.pairs[i].chunk});
  }
  std::sort(out.corpus.begin(), out.corpus.end(),
            [](const Chunk& a, const Chunk& b) {
              return a.chunk_id < b.chunk_id;
            });

  if (truth) {
    truth->bijection = gen.bijection;
    truth->client_slices = gen.slices;
  }
  return out;
}

std::string PairsToJsonl(const std::vector<TrainPair>& pairs) {
  std::string out;
  for (const auto& p : pairs) {
    OrderedJson j;
    j["query"] = p.query;
    j["chunk"] = p.chunk;
    j["chunk_id"] = p.chunk_id;
    j["client_id"] = p.client_id;
    out += j.dump();
    out += '\n';
  }
  return out;
}

std::string EvalToJsonl(const std::vector<EvalQuery>& eval) {
  std::string out;
  for (const auto& q : eval) {
    OrderedJson j;
    j["query"] = q.query;
    j["golden_ids"] = q.golden_ids;
    out += j.dump();
    out += '\n';
  }
  return out;
}

std::string CorpusToJsonl(const std::vector<Chunk>& corpus) {
  std::string out;
  for (const auto& c : corpus) {
    OrderedJson j;
    j["chunk_id"] = c.chunk_id;
    j["text"] = c.text;
    out += j.dump();
    out += '\n';
  }
  return out;
}

std::vector<TrainPair> ParsePairs(const std::string& text,
                                  const std::string& source) {
  std::vector<TrainPair> pairs;
  std::set<std::string> ids;
  ForEachRecord(text, source, [&](const nlohmann::json& r, size_t line) {
    TrainPair p;
    p.query = GetField<std::string>(r, "query", line, source);
    p.chunk = GetField<std::string>(r, "chunk", line, source);
    p.chunk_id = GetField<std::string>(r, "chunk_id", line, source);
    p.client_id = GetField<int64_t>(r, "client_id", line, source);
    RequireNonEmpty(p.query, "query", line, source);
    RequireNonEmpty(p.chunk, "chunk", line, source);
    RequireNonEmpty(p.chunk_id, "chunk_id", line, source);
    if (p.client_id < 0) {
      throw SchemaError(source + ":" + std::to_string(line) +
                        ": client_id must be >= 0");
    }
    if (!ids.insert(p.chunk_id).second) {
      throw SchemaError(source + ":" + std::to_string(line) +
                        ": duplicate chunk_id \"" + p.chunk_id + "\"");
    }
    pairs.push_back(std::move(p));
  });
  return pairs;
}

std::vector<EvalQuery> ParseEval(const std::string& text,
                                 const std::string& source) {
  std::vector<EvalQuery> out;
  ForEachRecord(text, source, [&](const nlohmann::json& r, size_t line) {
    EvalQuery q;
    q.query = GetField<std::string>(r, "query", line, source);
    q.golden_ids =
        GetField<std::vector<std::string>>(r, "golden_ids", line, source);
    RequireNonEmpty(q.query, "query", line, source);
    if (q.golden_ids.empty()) {
      throw SchemaError(source + ":" + std::to_string(line) +
                        ": golden_ids must be nonempty");
    }
    out.push_back(std::move(q));
  });
  return out;
}

std::vector<Chunk> ParseCorpus(const std::string& text,
                               const std::string& source) {
  std::vector<Chunk> out;
  std::set<std::string> ids;
  ForEachRecord(text, source, [&](const nlohmann::json& r, size_t line) {
    Chunk c;
    c.chunk_id = GetField<std::string>(r, "chunk_id", line, source);
    c.text = GetField<std::string>(r, "text", line, source);
    RequireNonEmpty(c.chunk_id, "chunk_id", line, source);
    if (!ids.insert(c.chunk_id).second) {
      throw SchemaError(source + ":" + std::to_string(line) +
                        ": duplicate chunk_id \"" + c.chunk_id + "\"");
    }
    out.push_back(std::move(c));
  });
  return out;
}

void SavePairs(const std::vector<TrainPair>& pairs,
               const std::filesystem::path& path) {
  WriteFile(path, PairsToJsonl(pairs));
}

std::vector<TrainPair> LoadPairs(const std::filesystem::path& path) {
  return ParsePairs(ReadFile(path), path.string());
}

void SaveEval(const EvalData& data, const std::filesystem::path& eval_path,
              const std::filesystem::path& corpus_path) {
  WriteFile(eval_path, EvalToJsonl(data.queries));
  WriteFile(corpus_path, CorpusToJsonl(data.corpus));
}

EvalData LoadEval(const std::filesystem::path& eval_path,
                  const std::filesystem::path& corpus_path) {
  EvalData data;
  data.queries = ParseEval(ReadFile(eval_path), eval_path.string());
  data.corpus = ParseCorpus(ReadFile(corpus_path), corpus_path.string());
  std::set<std::string> ids;
  for (const auto& c : data.corpus) ids.insert(c.chunk_id);
  std::vector<std::string> missing;
  for (const auto& q : data.queries) {
    for (const auto& g : q.golden_ids) {
      if (!ids.count(g)) missing.push_back(g);
    }
  }
  if (!missing.empty()) {
    std::string list;
    for (const auto& m : missing) list += (list.empty() ? "" : ", ") + m;
    throw DataIntegrityError("golden ids absent from corpus: " + list);
  }
  return data;
}

PartitionReport MakePartitionReport(const std::vector<TrainPair>& pairs) {
  PartitionReport report;
  for (const auto& p : pairs) {
    ClientStats& s = report.clients[p.client_id];
    ++s.pairs;
    ++report.total;
    size_t start = 0;
    while (start <= p.query.size()) {
      size_t end = p.query.find(' ', start);
      if (end == std::string::npos) end = p.query.size();
      if (end > start) ++s.query_token_histogram[p.query.substr(start, end - start)];
      start = end + 1;
    }
  }
  return report;
}

}  // namespace fedembed::corpus
