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

// Exact cosine k-NN over an embedded chunk corpus, plus the upstream
// retrieval metrics: presence (hit, EM), order (MRR, MAP, DCG family) and
// threshold/label rates (acc, rec, pre, F1).

#ifndef FEDEMBED_RETRIEVAL_H_
#define FEDEMBED_RETRIEVAL_H_

#include <set>
#include <string>
#include <utility>
#include <vector>

#include "fedembed/corpus.h"
#include "fedembed/embedder.h"
#include "fedembed/tensor.h"

namespace fedembed::retrieval {

struct IndexEntry {
  std::string chunk_id;
  Vec64 embedding;
  double norm = 0.0;
  // Zero embeddings stay in the index (so their ids resolve) but are never
  // returned by Knn.
  bool degenerate = false;
};

class VectorIndex {
 public:
  VectorIndex(size_t dim, std::vector<IndexEntry> entries);

  size_t dim() const { return dim_; }
  size_t size() const { return entries_.size(); }
  const std::vector<IndexEntry>& entries() const { return entries_; }
  bool Contains(const std::string& chunk_id) const;

 private:
  size_t dim_;
  std::vector<IndexEntry> entries_;  // sorted by chunk_id
};

VectorIndex BuildIndex(const ModelParams& params,
                       const FeatureExtractor& extractor,
                       const std::vector<corpus::Chunk>& corpus);

struct Scored {
  std::string chunk_id;
  double score = 0.0;
  bool operator==(const Scored&) const = default;
};

struct RankedList {
  std::string query_id;
  std::vector<Scored> ranked;  // descending score, ties by ascending id
  size_t k = 0;
};

using Golden = std::set<std::string>;

// Top-k by descending cosine. DegenerateInputError on a zero query.
RankedList Knn(const VectorIndex& index, const Vec64& query, size_t k);

int MetricHit(const RankedList& list, const Golden& golden, size_t k);
// 1 iff every golden id is within the top k.
int MetricEm(const RankedList& list, const Golden& golden, size_t k);
double MetricMrr(const RankedList& list, const Golden& golden);
double MetricAp(const RankedList& list, const Golden& golden);

struct DcgResult {
  double dcg = 0.0;
  double idcg = 0.0;
  double ndcg = 0.0;
};
DcgResult MetricDcg(const RankedList& list, const Golden& golden, size_t k);

struct PrfResult {
  double pre = 0.0;
  double rec = 0.0;
  double acc = 0.0;
  double f1 = 0.0;  // harmonic mean of precision@1 and recall@1
};
PrfResult MetricPrf(const RankedList& list, const Golden& golden, size_t k,
                    double theta);

enum class AccMode { kThreshold, kLabel };

struct EvalOptions {
  double theta = 0.5;
  AccMode acc_mode = AccMode::kThreshold;
};

// Fixed cutoffs reported for acc/rec/pre, and the retrieval depth.
inline constexpr size_t kCutoffs[] = {1, 5, 10};
inline constexpr size_t kDepth = 10;

// Ordered metric name -> value.
using MetricValues = std::vector<std::pair<std::string, double>>;

// Every reported metric for one query, in report order.
MetricValues QueryMetrics(const RankedList& list, const Golden& golden,
                          const EvalOptions& options);

struct MetricReport {
  MetricValues values;
  std::vector<MetricValues> per_query;

  double Get(const std::string& name) const;
  std::string ToJson(bool percent) const;
  std::string ToCsv(const std::string& run, bool percent) const;
};

// Mean over queries. DataIntegrityError listing golden ids not in the index.
MetricReport Evaluate(const VectorIndex& index, const ModelParams& params,
                      const FeatureExtractor& extractor,
                      const std::vector<corpus::EvalQuery>& queries,
                      const EvalOptions& options);

}  // namespace fedembed::retrieval

#endif  // FEDEMBED_RETRIEVAL_H_
