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

#include "fedembed/retrieval.h"

#include <algorithm>
#include <cmath>

#include "fedembed/error.h"
#include "fedembed/io.h"
#include "fedembed/logging.h"

namespace fedembed::retrieval {
namespace {

bool Before(const Scored& a, const Scored& b) {
  if (a.score != b.score) return a.score > b.score;
  return a.chunk_id < b.chunk_id;
}

size_t RelevantInTop(const RankedList& list, const Golden& golden, size_t k) {
  size_t n = 0;
  for (size_t i = 0; i < std::min(k, list.ranked.size()); ++i) {
    n += golden.count(list.ranked[i].chunk_id);
  }
  return n;
}

std::string KeyAt(const char* name, size_t k) {
  return std::string(name) + "@" + std::to_string(k);
}

}  // namespace

VectorIndex::VectorIndex(size_t dim, std::vector<IndexEntry> entries)
    : dim_(dim), entries_(std::move(entries)) {
  std::sort(entries_.begin(), entries_.end(),
            [](const IndexEntry& a, const IndexEntry& b) {
              return a.chunk_id < b.chunk_id;
            });
  for (size_t i = 0; i < entries_.size(); ++i) {
    if (entries_[i].embedding.size() != dim_) {
      throw DimensionError("index entry " + entries_[i].chunk_id +
                           " has the wrong dimension");
    }
    if (i > 0 && entries_[i].chunk_id == entries_[i - 1].chunk_id) {
      throw DataIntegrityError("duplicate chunk_id in index: " +
                               entries_[i].chunk_id);
    }
  }
}

bool VectorIndex::Contains(const std::string& chunk_id) const {
  auto it = std::lower_bound(
      entries_.begin(), entries_.end(), chunk_id,
      [](const IndexEntry& e, const std::string& id) { return e.chunk_id < id; });
  return it != entries_.end() && it->chunk_id == chunk_id;
}

VectorIndex BuildIndex(const ModelParams& params,
                       const FeatureExtractor& extractor,
                       const std::vector<corpus::Chunk>& corpus) {
  if (corpus.empty()) throw ConfigError("build_index: empty corpus");
  if (extractor.d_in() != params.d_in()) {
    throw DimensionError("build_index: extractor d_in " +
                         std::to_string(extractor.d_in()) + " vs model d_in " +
                         std::to_string(params.d_in()));
  }
  std::vector<IndexEntry> entries;
  entries.reserve(corpus.size());
  for (const auto& chunk : corpus) {
    IndexEntry e;
    e.chunk_id = chunk.chunk_id;
    e.embedding = Embed(params, extractor.Featurize(chunk.text).values);
    e.norm = L2Norm(e.embedding);
    e.degenerate = e.norm == 0.0;
    if (e.degenerate) {
      spdlog::warn("chunk {} has a zero embedding; excluded from retrieval",
                   chunk.chunk_id);
    }
    entries.push_back(std::move(e));
  }
  return VectorIndex(params.d_out(), std::move(entries));
}

RankedList Knn(const VectorIndex& index, const Vec64& query, size_t k) {
  if (k < 1) throw ConfigError("knn: k must be >= 1");
  if (query.size() != index.dim()) {
    throw DimensionError("knn: query dim " + std::to_string(query.size()) +
                         " vs index dim " + std::to_string(index.dim()));
  }
  const double qn = L2Norm(query);
  if (qn == 0.0) throw DegenerateInputError("knn: zero-norm query");

  std::vector<Scored> all;
  all.reserve(index.size());
  for (const auto& e : index.entries()) {
    if (e.degenerate) continue;
    all.push_back(Scored{e.chunk_id, Dot(query, e.embedding) / (qn * e.norm)});
  }
  const size_t keep = std::min(k, all.size());
  std::partial_sort(all.begin(), all.begin() + static_cast<ptrdiff_t>(keep),
                    all.end(), Before);
  all.resize(keep);
  return RankedList{"", std::move(all), k};
}

int MetricHit(const RankedList& list, const Golden& golden, size_t k) {
  return RelevantInTop(list, golden, k) > 0 ? 1 : 0;
}

int MetricEm(const RankedList& list, const Golden& golden, size_t k) {
  return !golden.empty() && RelevantInTop(list, golden, k) == golden.size()
             ? 1
             : 0;
}

double MetricMrr(const RankedList& list, const Golden& golden) {
  for (size_t i = 0; i < list.ranked.size(); ++i) {
    if (golden.count(list.ranked[i].chunk_id)) return 1.0 / (i + 1.0);
  }
  return 0.0;
}

double MetricAp(const RankedList& list, const Golden& golden) {
  if (golden.empty()) return 0.0;
  double sum = 0.0;
  size_t hits = 0;
  for (size_t i = 0; i < list.ranked.size(); ++i) {
    if (golden.count(list.ranked[i].chunk_id)) {
      ++hits;
      sum += static_cast<double>(hits) / (i + 1.0);
    }
  }
  return sum / static_cast<double>(golden.size());
}

DcgResult MetricDcg(const RankedList& list, const Golden& golden, size_t k) {
  DcgResult r;
  for (size_t i = 0; i < std::min(k, list.ranked.size()); ++i) {
    if (golden.count(list.ranked[i].chunk_id)) r.dcg += 1.0 / std::log2(i + 2.0);
  }
  for (size_t i = 0; i < std::min(k, golden.size()); ++i) {
    r.idcg += 1.0 / std::log2(i + 2.0);
  }
  r.ndcg = r.idcg > 0.0 ? r.dcg / r.idcg : 0.0;
  return r;
}

PrfResult MetricPrf(const RankedList& list, const Golden& golden, size_t k,
                    double theta) {
  PrfResult r;
  if (k < 1) throw ConfigError("metric_prf: k must be >= 1");
  const auto kd = static_cast<double>(k);
  r.pre = static_cast<double>(RelevantInTop(list, golden, k)) / kd;
  r.rec = golden.empty() ? 0.0
                         : static_cast<double>(RelevantInTop(list, golden, k)) /
                               static_cast<double>(golden.size());
  size_t above = 0;
  for (size_t i = 0; i < std::min(k, list.ranked.size()); ++i) {
    if (list.ranked[i].score > theta) ++above;
  }
  r.acc = static_cast<double>(above) / kd;

  const double p1 = static_cast<double>(RelevantInTop(list, golden, 1));
  const double r1 = golden.empty() ? 0.0 : p1 / golden.size();
  r.f1 = (p1 + r1) > 0.0 ? 2.0 * p1 * r1 / (p1 + r1) : 0.0;
  return r;
}

MetricValues QueryMetrics(const RankedList& list, const Golden& golden,
                          const EvalOptions& options) {
  MetricValues v;
  v.emplace_back("hit@1", MetricHit(list, golden, 1));
  v.emplace_back("hit@10", MetricHit(list, golden, 10));
  v.emplace_back("em", MetricEm(list, golden, kDepth));
  v.emplace_back("mrr", MetricMrr(list, golden));
  v.emplace_back("map", MetricAp(list, golden));
  const DcgResult dcg = MetricDcg(list, golden, kDepth);
  v.emplace_back("ndcg", dcg.ndcg);
  v.emplace_back("dcg", dcg.dcg);
  v.emplace_back("idcg", dcg.idcg);
  v.emplace_back("f1", MetricPrf(list, golden, 1, options.theta).f1);
  for (size_t k : kCutoffs) {
    const double acc = options.acc_mode == AccMode::kLabel
                           ? MetricHit(list, golden, k)
                           : MetricPrf(list, golden, k, options.theta).acc;
    v.emplace_back(KeyAt("acc", k), acc);
  }
  for (size_t k : kCutoffs) {
    v.emplace_back(KeyAt("rec", k), MetricPrf(list, golden, k, options.theta).rec);
  }
  for (size_t k : kCutoffs) {
    v.emplace_back(KeyAt("pre", k), MetricPrf(list, golden, k, options.theta).pre);
  }
  return v;
}

double MetricReport::Get(const std::string& name) const {
  for (const auto& [k, v] : values) {
    if (k == name) return v;
  }
  throw ConfigError("metric report has no entry " + name);
}

std::string MetricReport::ToJson(bool percent) const {
  OrderedJson j = OrderedJson::object();
  for (const auto& [k, v] : values) j[k] = percent ? 100.0 * v : v;
  return j.dump(2) + "\n";
}

std::string MetricReport::ToCsv(const std::string& run, bool percent) const {
  std::string out = "run,metric,value\n";
  for (const auto& [k, v] : values) {
    out += run + "," + k + "," + OrderedJson(percent ? 100.0 * v : v).dump() + "\n";
  }
  return out;
}

MetricReport Evaluate(const VectorIndex& index, const ModelParams& params,
                      const FeatureExtractor& extractor,
                      const std::vector<corpus::EvalQuery>& queries,
                      const EvalOptions& options) {
  if (queries.empty()) throw ConfigError("evaluate: empty eval set");
  std::vector<std::string> missing;
  for (const auto& q : queries) {
    for (const auto& g : q.golden_ids) {
      if (!index.Contains(g)) missing.push_back(g);
    }
  }
  if (!missing.empty()) {
    std::string list;
    for (const auto& m : missing) list += (list.empty() ? "" : ", ") + m;
    throw DataIntegrityError("golden ids absent from index: " + list);
  }

  MetricReport report;
  for (size_t i = 0; i < queries.size(); ++i) {
    const auto& q = queries[i];
    const Golden golden(q.golden_ids.begin(), q.golden_ids.end());
    const Vec64 h = Embed(params, extractor.Featurize(q.query).values);
    RankedList list{std::to_string(i), {}, kDepth};
    if (L2Norm(h) == 0.0) {
      spdlog::warn("eval query {} has a zero embedding; scored as a miss", i);
    } else {
      list = Knn(index, h, kDepth);
      list.query_id = std::to_string(i);
    }
    report.per_query.push_back(QueryMetrics(list, golden, options));
  }
  report.values = report.per_query.front();
  for (auto& [k, v] : report.values) v = 0.0;
  for (const auto& row : report.per_query) {
    for (size_t m = 0; m < row.size(); ++m) report.values[m].second += row[m].second;
  }
  for (auto& [k, v] : report.values) v /= static_cast<double>(queries.size());
  return report;
}

}  // namespace fedembed::retrieval
