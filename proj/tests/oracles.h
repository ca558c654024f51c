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


// Reference implementations used to check the library. Each one follows the
// textbook definition directly, with no shared code paths.

#ifndef FEDEMBED_TESTS_ORACLES_H_
#define FEDEMBED_TESTS_ORACLES_H_

#include <algorithm>
#include <cmath>
#include <functional>
#include <set>
#include <string>
#include <vector>

#include "fedembed/embedder.h"
#include "fedembed/random.h"
#include "fedembed/retrieval.h"

namespace fedembed::oracle {

using Matrix = std::vector<std::vector<double>>;

inline Matrix ToMatrix(const ModelParams& p) {
  Matrix m(p.d_out(), std::vector<double>(p.d_in()));
  for (size_t r = 0; r < p.d_out(); ++r) {
    for (size_t c = 0; c < p.d_in(); ++c) m[r][c] = p.w()(r, c);
  }
  return m;
}

inline std::vector<double> Apply(const Matrix& w, const Vec64& x) {
  std::vector<double> y(w.size(), 0.0);
  for (size_t r = 0; r < w.size(); ++r) {
    for (size_t c = 0; c < x.size(); ++c) y[r] += w[r][c] * x[c];
  }
  return y;
}

inline double Cos(const std::vector<double>& a, const std::vector<double>& b) {
  double ab = 0.0, aa = 0.0, bb = 0.0;
  for (size_t i = 0; i < a.size(); ++i) {
    ab += a[i] * b[i];
    aa += a[i] * a[i];
    bb += b[i] * b[i];
  }
  return ab / std::sqrt(aa * bb);
}

// -(1/N) sum_i log( exp(cos_ii/tau) / sum_j exp(cos_ij/tau) ), no shifting.
inline double InfoNce(const ModelParams& p, const Batch& b, double tau) {
  const Matrix w = ToMatrix(p);
  const size_t n = b.size();
  double total = 0.0;
  std::vector<std::vector<double>> hc;
  for (const auto& c : b.chunks) hc.push_back(Apply(w, c));
  for (size_t i = 0; i < n; ++i) {
    const auto hq = Apply(w, b.queries[i]);
    double denom = 0.0;
    double num = 0.0;
    for (size_t j = 0; j < n; ++j) {
      const double e = std::exp(Cos(hq, hc[j]) / tau);
      denom += e;
      if (i == j) num = e;
    }
    total += -std::log(num / denom);
  }
  return total / static_cast<double>(n);
}

// (1/N) sum_i (cos_local(q_i, c_i) - cos_global(q_i, c_i))^2.
inline double Kd(const ModelParams& local, const ModelParams& global,
                 const Batch& b) {
  const Matrix wl = ToMatrix(local);
  const Matrix wg = ToMatrix(global);
  double total = 0.0;
  for (size_t i = 0; i < b.size(); ++i) {
    const double zl = Cos(Apply(wl, b.queries[i]), Apply(wl, b.chunks[i]));
    const double zg = Cos(Apply(wg, b.queries[i]), Apply(wg, b.chunks[i]));
    total += (zl - zg) * (zl - zg);
  }
  return total / static_cast<double>(b.size());
}

// Central differences over every flattened parameter.
inline std::vector<double> NumericGrad(
    const ModelParams& p, const std::function<double(const ModelParams&)>& f,
    double h) {
  const Vec64 flat = p.Flatten();
  std::vector<double> g(flat.size());
  for (size_t i = 0; i < flat.size(); ++i) {
    Vec64 plus = flat;
    Vec64 minus = flat;
    plus[i] += h;
    minus[i] -= h;
    const double fp = f(ModelParams::Unflatten(p.d_out(), p.d_in(), plus));
    const double fm = f(ModelParams::Unflatten(p.d_out(), p.d_in(), minus));
    g[i] = (fp - fm) / (2.0 * h);
  }
  return g;
}

// max_i |a_i - n_i| / max(|a_i|, |n_i|, 1e-6).
inline double MaxRelError(const Vec64& analytic,
                          const std::vector<double>& numeric) {
  double worst = 0.0;
  for (size_t i = 0; i < numeric.size(); ++i) {
    const double scale =
        std::max({std::abs(analytic[i]), std::abs(numeric[i]), 1e-6});
    worst = std::max(worst, std::abs(analytic[i] - numeric[i]) / scale);
  }
  return worst;
}

inline Vec64 RandomVec(Rng& rng, size_t n, double lo, double hi) {
  Vec64 v(n);
  for (size_t i = 0; i < n; ++i) v[i] = rng.Uniform(lo, hi);
  return v;
}

inline Batch RandomBatch(Rng& rng, size_t n, size_t d_in) {
  Batch b;
  for (size_t i = 0; i < n; ++i) {
    b.queries.push_back(RandomVec(rng, d_in, -1.0, 1.0));
    b.chunks.push_back(RandomVec(rng, d_in, -1.0, 1.0));
  }
  return b;
}

// Full sort of every candidate: score descending, then id ascending.
inline std::vector<retrieval::Scored> FullSortKnn(
    const std::vector<std::pair<std::string, Vec64>>& items, const Vec64& q,
    size_t k) {
  std::vector<retrieval::Scored> all;
  for (const auto& [id, v] : items) {
    double qv = 0.0, qq = 0.0, vv = 0.0;
    for (size_t i = 0; i < q.size(); ++i) {
      qv += q[i] * v[i];
      qq += q[i] * q[i];
      vv += v[i] * v[i];
    }
    if (vv == 0.0) continue;
    all.push_back({id, qv / (std::sqrt(qq) * std::sqrt(vv))});
  }
  std::stable_sort(all.begin(), all.end(),
                   [](const retrieval::Scored& a, const retrieval::Scored& b) {
                     return a.chunk_id < b.chunk_id;
                   });
  std::stable_sort(all.begin(), all.end(),
                   [](const retrieval::Scored& a, const retrieval::Scored& b) {
                     return a.score > b.score;
                   });
  if (all.size() > k) all.resize(k);
  return all;
}

struct RetrievalOracle {
  std::vector<int> rel;  // rel[i] = 1 iff rank i+1 is golden
  std::vector<double> scores;
  size_t golden = 0;

  RetrievalOracle(const retrieval::RankedList& list,
                  const retrieval::Golden& g)
      : golden(g.size()) {
    for (const auto& s : list.ranked) {
      rel.push_back(g.count(s.chunk_id) ? 1 : 0);
      scores.push_back(s.score);
    }
  }

  size_t RelAt(size_t k) const {
    size_t n = 0;
    for (size_t i = 0; i < rel.size() && i < k; ++i) n += rel[i];
    return n;
  }
  double Hit(size_t k) const { return RelAt(k) >= 1 ? 1.0 : 0.0; }
  double Em(size_t k) const {
    return golden > 0 && RelAt(k) == golden ? 1.0 : 0.0;
  }
  double Mrr() const {
    for (size_t i = 0; i < rel.size(); ++i) {
      if (rel[i]) return 1.0 / static_cast<double>(i + 1);
    }
    return 0.0;
  }
  double Ap() const {
    if (golden == 0) return 0.0;
    double s = 0.0;
    for (size_t i = 0; i < rel.size(); ++i) {
      if (rel[i]) {
        s += static_cast<double>(RelAt(i + 1)) / static_cast<double>(i + 1);
      }
    }
    return s / static_cast<double>(golden);
  }
  double Dcg(size_t k) const {
    double s = 0.0;
    for (size_t i = 0; i < rel.size() && i < k; ++i) {
      if (rel[i]) s += 1.0 / std::log2(static_cast<double>(i) + 2.0);
    }
    return s;
  }
  double Idcg(size_t k) const {
    double s = 0.0;
    for (size_t i = 0; i < std::min(k, golden); ++i) {
      s += 1.0 / std::log2(static_cast<double>(i) + 2.0);
    }
    return s;
  }
  double Ndcg(size_t k) const {
    return Idcg(k) > 0.0 ? Dcg(k) / Idcg(k) : 0.0;
  }
  double Pre(size_t k) const {
    return static_cast<double>(RelAt(k)) / static_cast<double>(k);
  }
  double Rec(size_t k) const {
    return golden == 0 ? 0.0
                       : static_cast<double>(RelAt(k)) /
                             static_cast<double>(golden);
  }
  double Acc(size_t k, double theta) const {
    size_t n = 0;
    for (size_t i = 0; i < scores.size() && i < k; ++i) n += scores[i] > theta;
    return static_cast<double>(n) / static_cast<double>(k);
  }
  double F1() const {
    const double p = static_cast<double>(RelAt(1));
    const double r = Rec(1);
    return p + r > 0.0 ? 2.0 * p * r / (p + r) : 0.0;
  }

  retrieval::MetricValues All(double theta) const {
    retrieval::MetricValues v = {
        {"hit@1", Hit(1)},   {"hit@10", Hit(10)}, {"em", Em(10)},
        {"mrr", Mrr()},      {"map", Ap()},       {"ndcg", Ndcg(10)},
        {"dcg", Dcg(10)},    {"idcg", Idcg(10)},  {"f1", F1()}};
    for (size_t k : {1, 5, 10}) v.emplace_back("acc@" + std::to_string(k), Acc(k, theta));
    for (size_t k : {1, 5, 10}) v.emplace_back("rec@" + std::to_string(k), Rec(k));
    for (size_t k : {1, 5, 10}) v.emplace_back("pre@" + std::to_string(k), Pre(k));
    return v;
  }
};

// Longest common subsequence by enumerating every subsequence of `a`.
inline size_t BruteLcs(const std::vector<std::string>& a,
                       const std::vector<std::string>& b) {
  size_t best = 0;
  const size_t masks = size_t{1} << a.size();
  for (size_t m = 0; m < masks; ++m) {
    std::vector<std::string> sub;
    for (size_t i = 0; i < a.size(); ++i) {
      if (m & (size_t{1} << i)) sub.push_back(a[i]);
    }
    if (sub.size() <= best) continue;
    size_t j = 0;
    for (const auto& t : b) {
      if (j < sub.size() && sub[j] == t) ++j;
    }
    if (j == sub.size()) best = sub.size();
  }
  return best;
}

}  // namespace fedembed::oracle

#endif  // FEDEMBED_TESTS_ORACLES_H_
