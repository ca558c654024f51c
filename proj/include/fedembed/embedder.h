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

// Trainable text encoder: hashed bag-of-words features followed by a single
// linear map W (d_out x d_in). Two training objectives are provided, both
// with analytic gradients with respect to W:
//
//   * InfoNCE over in-batch chunk negatives, with cosine similarity and
//     temperature tau.
//   * A similarity-matching distillation penalty: mean squared difference
//     between the local model's positive-pair cosines and those of a frozen
//     teacher (the broadcast global model).

#ifndef FEDEMBED_EMBEDDER_H_
#define FEDEMBED_EMBEDDER_H_

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "fedembed/tensor.h"

namespace fedembed {

struct Features {
  Vec64 values;
  // True when the text had no tokens; `values` is then all zeros.
  bool degenerate = false;
};

class FeatureExtractor {
 public:
  FeatureExtractor(size_t d_in, uint64_t hash_seed);

  size_t d_in() const { return d_in_; }
  uint64_t hash_seed() const { return hash_seed_; }

  // Bucket in [0, d_in) for a single token.
  size_t Bucket(std::string_view token) const;

  // Splits on ' ', counts buckets, L2-normalizes.
  Features Featurize(std::string_view text) const;

 private:
  size_t d_in_;
  uint64_t hash_seed_;
};

class ModelParams {
 public:
  ModelParams() = default;
  explicit ModelParams(Mat64 w) : w_(std::move(w)) {}

  // Entries drawn uniformly from [-scale, scale].
  static ModelParams RandomUniform(size_t d_out, size_t d_in, uint64_t seed,
                                   double scale = 0.05);

  // Row-major inverse of Flatten().
  static ModelParams Unflatten(size_t d_out, size_t d_in, const Vec64& flat);

  size_t d_in() const { return w_.cols(); }
  size_t d_out() const { return w_.rows(); }
  size_t size() const { return w_.rows() * w_.cols(); }
  const Mat64& w() const { return w_; }

  Vec64 Flatten() const;

  // {"d_in": int, "d_out": int, "w": [row-major, %.17g]}
  std::string ToJson() const;
  static ModelParams FromJson(std::string_view text, const std::string& source);

  bool operator==(const ModelParams&) const = default;

 private:
  Mat64 w_;
};

// Aligned (query, chunk) feature vectors; pair i is the positive for query i.
struct Batch {
  std::vector<Vec64> queries;
  std::vector<Vec64> chunks;

  size_t size() const { return queries.size(); }
  // DimensionError unless sizes agree and N >= 1.
  void Validate() const;
};

using SimRow = Vec64;

struct LossAndGrad {
  double loss = 0.0;
  Vec64 grad;  // flattened row-major, d_out * d_in
};

// h = W x.
Vec64 Embed(const ModelParams& params, const Vec64& x);

double InfoNceLoss(const ModelParams& params, const Batch& batch, double tau);
Vec64 InfoNceGrad(const ModelParams& params, const Batch& batch, double tau);
LossAndGrad InfoNce(const ModelParams& params, const Batch& batch, double tau);

// z_i = cos(W q_i, W c_i) for every pair in the batch.
SimRow PairSimilarities(const ModelParams& params, const Batch& batch);

double KdLoss(const SimRow& z_local, const SimRow& z_global);
// Gradient of KdLoss(PairSimilarities(local), PairSimilarities(global)) with
// respect to the local parameters; the global model is held fixed.
Vec64 KdGrad(const ModelParams& local, const ModelParams& global,
             const Batch& batch);
LossAndGrad Kd(const ModelParams& local, const ModelParams& global,
               const Batch& batch);

double CombinedLoss(const ModelParams& params, const ModelParams& teacher,
                    const Batch& batch, double tau, double lambda_kd);

struct StepResult {
  ModelParams params;
  double loss_before = 0.0;  // combined loss at the starting point
};

// One SGD step: W <- W - eta * (grad InfoNCE + lambda_kd * grad KD).
// lambda_kd == 0 skips the distillation term entirely.
StepResult CombinedStepWithLoss(const ModelParams& params,
                                const ModelParams& teacher, const Batch& batch,
                                double tau, double lambda_kd, double eta);
ModelParams CombinedStep(const ModelParams& params, const ModelParams& teacher,
                         const Batch& batch, double tau, double lambda_kd,
                         double eta);

}  // namespace fedembed

#endif  // FEDEMBED_EMBEDDER_H_
