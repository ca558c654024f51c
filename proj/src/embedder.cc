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

#include "fedembed/embedder.h"

#include <algorithm>
#include <cmath>

#include "fedembed/error.h"
#include "fedembed/io.h"
#include "fedembed/random.h"

namespace fedembed {
namespace {

uint64_t Fnv1a64(std::string_view s) {
  uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

void CheckTau(double tau) {
  if (!(tau > 0.0) || !std::isfinite(tau)) {
    throw ConfigError("tau must be positive, got " + FormatDouble17(tau));
  }
}

// Embeddings of one side of a batch together with their norms.
struct Embedded {
  std::vector<Vec64> h;
  std::vector<double> norm;
};

Embedded EmbedAll(const ModelParams& params, const std::vector<Vec64>& xs,
                  const char* side) {
  Embedded out;
  out.h.reserve(xs.size());
  out.norm.reserve(xs.size());
  for (size_t i = 0; i < xs.size(); ++i) {
    out.h.push_back(Embed(params, xs[i]));
    out.norm.push_back(L2Norm(out.h.back()));
    if (out.norm.back() == 0.0) {
      throw DegenerateInputError(std::string("zero-norm ") + side +
                                 " embedding at batch index " +
                                 std::to_string(i));
    }
  }
  return out;
}

double CosineFromParts(const Vec64& u, double nu, const Vec64& v, double nv) {
  return Dot(u, v) / (nu * nv);
}

// Accumulates weight * d cos(u, v) / du into gu and / dv into gv:
//   d/du = v / (|u||v|) - cos * u / |u|^2.
void AccumulateCosineGrad(double weight, const Vec64& u, double nu,
                          const Vec64& v, double nv, double cos, Vec64& gu,
                          Vec64& gv) {
  const double inv_uv = 1.0 / (nu * nv);
  const double cu = cos / (nu * nu);
  const double cv = cos / (nv * nv);
  for (size_t k = 0; k < u.size(); ++k) {
    gu[k] += weight * (v[k] * inv_uv - cu * u[k]);
    gv[k] += weight * (u[k] * inv_uv - cv * v[k]);
  }
}

// dL/dW = sum_i gq_i x_i^T + sum_j gc_j c_j^T, flattened row-major.
Vec64 BackpropLinear(const ModelParams& params, const Batch& batch,
                     const std::vector<Vec64>& gq,
                     const std::vector<Vec64>& gc) {
  const size_t d_in = params.d_in();
  Vec64 grad(params.size());
  auto g = grad.values();
  for (size_t i = 0; i < batch.size(); ++i) {
    const Vec64& q = batch.queries[i];
    const Vec64& c = batch.chunks[i];
    for (size_t r = 0; r < params.d_out(); ++r) {
      const double a = gq[i][r];
      const double b = gc[i][r];
      double* row = g.data() + r * d_in;
      for (size_t k = 0; k < d_in; ++k) row[k] += a * q[k] + b * c[k];
    }
  }
  CheckFinite(grad.values(), "gradient");
  return grad;
}

}  // namespace

FeatureExtractor::FeatureExtractor(size_t d_in, uint64_t hash_seed)
    : d_in_(d_in), hash_seed_(hash_seed) {
  if (d_in == 0) throw ConfigError("d_in must be >= 1");
}

size_t FeatureExtractor::Bucket(std::string_view token) const {
  return static_cast<size_t>(Mix64(Fnv1a64(token) ^ hash_seed_) % d_in_);
}

Features FeatureExtractor::Featurize(std::string_view text) const {
  Features f{Vec64(d_in_), false};
  size_t tokens = 0;
  size_t start = 0;
  while (start <= text.size()) {
    size_t end = text.find(' ', start);
    if (end == std::string_view::npos) end = text.size();
    if (end > start) {
      f.values[Bucket(text.substr(start, end - start))] += 1.0;
      ++tokens;
    }
    start = end + 1;
  }
  if (tokens == 0) {
    f.degenerate = true;
    return f;
  }
  const double norm = L2Norm(f.values);
  for (double& v : f.values.values()) v /= norm;
  return f;
}

ModelParams ModelParams::RandomUniform(size_t d_out, size_t d_in,
                                       uint64_t seed, double scale) {
  Rng rng(seed);
  Mat64 w(d_out, d_in);
  for (double& v : w.values()) v = rng.Uniform(-scale, scale);
  return ModelParams(std::move(w));
}

ModelParams ModelParams::Unflatten(size_t d_out, size_t d_in,
                                   const Vec64& flat) {
  return ModelParams(Mat64(d_out, d_in, flat.raw()));
}

Vec64 ModelParams::Flatten() const {
  return Vec64(std::vector<double>(w_.values().begin(), w_.values().end()));
}

std::string ModelParams::ToJson() const {
  std::string out = "{\"d_in\": " + std::to_string(d_in()) +
                    ", \"d_out\": " + std::to_string(d_out()) + ", \"w\": [";
  const auto values = w_.values();
  for (size_t i = 0; i < values.size(); ++i) {
    if (i) out += ", ";
    out += FormatDouble17(values[i]);
  }
  out += "]}\n";
  return out;
}

ModelParams ModelParams::FromJson(std::string_view text,
                                  const std::string& source) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(source + ": malformed model JSON (" + e.what() + ")");
  }
  if (!j.is_object()) throw ParseError(source + ": expected a JSON object");
  for (const char* key : {"d_in", "d_out", "w"}) {
    if (!j.contains(key)) {
      throw SchemaError(source + ": missing field \"" + key + "\"");
    }
  }
  try {
    const auto d_in = j.at("d_in").get<size_t>();
    const auto d_out = j.at("d_out").get<size_t>();
    auto w = j.at("w").get<std::vector<double>>();
    if (w.size() != d_in * d_out) {
      throw SchemaError(source + ": w has " + std::to_string(w.size()) +
                        " entries, expected d_out*d_in = " +
                        std::to_string(d_in * d_out));
    }
    return ModelParams(Mat64(d_out, d_in, std::move(w)));
  } catch (const nlohmann::json::exception& e) {
    throw SchemaError(source + ": " + e.what());
  }
}

void Batch::Validate() const {
  if (queries.size() != chunks.size()) {
    throw DimensionError("batch: " + std::to_string(queries.size()) +
                         " queries vs " + std::to_string(chunks.size()) +
                         " chunks");
  }
  if (queries.empty()) throw DimensionError("batch: empty");
}

Vec64 Embed(const ModelParams& params, const Vec64& x) {
  return MatVec(params.w(), x);
}

LossAndGrad InfoNce(const ModelParams& params, const Batch& batch,
                    double tau) {
  CheckTau(tau);
  batch.Validate();
  const size_t n = batch.size();
  const Embedded q = EmbedAll(params, batch.queries, "query");
  const Embedded c = EmbedAll(params, batch.chunks, "chunk");

  std::vector<Vec64> gq(n, Vec64(params.d_out()));
  std::vector<Vec64> gc(n, Vec64(params.d_out()));
  std::vector<double> cos(n);
  std::vector<double> p(n);
  double loss = 0.0;
  for (size_t i = 0; i < n; ++i) {
    for (size_t j = 0; j < n; ++j) {
      cos[j] = CosineFromParts(q.h[i], q.norm[i], c.h[j], c.norm[j]);
    }
    // Log-sum-exp over s_ij = cos_ij / tau.
    double m = cos[0] / tau;
    for (size_t j = 1; j < n; ++j) m = std::max(m, cos[j] / tau);
    double z = 0.0;
    for (size_t j = 0; j < n; ++j) {
      p[j] = std::exp(cos[j] / tau - m);
      z += p[j];
    }
    loss += m + std::log(z) - cos[i] / tau;
    // dL/dcos_ij = (p_ij - [i == j]) / (N tau).
    for (size_t j = 0; j < n; ++j) {
      const double weight = (p[j] / z - (i == j ? 1.0 : 0.0)) / (n * tau);
      AccumulateCosineGrad(weight, q.h[i], q.norm[i], c.h[j], c.norm[j],
                           cos[j], gq[i], gc[j]);
    }
  }
  LossAndGrad out;
  out.loss = loss / static_cast<double>(n);
  out.grad = BackpropLinear(params, batch, gq, gc);
  return out;
}

double InfoNceLoss(const ModelParams& params, const Batch& batch,
                   double tau) {
  CheckTau(tau);
  batch.Validate();
  const size_t n = batch.size();
  const Embedded q = EmbedAll(params, batch.queries, "query");
  const Embedded c = EmbedAll(params, batch.chunks, "chunk");
  std::vector<double> s(n);
  double loss = 0.0;
  for (size_t i = 0; i < n; ++i) {
    for (size_t j = 0; j < n; ++j) {
      s[j] = CosineFromParts(q.h[i], q.norm[i], c.h[j], c.norm[j]) / tau;
    }
    const double m = *std::max_element(s.begin(), s.end());
    double z = 0.0;
    for (double v : s) z += std::exp(v - m);
    loss += m + std::log(z) - s[i];
  }
  return loss / static_cast<double>(n);
}

Vec64 InfoNceGrad(const ModelParams& params, const Batch& batch, double tau) {
  return InfoNce(params, batch, tau).grad;
}

SimRow PairSimilarities(const ModelParams& params, const Batch& batch) {
  batch.Validate();
  const Embedded q = EmbedAll(params, batch.queries, "query");
  const Embedded c = EmbedAll(params, batch.chunks, "chunk");
  SimRow z(batch.size());
  for (size_t i = 0; i < batch.size(); ++i) {
    z[i] = CosineFromParts(q.h[i], q.norm[i], c.h[i], c.norm[i]);
  }
  return z;
}

double KdLoss(const SimRow& z_local, const SimRow& z_global) {
  if (z_local.size() != z_global.size()) {
    throw DimensionError("kd_loss: length " + std::to_string(z_local.size()) +
                         " vs " + std::to_string(z_global.size()));
  }
  if (z_local.empty()) throw DimensionError("kd_loss: empty similarity rows");
  double s = 0.0;
  for (size_t i = 0; i < z_local.size(); ++i) {
    const double d = z_local[i] - z_global[i];
    s += d * d;
  }
  return s / static_cast<double>(z_local.size());
}

LossAndGrad Kd(const ModelParams& local, const ModelParams& global,
               const Batch& batch) {
  if (local.d_in() != global.d_in() || local.d_out() != global.d_out()) {
    throw DimensionError("kd: local and global parameter shapes differ");
  }
  batch.Validate();
  const size_t n = batch.size();
  const SimRow z_global = PairSimilarities(global, batch);
  const Embedded q = EmbedAll(local, batch.queries, "query");
  const Embedded c = EmbedAll(local, batch.chunks, "chunk");

  std::vector<Vec64> gq(n, Vec64(local.d_out()));
  std::vector<Vec64> gc(n, Vec64(local.d_out()));
  SimRow z_local(n);
  for (size_t i = 0; i < n; ++i) {
    z_local[i] = CosineFromParts(q.h[i], q.norm[i], c.h[i], c.norm[i]);
    const double weight = 2.0 * (z_local[i] - z_global[i]) / n;
    AccumulateCosineGrad(weight, q.h[i], q.norm[i], c.h[i], c.norm[i],
                         z_local[i], gq[i], gc[i]);
  }
  LossAndGrad out;
  out.loss = KdLoss(z_local, z_global);
  out.grad = BackpropLinear(local, batch, gq, gc);
  return out;
}

Vec64 KdGrad(const ModelParams& local, const ModelParams& global,
             const Batch& batch) {
  return Kd(local, global, batch).grad;
}

double CombinedLoss(const ModelParams& params, const ModelParams& teacher,
                    const Batch& batch, double tau, double lambda_kd) {
  double loss = InfoNceLoss(params, batch, tau);
  if (lambda_kd != 0.0) {
    loss += lambda_kd * KdLoss(PairSimilarities(params, batch),
                               PairSimilarities(teacher, batch));
  }
  return loss;
}

StepResult CombinedStepWithLoss(const ModelParams& params,
                                const ModelParams& teacher, const Batch& batch,
                                double tau, double lambda_kd, double eta) {
  if (!(eta >= 0.0) || !std::isfinite(eta)) {
    throw ConfigError("learning rate must be >= 0, got " +
                      FormatDouble17(eta));
  }
  if (!(lambda_kd >= 0.0) || !std::isfinite(lambda_kd)) {
    throw ConfigError("lambda_kd must be >= 0, got " +
                      FormatDouble17(lambda_kd));
  }
  LossAndGrad info = InfoNce(params, batch, tau);
  StepResult out{params, info.loss};
  if (lambda_kd != 0.0) {
    const LossAndGrad kd = Kd(params, teacher, batch);
    out.loss_before += lambda_kd * kd.loss;
    for (size_t i = 0; i < info.grad.size(); ++i) {
      info.grad[i] += lambda_kd * kd.grad[i];
    }
  }
  if (eta == 0.0) return out;
  Vec64 flat = params.Flatten();
  for (size_t i = 0; i < flat.size(); ++i) flat[i] -= eta * info.grad[i];
  CheckFinite(flat.values(), "sgd step");
  out.params = ModelParams::Unflatten(params.d_out(), params.d_in(), flat);
  return out;
}

ModelParams CombinedStep(const ModelParams& params, const ModelParams& teacher,
                         const Batch& batch, double tau, double lambda_kd,
                         double eta) {
  return CombinedStepWithLoss(params, teacher, batch, tau, lambda_kd, eta)
      .params;
}

}  // namespace fedembed
