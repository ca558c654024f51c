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

#include "fedembed/fedcore.h"

#include <algorithm>
#include <cmath>
#include <map>

#include "fedembed/error.h"
#include "fedembed/io.h"
#include "fedembed/logging.h"
#include "fedembed/random.h"

namespace fedembed::fed {
namespace {

constexpr uint64_t kSelectStream = 0x5e1ec7;
constexpr uint64_t kEpochStream = 0xe90c4;
constexpr uint64_t kKeyStream = 0x6b6579;
constexpr uint64_t kEncryptStream = 0xe4c;

constexpr struct {
  Mode mode;
  const char* name;
} kModes[] = {
    {Mode::kCentral, "central"},   {Mode::kIndependent, "independent"},
    {Mode::kVanilla, "vanilla"},   {Mode::kFedAvg, "fedavg"},
    {Mode::kFedE4Rag, "fede4rag"},
};

Error WithContext(const Error& e, int64_t round, int64_t client) {
  return Error(e.kind(), "round " + std::to_string(round) + ", client " +
                             std::to_string(client) + ": " + e.what());
}

int64_t TotalWeight(const std::vector<WeightedDelta>& deltas) {
  int64_t n = 0;
  for (const auto& d : deltas) n += d.n;
  return n;
}

void SortById(std::vector<WeightedDelta>& deltas) {
  std::sort(deltas.begin(), deltas.end(),
            [](const WeightedDelta& a, const WeightedDelta& b) {
              return a.client_id < b.client_id;
            });
}

}  // namespace

const char* ModeName(Mode mode) {
  for (const auto& m : kModes) {
    if (m.mode == mode) return m.name;
  }
  return "unknown";
}

Mode ParseMode(const std::string& name) {
  std::string valid;
  for (const auto& m : kModes) {
    if (name == m.name) return m.mode;
    valid += valid.empty() ? "" : ", ";
    valid += m.name;
  }
  throw ConfigError("unknown mode \"" + name + "\"; valid modes: " + valid);
}

void FedConfig::Validate() const {
  if (rounds < 1) throw ConfigError("fed.rounds must be >= 1");
  if (local_epochs < 1) throw ConfigError("fed.local_epochs must be >= 1");
  if (batch_size < 1) throw ConfigError("fed.batch_size must be >= 1");
  if (!(lr > 0.0) || !std::isfinite(lr)) {
    throw ConfigError("fed.lr must be > 0");
  }
  if (!(tau > 0.0) || !std::isfinite(tau)) {
    throw ConfigError("fed.tau must be > 0");
  }
  if (!(lambda_kd >= 0.0) || !std::isfinite(lambda_kd)) {
    throw ConfigError("fed.lambda_kd must be >= 0");
  }
  if (!(client_fraction > 0.0 && client_fraction <= 1.0)) {
    throw ConfigError("fed.client_fraction must be in (0, 1]");
  }
}

void ModelSpec::Validate() const {
  if (d_in < 1) throw ConfigError("model.d_in must be >= 1");
  if (d_out < 1) throw ConfigError("model.d_out must be >= 1");
  if (!(init_scale > 0.0) || !std::isfinite(init_scale)) {
    throw ConfigError("model.init_scale must be > 0");
  }
}

ModelParams InitialParams(const ModelSpec& model, uint64_t seed) {
  model.Validate();
  return ModelParams::RandomUniform(static_cast<size_t>(model.d_out),
                                    static_cast<size_t>(model.d_in),
                                    DeriveSeed({seed, 0x1417}),
                                    model.init_scale);
}

std::vector<ClientState> BuildClients(
    const std::vector<corpus::TrainPair>& pairs,
    const FeatureExtractor& extractor) {
  std::map<int64_t, ClientState> by_id;
  size_t dropped = 0;
  for (const auto& p : pairs) {
    Features q = extractor.Featurize(p.query);
    Features c = extractor.Featurize(p.chunk);
    ClientState& s = by_id[p.client_id];
    s.client_id = p.client_id;
    if (q.degenerate || c.degenerate) {
      ++dropped;
      continue;
    }
    s.queries.push_back(std::move(q.values));
    s.chunks.push_back(std::move(c.values));
  }
  if (dropped > 0) {
    spdlog::warn("dropped {} training pairs with empty query or chunk text",
                 dropped);
  }
  std::vector<ClientState> out;
  for (auto& [id, s] : by_id) out.push_back(std::move(s));
  return out;
}

ClientState PoolClients(const std::vector<ClientState>& clients) {
  if (clients.empty()) throw ConfigError("no clients to pool");
  ClientState pooled;
  pooled.client_id = clients.front().client_id;
  std::vector<const ClientState*> ordered;
  for (const auto& c : clients) ordered.push_back(&c);
  std::sort(ordered.begin(), ordered.end(),
            [](const ClientState* a, const ClientState* b) {
              return a->client_id < b->client_id;
            });
  pooled.client_id = ordered.front()->client_id;
  for (const ClientState* c : ordered) {
    pooled.queries.insert(pooled.queries.end(), c->queries.begin(),
                          c->queries.end());
    pooled.chunks.insert(pooled.chunks.end(), c->chunks.begin(),
                         c->chunks.end());
  }
  return pooled;
}

uint64_t RoundSeed(uint64_t seed, int64_t round, int64_t client_id) {
  return DeriveSeed(
      {seed, static_cast<uint64_t>(round), static_cast<uint64_t>(client_id)});
}

std::vector<int64_t> SelectClients(std::vector<int64_t> all_ids,
                                   double fraction, uint64_t round_seed) {
  if (all_ids.empty()) throw ConfigError("select_clients: no clients");
  if (!(fraction > 0.0 && fraction <= 1.0)) {
    throw ConfigError("select_clients: fraction must be in (0, 1]");
  }
  std::sort(all_ids.begin(), all_ids.end());
  const auto k = all_ids.size();
  auto m = static_cast<size_t>(
      std::ceil(fraction * static_cast<double>(k) - 1e-9));
  m = std::clamp<size_t>(m, 1, k);
  Rng rng(DeriveSeed({round_seed, kSelectStream}));
  std::vector<int64_t> picked;
  for (size_t i : rng.SampleWithoutReplacement(k, m)) {
    picked.push_back(all_ids[i]);
  }
  std::sort(picked.begin(), picked.end());
  return picked;
}

ClientUpdate RunClientUpdate(const ClientState& state,
                             const ModelParams& global, const FedConfig& cfg,
                             uint64_t round_seed) {
  if (state.n() == 0) {
    throw ConfigError("client " + std::to_string(state.client_id) +
                      " has an empty dataset");
  }
  if (cfg.batch_size < 1) throw ConfigError("fed.batch_size must be >= 1");
  const double lambda = cfg.EffectiveLambda();
  const auto batch = static_cast<size_t>(cfg.batch_size);

  ClientUpdate out;
  ModelParams local = global;
  for (int64_t epoch = 0; epoch < cfg.local_epochs; ++epoch) {
    Rng rng(DeriveSeed({round_seed, kEpochStream,
                        static_cast<uint64_t>(epoch)}));
    const auto order = rng.Permutation(state.n());
    for (size_t start = 0; start < order.size(); start += batch) {
      Batch b;
      for (size_t i = start; i < std::min(order.size(), start + batch); ++i) {
        b.queries.push_back(state.queries[order[i]]);
        b.chunks.push_back(state.chunks[order[i]]);
      }
      StepResult step =
          CombinedStepWithLoss(local, global, b, cfg.tau, lambda, cfg.lr);
      out.losses.push_back(step.loss_before);
      local = std::move(step.params);
    }
  }
  const Vec64 after = local.Flatten();
  const Vec64 before = global.Flatten();
  out.delta = Vec64(after.size());
  for (size_t i = 0; i < after.size(); ++i) out.delta[i] = after[i] - before[i];
  double s = 0.0;
  for (double l : out.losses) s += l;
  out.mean_loss = out.losses.empty() ? 0.0 : s / out.losses.size();
  return out;
}

Vec64 AggregatePlain(std::vector<WeightedDelta> deltas) {
  if (deltas.empty()) throw ConfigError("aggregate_plain: no deltas");
  SortById(deltas);
  const size_t dim = deltas.front().delta.size();
  for (const auto& d : deltas) {
    if (d.delta.size() != dim) {
      throw DimensionError("aggregate_plain: delta length " +
                           std::to_string(d.delta.size()) + " vs " +
                           std::to_string(dim));
    }
    if (d.n < 1) throw ConfigError("aggregate_plain: client weight must be >= 1");
  }
  if (deltas.size() == 1) return deltas.front().delta;
  const auto total = static_cast<double>(TotalWeight(deltas));
  Vec64 out(dim);
  for (const auto& d : deltas) {
    const double w = static_cast<double>(d.n) / total;
    for (size_t i = 0; i < dim; ++i) out[i] += w * d.delta[i];
  }
  return out;
}

SecureAggregator::SecureAggregator(const he::HeParams& params, uint64_t seed,
                                   bool deterministic)
    : params_(params),
      keys_(deterministic ? he::Keygen(params, DeriveSeed({seed, kKeyStream}))
                          : he::KeygenFromEntropy(params)),
      codec_(params, keys_.pk.n),
      seed_(seed),
      deterministic_(deterministic) {}

Vec64 SecureAggregator::Aggregate(std::vector<WeightedDelta> deltas,
                                  int64_t round) {
  if (deltas.empty()) throw ConfigError("secure aggregate: no deltas");
  SortById(deltas);

  // Client side: encode, scale by n_k, encrypt.
  std::vector<he::CiphertextVec> uploads;
  uploads.reserve(deltas.size());
  for (const auto& d : deltas) {
    try {
      auto rng = deterministic_
                     ? he::RandomSource::Seeded(DeriveSeed(
                           {seed_, kEncryptStream, static_cast<uint64_t>(round),
                            static_cast<uint64_t>(d.client_id)}))
                     : he::RandomSource::OsEntropy();
      uploads.push_back(
          he::EncryptUpdate(keys_.pk, codec_, d.delta, d.n, *rng));
    } catch (const Error& e) {
      throw WithContext(e, round, d.client_id);
    }
    if (transcript_) {
      transcript_(he::TranscriptLine(d.client_id, round, uploads.back()));
    }
  }

  // Server side: public key only.
  const he::CiphertextVec sum =
      he::Aggregate(keys_.pk, uploads, params_.max_clients);

  // Back on the clients.
  return he::DecryptAggregate(keys_.pk, keys_.sk, codec_, sum,
                              TotalWeight(deltas));
}

std::string RoundRecord::ToJsonLine() const {
  OrderedJson j;
  j["round"] = round;
  j["clients"] = clients;
  j["mean_local_loss"] = mean_local_loss;
  j["delta_norm"] = delta_norm;
  return j.dump() + "\n";
}

RunResult Run(const FedConfig& cfg, const ModelParams& initial,
              const std::vector<ClientState>& clients, const RunHooks& hooks) {
  cfg.Validate();
  if (clients.empty()) throw ConfigError("run: no clients");
  RunResult result{initial, {}};
  if (cfg.mode == Mode::kVanilla) return result;

  std::vector<ClientState> pool;
  const std::vector<ClientState>* participants = &clients;
  if (cfg.mode == Mode::kCentral) {
    pool.push_back(PoolClients(clients));
    participants = &pool;
  } else if (cfg.mode == Mode::kIndependent) {
    auto it = std::find_if(clients.begin(), clients.end(),
                           [&](const ClientState& c) {
                             return c.client_id == cfg.client_id;
                           });
    if (it == clients.end()) {
      throw ConfigError("independent mode: no client with id " +
                        std::to_string(cfg.client_id));
    }
    pool.push_back(*it);
    participants = &pool;
  }
  const bool secure = cfg.mode == Mode::kFedE4Rag && cfg.he_enabled;
  if (secure && hooks.secure == nullptr) {
    throw ConfigError("run: HE enabled but no secure aggregator provided");
  }

  std::map<int64_t, const ClientState*> by_id;
  for (const auto& c : *participants) by_id[c.client_id] = &c;
  std::vector<int64_t> ids;
  for (const auto& [id, c] : by_id) ids.push_back(id);

  for (int64_t t = 1; t <= cfg.rounds; ++t) {
    RoundRecord record;
    record.round = t;
    record.clients = SelectClients(
        ids, cfg.client_fraction,
        DeriveSeed({cfg.seed, static_cast<uint64_t>(t), kSelectStream}));

    std::vector<WeightedDelta> deltas;
    double loss_sum = 0.0;
    for (int64_t id : record.clients) {
      const ClientState& c = *by_id.at(id);
      ClientUpdate u;
      try {
        u = RunClientUpdate(c, result.params, cfg, RoundSeed(cfg.seed, t, id));
      } catch (const Error& e) {
        throw WithContext(e, t, id);
      }
      loss_sum += u.mean_loss;
      record.client_losses.push_back(std::move(u.losses));
      deltas.push_back(
          WeightedDelta{id, std::move(u.delta), static_cast<int64_t>(c.n())});
    }
    record.mean_local_loss = loss_sum / static_cast<double>(deltas.size());

    const Vec64 agg = secure ? hooks.secure->Aggregate(std::move(deltas), t)
                             : AggregatePlain(std::move(deltas));
    record.delta_norm = L2Norm(agg);
    Vec64 w = result.params.Flatten();
    for (size_t i = 0; i < w.size(); ++i) w[i] += agg[i];
    try {
      result.params = ModelParams::Unflatten(initial.d_out(), initial.d_in(), w);
    } catch (const Error& e) {
      throw Error(e.kind(), "round " + std::to_string(t) +
                                ": global update: " + e.what());
    }
    spdlog::info("round {} clients={} mean_local_loss={:.6f} delta_norm={:.6g}",
                 t, record.clients.size(), record.mean_local_loss,
                 record.delta_norm);
    if (hooks.on_round) hooks.on_round(record, result.params);
    result.rounds.push_back(std::move(record));
  }
  return result;
}

}  // namespace fedembed::fed
