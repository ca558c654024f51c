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

// Federated training loop.
//
// Each round the server broadcasts the global parameters w, a subset of
// clients trains locally starting from w and returns delta_k = w_k - w, and
// the server applies w <- w + sum_k (n_k / N) delta_k. In fede4rag mode the
// local objective adds a distillation penalty towards the broadcast model and
// the weighted sum can be computed under additively homomorphic encryption.
//
// Modes:
//   vanilla      initial parameters, no training
//   central      all client data pooled into one client, T*E epochs
//   independent  one client trains alone
//   fedavg       plain federated averaging, no distillation
//   fede4rag     distillation + (optionally) encrypted aggregation

#ifndef FEDEMBED_FEDCORE_H_
#define FEDEMBED_FEDCORE_H_

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "fedembed/corpus.h"
#include "fedembed/embedder.h"
#include "fedembed/he.h"
#include "fedembed/tensor.h"

namespace fedembed::fed {

enum class Mode { kCentral, kIndependent, kVanilla, kFedAvg, kFedE4Rag };

const char* ModeName(Mode mode);
// ConfigError listing the valid names on failure.
Mode ParseMode(const std::string& name);

struct FedConfig {
  int64_t rounds = 25;
  int64_t local_epochs = 1;
  int64_t batch_size = 16;
  double lr = 1e-5;
  double tau = 1.0;
  double lambda_kd = 1.0;
  double client_fraction = 1.0;
  Mode mode = Mode::kFedE4Rag;
  bool he_enabled = true;
  // Seeded encryption randomness instead of OS entropy.
  bool he_deterministic = false;
  uint64_t seed = 42;
  // Which client trains in independent mode.
  int64_t client_id = 0;

  void Validate() const;
  double EffectiveLambda() const {
    return mode == Mode::kFedE4Rag ? lambda_kd : 0.0;
  }
};

struct ModelSpec {
  int64_t d_in = 256;
  int64_t d_out = 64;
  uint64_t hash_seed = 7;
  double init_scale = 0.05;

  void Validate() const;
};

// Seeded uniform initialization in [-init_scale, init_scale].
ModelParams InitialParams(const ModelSpec& model, uint64_t seed);

struct ClientState {
  int64_t client_id = 0;
  std::vector<Vec64> queries;  // featurized, aligned with chunks
  std::vector<Vec64> chunks;

  size_t n() const { return queries.size(); }
};

// Groups pairs by client id (ascending) and featurizes them. Pairs whose
// query or chunk has no tokens are dropped with a warning.
std::vector<ClientState> BuildClients(
    const std::vector<corpus::TrainPair>& pairs,
    const FeatureExtractor& extractor);

// Concatenation of all clients in id order, under the smallest client id.
ClientState PoolClients(const std::vector<ClientState>& clients);

uint64_t RoundSeed(uint64_t seed, int64_t round, int64_t client_id);

std::vector<int64_t> SelectClients(std::vector<int64_t> all_ids,
                                   double fraction, uint64_t round_seed);

struct ClientUpdate {
  Vec64 delta;
  std::vector<double> losses;  // combined loss before each step
  double mean_loss = 0.0;
};

ClientUpdate RunClientUpdate(const ClientState& state,
                             const ModelParams& global, const FedConfig& cfg,
                             uint64_t round_seed);

struct WeightedDelta {
  int64_t client_id = 0;
  Vec64 delta;
  int64_t n = 0;
};

// sum (n_k / N) delta_k, summed in ascending client id order.
Vec64 AggregatePlain(std::vector<WeightedDelta> deltas);

// Encrypted aggregation. Holds the trusted-setup key pair on behalf of the
// clients; the aggregation step itself only receives the public key.
class SecureAggregator {
 public:
  SecureAggregator(const he::HeParams& params, uint64_t seed,
                   bool deterministic);

  Vec64 Aggregate(std::vector<WeightedDelta> deltas, int64_t round);

  const he::KeyPair& keys() const { return keys_; }
  // Receives one audit line per client ciphertext vector, if set.
  void set_transcript(std::function<void(const std::string&)> sink) {
    transcript_ = std::move(sink);
  }

 private:
  he::HeParams params_;
  he::KeyPair keys_;
  he::FixedPointCodec codec_;
  uint64_t seed_;
  bool deterministic_;
  std::function<void(const std::string&)> transcript_;
};

struct RoundRecord {
  int64_t round = 0;
  std::vector<int64_t> clients;
  std::vector<std::vector<double>> client_losses;
  double mean_local_loss = 0.0;
  double delta_norm = 0.0;

  // {"round": int, "clients": [int], "mean_local_loss": float,
  //  "delta_norm": float}
  std::string ToJsonLine() const;
};

struct RunHooks {
  // Required when cfg.he_enabled in fede4rag mode.
  SecureAggregator* secure = nullptr;
  std::function<void(const RoundRecord&, const ModelParams&)> on_round;
};

struct RunResult {
  ModelParams params;
  std::vector<RoundRecord> rounds;
};

RunResult Run(const FedConfig& cfg, const ModelParams& initial,
              const std::vector<ClientState>& clients,
              const RunHooks& hooks = {});

}  // namespace fedembed::fed

#endif  // FEDEMBED_FEDCORE_H_
