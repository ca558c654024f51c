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

#include "fedembed/cli.h"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <iostream>
#include <map>
#include <optional>

#include "CLI11.hpp"
#include "fedembed/logging.h"
#include "fedembed/texteval.h"

namespace fedembed::cli {
namespace {

namespace fs = std::filesystem;

using Setter = std::function<void(const nlohmann::json&)>;

template <typename T>
Setter Field(T* target) {
  return [target](const nlohmann::json& v) { *target = v.get<T>(); };
}

void BindSection(const nlohmann::json& root, const char* name,
                 const std::map<std::string, Setter>& setters) {
  auto it = root.find(name);
  if (it == root.end()) return;
  if (!it->is_object()) {
    throw ConfigError(std::string("config section \"") + name +
                      "\" must be an object");
  }
  for (const auto& [key, value] : it->items()) {
    auto s = setters.find(key);
    if (s == setters.end()) {
      throw ConfigError(std::string("unknown config key ") + name + "." + key);
    }
    try {
      s->second(value);
    } catch (const nlohmann::json::exception&) {
      throw ConfigError(std::string("config key ") + name + "." + key +
                        " has the wrong type");
    }
  }
}

const char* AccModeName(retrieval::AccMode m) {
  return m == retrieval::AccMode::kLabel ? "label" : "threshold";
}

retrieval::AccMode ParseAccMode(const std::string& s) {
  if (s == "threshold") return retrieval::AccMode::kThreshold;
  if (s == "label") return retrieval::AccMode::kLabel;
  throw ConfigError("eval.acc_mode must be \"threshold\" or \"label\", got \"" +
                    s + "\"");
}

void WriteJsonFile(const fs::path& path, const OrderedJson& j) {
  WriteFile(path, j.dump(2) + "\n");
}

// Training pairs are read from pairs_client_<k>.jsonl files, or from a
// single pairs.jsonl when no per-client files exist.
std::vector<fs::path> PairFiles(const fs::path& data_dir) {
  std::vector<fs::path> files;
  std::error_code ec;
  if (!fs::is_directory(data_dir, ec)) {
    throw IoError("data directory not found: " + data_dir.string());
  }
  for (const auto& e : fs::directory_iterator(data_dir, ec)) {
    const std::string name = e.path().filename().string();
    if (name.rfind("pairs_client_", 0) == 0 && e.path().extension() == ".jsonl") {
      files.push_back(e.path());
    }
  }
  std::sort(files.begin(), files.end());
  if (files.empty() && fs::exists(data_dir / "pairs.jsonl")) {
    files.push_back(data_dir / "pairs.jsonl");
  }
  if (files.empty()) {
    throw IoError("no training pairs in " + data_dir.string());
  }
  return files;
}

struct GenOptions {
  std::string config;
  std::string out;
  std::optional<uint64_t> seed;
};

struct TrainOptions {
  std::string config;
  std::string data;
  std::string mode;
  std::string out;
  std::optional<uint64_t> seed;
  std::optional<int64_t> rounds;
  std::optional<int64_t> client_id;
  bool no_he = false;
  bool he = false;
  bool he_test_mode = false;
  bool transcript = false;
};

struct EvalRetrievalOptions {
  std::string checkpoint;
  std::string data;
  std::string out;
  std::string config;
  std::string run_name = "run";
  bool percent = false;
  std::optional<double> theta;
  std::string acc_mode;
};

struct EvalTextOptions {
  std::string answers;
  std::string out;
};

struct CompareOptions {
  std::vector<std::string> reports;
  std::string out;
};

RunConfig LoadConfigOrDefault(const std::string& path) {
  return path.empty() ? RunConfig{} : RunConfig::Load(path);
}

void ApplySeed(RunConfig& cfg, const std::optional<uint64_t>& seed) {
  if (seed) {
    cfg.corpus.seed = *seed;
    cfg.fed.seed = *seed;
  }
}

void CmdGen(const GenOptions& o) {
  RunConfig cfg = LoadConfigOrDefault(o.config);
  ApplySeed(cfg, o.seed);
  const corpus::GeneratedCorpus g = corpus::Generate(cfg.corpus);
  const fs::path out(o.out);

  OrderedJson files = OrderedJson::object();
  auto emit = [&](const std::string& name, const std::string& contents) {
    WriteFile(out / name, contents);
    files[name] = Sha256Hex(contents);
  };
  std::map<int64_t, std::vector<corpus::TrainPair>> by_client;
  for (const auto& p : g.pairs) by_client[p.client_id].push_back(p);
  for (const auto& [id, pairs] : by_client) {
    emit("pairs_client_" + std::to_string(id) + ".jsonl",
         corpus::PairsToJsonl(pairs));
  }
  emit("eval.jsonl", corpus::EvalToJsonl(g.eval));
  emit("corpus.jsonl", corpus::CorpusToJsonl(g.corpus));

  const corpus::PartitionReport report = corpus::MakePartitionReport(g.pairs);
  OrderedJson partition = OrderedJson::object();
  for (const auto& [id, stats] : report.clients) {
    OrderedJson c;
    c["pairs"] = stats.pairs;
    c["distinct_query_tokens"] = stats.query_token_histogram.size();
    partition[std::to_string(id)] = c;
  }

  OrderedJson manifest;
  manifest["command"] = "gen";
  manifest["config"] = cfg.ToJson();
  manifest["files"] = files;
  manifest["partition"] = partition;
  WriteJsonFile(out / "manifest.json", manifest);
  std::cout << "wrote " << files.size() << " data files to " << out.string()
            << "\n";
}

void CmdTrain(const TrainOptions& o) {
  RunConfig cfg = LoadConfigOrDefault(o.config);
  ApplySeed(cfg, o.seed);
  cfg.fed.mode = fed::ParseMode(o.mode);
  if (o.rounds) cfg.fed.rounds = *o.rounds;
  if (o.client_id) cfg.fed.client_id = *o.client_id;
  if (o.no_he && o.he) throw ConfigError("--he and --no-he are exclusive");
  if (o.no_he) cfg.fed.he_enabled = false;
  if (o.he) cfg.fed.he_enabled = true;
  if (o.he_test_mode) cfg.fed.he_deterministic = true;
  cfg.fed.Validate();
  cfg.model.Validate();

  const fs::path out(o.out);
  OrderedJson data_hashes = OrderedJson::object();
  std::vector<corpus::TrainPair> pairs;
  for (const auto& f : PairFiles(o.data)) {
    const std::string text = ReadFile(f);
    data_hashes[f.filename().string()] = Sha256Hex(text);
    auto part = corpus::ParsePairs(text, f.string());
    pairs.insert(pairs.end(), std::make_move_iterator(part.begin()),
                 std::make_move_iterator(part.end()));
  }

  OrderedJson manifest;
  manifest["command"] = "train";
  manifest["mode"] = fed::ModeName(cfg.fed.mode);
  manifest["config"] = cfg.ToJson();
  manifest["data"] = data_hashes;
  WriteJsonFile(out / "manifest.json", manifest);

  const FeatureExtractor extractor(static_cast<size_t>(cfg.model.d_in),
                                   cfg.model.hash_seed);
  const auto clients = fed::BuildClients(pairs, extractor);
  const ModelParams initial = fed::InitialParams(cfg.model, cfg.fed.seed);

  std::optional<fed::SecureAggregator> secure;
  std::string transcript;
  fed::RunHooks hooks;
  if (cfg.fed.mode == fed::Mode::kFedE4Rag && cfg.fed.he_enabled) {
    const auto per_round = static_cast<double>(initial.size()) *
                           static_cast<double>(clients.size()) *
                           cfg.fed.client_fraction;
    if (per_round > 1e5) {
      spdlog::warn("encrypted aggregation: about {:.0f} encryptions per round; "
                   "pass --no-he for plaintext aggregation",
                   per_round);
    }
    secure.emplace(cfg.he, cfg.fed.seed, cfg.fed.he_deterministic);
    WriteFile(out / "keys" / "public_key.json", secure->keys().pk.ToJson());
    WriteFile(out / "keys" / "secret_key.json", secure->keys().sk.ToJson());
    if (o.transcript) {
      secure->set_transcript(
          [&transcript](const std::string& line) { transcript += line; });
    }
    hooks.secure = &*secure;
  }
  std::string round_log;
  hooks.on_round = [&](const fed::RoundRecord& r, const ModelParams& p) {
    round_log += r.ToJsonLine();
    WriteFile(out / "checkpoints" / ("round_" + std::to_string(r.round) + ".json"),
              p.ToJson());
  };

  fed::RunResult result;
  try {
    result = fed::Run(cfg.fed, initial, clients, hooks);
  } catch (const Error& e) {
    // Keep whatever rounds completed for diagnosis.
    WriteFile(out / "rounds.jsonl", round_log);
    throw;
  }
  WriteFile(out / "rounds.jsonl", round_log);
  WriteFile(out / "model.json", result.params.ToJson());
  if (o.transcript && secure) WriteFile(out / "transcript.jsonl", transcript);
  std::cout << "trained " << fed::ModeName(cfg.fed.mode) << " for "
            << result.rounds.size() << " rounds; model at "
            << (out / "model.json").string() << "\n";
}

void CmdEvalRetrieval(const EvalRetrievalOptions& o) {
  RunConfig cfg = LoadConfigOrDefault(o.config);
  if (o.theta) cfg.eval.theta = *o.theta;
  if (!o.acc_mode.empty()) cfg.eval.acc_mode = ParseAccMode(o.acc_mode);
  if (!(cfg.eval.theta >= -1.0 && cfg.eval.theta <= 1.0)) {
    throw ConfigError("eval.theta must be in [-1, 1]");
  }

  const ModelParams params =
      ModelParams::FromJson(ReadFile(o.checkpoint), o.checkpoint);
  const fs::path data(o.data);
  const corpus::EvalData eval =
      corpus::LoadEval(data / "eval.jsonl", data / "corpus.jsonl");
  const FeatureExtractor extractor(params.d_in(), cfg.model.hash_seed);
  const retrieval::VectorIndex index =
      retrieval::BuildIndex(params, extractor, eval.corpus);
  retrieval::EvalOptions options;
  options.theta = cfg.eval.theta;
  options.acc_mode = cfg.eval.acc_mode;
  const retrieval::MetricReport report =
      retrieval::Evaluate(index, params, extractor, eval.queries, options);

  const fs::path out(o.out);
  WriteFile(out / "retrieval_report.json", report.ToJson(o.percent));
  WriteFile(out / "retrieval_report.csv", report.ToCsv(o.run_name, o.percent));
  std::cout << "evaluated " << eval.queries.size() << " queries; hit@10 "
            << report.Get("hit@10") << ", mrr " << report.Get("mrr") << "\n";
}

void CmdEvalText(const EvalTextOptions& o) {
  const auto pairs = texteval::ParseAnswers(ReadFile(o.answers), o.answers);
  const texteval::GenReport report = texteval::EvaluateText(pairs);
  WriteFile(fs::path(o.out) / "gen_report.json", report.ToJson());
  std::cout << "evaluated " << pairs.size() << " answers\n";
}

void CmdCompare(const CompareOptions& o) {
  if (o.reports.size() < 2) throw ConfigError("compare needs >= 2 reports");
  std::vector<std::string> names;
  std::vector<OrderedJson> reports;
  for (const auto& path : o.reports) {
    OrderedJson j;
    try {
      j = OrderedJson::parse(ReadFile(path));
    } catch (const nlohmann::json::parse_error& e) {
      throw ParseError(path + ": malformed report (" + e.what() + ")");
    }
    if (!j.is_object()) throw ParseError(path + ": expected a JSON object");
    reports.push_back(std::move(j));
    names.push_back(path);
  }
  std::vector<std::string> keys;
  for (const auto& [k, v] : reports.front().items()) keys.push_back(k);
  for (size_t r = 1; r < reports.size(); ++r) {
    std::vector<std::string> other;
    for (const auto& [k, v] : reports[r].items()) other.push_back(k);
    auto a = keys;
    auto b = other;
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    if (a != b) {
      throw ConfigError("metric sets differ between " + names.front() +
                        " and " + names[r]);
    }
  }
  std::string csv = "metric";
  for (const auto& n : names) csv += "," + n;
  csv += "\n";
  for (const auto& k : keys) {
    csv += k;
    for (const auto& r : reports) {
      if (!r.at(k).is_number()) {
        throw SchemaError("metric " + k + " is not a number");
      }
      csv += "," + r.at(k).dump();
    }
    csv += "\n";
  }
  if (o.out.empty()) {
    std::cout << csv;
  } else {
    WriteFile(o.out, csv);
  }
}

}  // namespace

int ExitCodeFor(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kConfig:
    case ErrorKind::kParse:
    case ErrorKind::kSchema:
      return kExitConfig;
    case ErrorKind::kIo:
      return kExitIo;
    case ErrorKind::kDataIntegrity:
      return kExitDataIntegrity;
    case ErrorKind::kDimension:
    case ErrorKind::kDegenerateInput:
    case ErrorKind::kCrypto:
    case ErrorKind::kOverflow:
    case ErrorKind::kNumeric:
      return kExitNumeric;
  }
  return kExitNumeric;
}

OrderedJson RunConfig::ToJson() const {
  OrderedJson j;
  OrderedJson c;
  c["n_clients"] = corpus.n_clients;
  c["pairs_per_client"] = corpus.pairs_per_client;
  c["query_vocab_size"] = corpus.query_vocab_size;
  c["chunk_vocab_size"] = corpus.chunk_vocab_size;
  c["tokens_per_chunk"] = corpus.tokens_per_chunk;
  c["tokens_per_query"] = corpus.tokens_per_query;
  c["overlap_fraction"] = corpus.overlap_fraction;
  c["distractor_chunks"] = corpus.distractor_chunks;
  c["eval_queries"] = corpus.eval_queries;
  c["slice_overlap"] = corpus.slice_overlap;
  c["seed"] = corpus.seed;
  j["corpus"] = c;

  OrderedJson m;
  m["d_in"] = model.d_in;
  m["d_out"] = model.d_out;
  m["hash_seed"] = model.hash_seed;
  m["init_scale"] = model.init_scale;
  j["model"] = m;

  OrderedJson f;
  f["rounds"] = fed.rounds;
  f["local_epochs"] = fed.local_epochs;
  f["batch_size"] = fed.batch_size;
  f["lr"] = fed.lr;
  f["tau"] = fed.tau;
  f["lambda_kd"] = fed.lambda_kd;
  f["client_fraction"] = fed.client_fraction;
  f["mode"] = fed::ModeName(fed.mode);
  f["he_enabled"] = fed.he_enabled;
  f["he_deterministic"] = fed.he_deterministic;
  f["seed"] = fed.seed;
  f["client_id"] = fed.client_id;
  j["fed"] = f;

  OrderedJson h;
  h["modulus_bits"] = he.modulus_bits;
  h["frac_bits"] = he.frac_bits;
  h["max_clients"] = he.max_clients;
  h["max_abs_value"] = he.max_abs_value;
  h["max_weight"] = he.max_weight;
  j["he"] = h;

  OrderedJson e;
  e["theta"] = eval.theta;
  e["acc_mode"] = AccModeName(eval.acc_mode);
  j["eval"] = e;
  return j;
}

RunConfig RunConfig::FromJson(const std::string& text,
                              const std::string& source) {
  nlohmann::json root;
  try {
    root = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(source + ": malformed config JSON (" + e.what() + ")");
  }
  if (!root.is_object()) throw ConfigError(source + ": expected an object");
  for (const auto& [key, value] : root.items()) {
    if (key != "corpus" && key != "model" && key != "fed" && key != "he" &&
        key != "eval") {
      throw ConfigError("unknown config section \"" + key + "\"");
    }
  }

  RunConfig cfg;
  auto& c = cfg.corpus;
  BindSection(root, "corpus",
              {{"n_clients", Field(&c.n_clients)},
               {"pairs_per_client", Field(&c.pairs_per_client)},
               {"query_vocab_size", Field(&c.query_vocab_size)},
               {"chunk_vocab_size", Field(&c.chunk_vocab_size)},
               {"tokens_per_chunk", Field(&c.tokens_per_chunk)},
               {"tokens_per_query", Field(&c.tokens_per_query)},
               {"overlap_fraction", Field(&c.overlap_fraction)},
               {"distractor_chunks", Field(&c.distractor_chunks)},
               {"eval_queries", Field(&c.eval_queries)},
               {"slice_overlap", Field(&c.slice_overlap)},
               {"seed", Field(&c.seed)}});
  auto& m = cfg.model;
  BindSection(root, "model",
              {{"d_in", Field(&m.d_in)},
               {"d_out", Field(&m.d_out)},
               {"hash_seed", Field(&m.hash_seed)},
               {"init_scale", Field(&m.init_scale)}});
  auto& f = cfg.fed;
  BindSection(root, "fed",
              {{"rounds", Field(&f.rounds)},
               {"local_epochs", Field(&f.local_epochs)},
               {"batch_size", Field(&f.batch_size)},
               {"lr", Field(&f.lr)},
               {"tau", Field(&f.tau)},
               {"lambda_kd", Field(&f.lambda_kd)},
               {"client_fraction", Field(&f.client_fraction)},
               {"mode",
                [&f](const nlohmann::json& v) {
                  f.mode = fed::ParseMode(v.get<std::string>());
                }},
               {"he_enabled", Field(&f.he_enabled)},
               {"he_deterministic", Field(&f.he_deterministic)},
               {"seed", Field(&f.seed)},
               {"client_id", Field(&f.client_id)}});
  auto& h = cfg.he;
  BindSection(root, "he",
              {{"modulus_bits", Field(&h.modulus_bits)},
               {"frac_bits", Field(&h.frac_bits)},
               {"max_clients", Field(&h.max_clients)},
               {"max_abs_value", Field(&h.max_abs_value)},
               {"max_weight", Field(&h.max_weight)}});
  auto& e = cfg.eval;
  BindSection(root, "eval",
              {{"theta", Field(&e.theta)},
               {"acc_mode", [&e](const nlohmann::json& v) {
                  e.acc_mode = ParseAccMode(v.get<std::string>());
                }}});

  cfg.corpus.Validate();
  cfg.model.Validate();
  cfg.fed.Validate();
  cfg.he.Validate();
  if (!(cfg.eval.theta >= -1.0 && cfg.eval.theta <= 1.0)) {
    throw ConfigError("eval.theta must be in [-1, 1]");
  }
  return cfg;
}

RunConfig RunConfig::Load(const std::string& path) {
  return FromJson(ReadFile(path), path);
}

int RunCli(int argc, const char* const* argv) {
  InitLoggingFromEnv();
  CLI::App app{"Federated embedding learning simulator", "fedembed"};
  app.require_subcommand(1);

  GenOptions gen;
  auto* gen_cmd = app.add_subcommand("gen", "Generate a synthetic corpus");
  gen_cmd->add_option("--config", gen.config, "Run config JSON");
  gen_cmd->add_option("--out", gen.out, "Output directory")->required();
  gen_cmd->add_option("--seed", gen.seed, "Overrides every seed in the config");

  TrainOptions train;
  auto* train_cmd = app.add_subcommand("train", "Train in one of the modes");
  train_cmd->add_option("--config", train.config, "Run config JSON");
  train_cmd->add_option("--data", train.data, "Directory written by gen")
      ->required();
  train_cmd->add_option("--mode", train.mode,
                        "central|independent|vanilla|fedavg|fede4rag")
      ->required();
  train_cmd->add_option("--out", train.out, "Output directory")->required();
  train_cmd->add_option("--seed", train.seed, "Overrides every seed");
  train_cmd->add_option("--rounds", train.rounds, "Communication rounds");
  train_cmd->add_option("--client-id", train.client_id,
                        "Client trained in independent mode");
  train_cmd->add_flag("--no-he", train.no_he, "Plaintext aggregation");
  train_cmd->add_flag("--he", train.he, "Encrypted aggregation");
  train_cmd->add_flag("--he-test-mode", train.he_test_mode,
                      "Seeded keys and encryption randomness");
  train_cmd->add_flag("--transcript", train.transcript,
                      "Write the ciphertext audit transcript");

  EvalRetrievalOptions evr;
  auto* evr_cmd =
      app.add_subcommand("eval-retrieval", "Retrieval metrics for a checkpoint");
  evr_cmd->add_option("--checkpoint", evr.checkpoint, "Model JSON")->required();
  evr_cmd->add_option("--data", evr.data,
                      "Directory with eval.jsonl and corpus.jsonl")
      ->required();
  evr_cmd->add_option("--out", evr.out, "Output directory")->required();
  evr_cmd->add_option("--config", evr.config, "Run config JSON");
  evr_cmd->add_option("--run-name", evr.run_name, "Run label for the CSV");
  evr_cmd->add_flag("--percent", evr.percent, "Scale values to 0-100");
  evr_cmd->add_option("--acc-theta", evr.theta, "Acc@k similarity threshold");
  evr_cmd->add_option("--acc-mode", evr.acc_mode, "threshold|label");

  EvalTextOptions evt;
  auto* evt_cmd = app.add_subcommand("eval-text", "Generation metrics");
  evt_cmd->add_option("--answers", evt.answers, "Answers JSONL")->required();
  evt_cmd->add_option("--out", evt.out, "Output directory")->required();

  CompareOptions cmp;
  auto* cmp_cmd = app.add_subcommand("compare", "Side-by-side report CSV");
  cmp_cmd->add_option("reports", cmp.reports, "Report JSON files")->required();
  cmp_cmd->add_option("--out", cmp.out, "CSV path (stdout if omitted)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitConfig;
  }

  try {
    if (gen_cmd->parsed()) CmdGen(gen);
    if (train_cmd->parsed()) CmdTrain(train);
    if (evr_cmd->parsed()) CmdEvalRetrieval(evr);
    if (evt_cmd->parsed()) CmdEvalText(evt);
    if (cmp_cmd->parsed()) CmdCompare(cmp);
  } catch (const Error& e) {
    std::cerr << "fedembed: " << ErrorKindName(e.kind()) << ": " << e.what()
              << "\n";
    return ExitCodeFor(e.kind());
  } catch (const std::exception& e) {
    std::cerr << "fedembed: internal error: " << e.what() << "\n";
    return kExitNumeric;
  }
  return kExitOk;
}

}  // namespace fedembed::cli
