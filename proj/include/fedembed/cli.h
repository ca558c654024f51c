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

#ifndef FEDEMBED_CLI_H_
#define FEDEMBED_CLI_H_

#include <string>

#include "fedembed/corpus.h"
#include "fedembed/error.h"
#include "fedembed/fedcore.h"
#include "fedembed/he.h"
#include "fedembed/io.h"
#include "fedembed/retrieval.h"

namespace fedembed::cli {

// Process exit codes.
inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitIo = 3;
inline constexpr int kExitNumeric = 4;
inline constexpr int kExitDataIntegrity = 5;

int ExitCodeFor(ErrorKind kind);

struct EvalConfig {
  double theta = 0.5;
  retrieval::AccMode acc_mode = retrieval::AccMode::kThreshold;
};

// Everything a run needs, bound from a JSON document of the form
//   {"corpus": {...}, "model": {...}, "fed": {...}, "he": {...},
//    "eval": {...}}
// with field names identical to the struct members. Absent sections and
// keys take defaults; unknown keys are a ConfigError.
struct RunConfig {
  corpus::CorpusSpec corpus;
  fed::ModelSpec model;
  fed::FedConfig fed;
  he::HeParams he;
  EvalConfig eval;

  OrderedJson ToJson() const;
  static RunConfig FromJson(const std::string& text,
                            const std::string& source);
  static RunConfig Load(const std::string& path);
};

// Entry point shared by the binary and the tests. Never throws.
int RunCli(int argc, const char* const* argv);

}  // namespace fedembed::cli

#endif  // FEDEMBED_CLI_H_
