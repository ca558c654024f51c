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

#ifndef FEDEMBED_LOGGING_H_
#define FEDEMBED_LOGGING_H_

#include <spdlog/spdlog.h>

namespace fedembed {

// Reads FEDEMBED_LOG={error,warn,info,debug}; unset or unknown means warn.
// Logs go to stderr so stdout stays machine-readable.
void InitLoggingFromEnv();

}  // namespace fedembed

#endif  // FEDEMBED_LOGGING_H_
