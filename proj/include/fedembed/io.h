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

// File helpers shared by every module that reads or writes artifacts.

#ifndef FEDEMBED_IO_H_
#define FEDEMBED_IO_H_

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

namespace fedembed {

using OrderedJson = nlohmann::ordered_json;

std::string ReadFile(const std::filesystem::path& path);

// Creates parent directories as needed. Throws IoError on failure.
void WriteFile(const std::filesystem::path& path, std::string_view contents);

// Splits on '\n'. A trailing newline does not produce an extra empty line.
std::vector<std::string> SplitLines(std::string_view text);

// Parses one JSONL line; ParseError carries the 1-based line number.
nlohmann::json ParseJsonLine(std::string_view line, size_t line_number,
                             const std::string& source);

// Fetches a required key or throws SchemaError naming key and line.
const nlohmann::json& RequireKey(const nlohmann::json& record,
                                 const char* key, size_t line_number,
                                 const std::string& source);

// 17 significant digits ("%.17g"); parses back to the identical double.
std::string FormatDouble17(double value);

// Lower-case hex SHA-256 of a byte string.
std::string Sha256Hex(std::string_view bytes);

}  // namespace fedembed

#endif  // FEDEMBED_IO_H_
