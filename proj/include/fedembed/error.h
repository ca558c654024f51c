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

#ifndef FEDEMBED_ERROR_H_
#define FEDEMBED_ERROR_H_

#include <stdexcept>
#include <string>

namespace fedembed {

// Error categories. The CLI maps each category onto a stable exit code.
enum class ErrorKind {
  kDimension,
  kDegenerateInput,
  kConfig,
  kParse,
  kSchema,
  kIo,
  kCrypto,
  kOverflow,
  kNumeric,
  kDataIntegrity,
};

const char* ErrorKindName(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  ErrorKind kind() const { return kind_; }

 private:
  ErrorKind kind_;
};

// Convenience constructors, e.g. `throw DimensionError("dot: 3 vs 4")`.
inline Error DimensionError(const std::string& m) {
  return Error(ErrorKind::kDimension, m);
}
inline Error DegenerateInputError(const std::string& m) {
  return Error(ErrorKind::kDegenerateInput, m);
}
inline Error ConfigError(const std::string& m) {
  return Error(ErrorKind::kConfig, m);
}
inline Error ParseError(const std::string& m) {
  return Error(ErrorKind::kParse, m);
}
inline Error SchemaError(const std::string& m) {
  return Error(ErrorKind::kSchema, m);
}
inline Error IoError(const std::string& m) { return Error(ErrorKind::kIo, m); }
inline Error CryptoError(const std::string& m) {
  return Error(ErrorKind::kCrypto, m);
}
inline Error OverflowError(const std::string& m) {
  return Error(ErrorKind::kOverflow, m);
}
inline Error NumericError(const std::string& m) {
  return Error(ErrorKind::kNumeric, m);
}
inline Error DataIntegrityError(const std::string& m) {
  return Error(ErrorKind::kDataIntegrity, m);
}

}  // namespace fedembed

#endif  // FEDEMBED_ERROR_H_
