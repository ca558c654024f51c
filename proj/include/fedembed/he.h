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

// Additively homomorphic secure aggregation of real-valued updates.
//
// The scheme is Paillier with g = n + 1:
//   Enc(m) = g^m * r^n mod n^2,  Dec(c) = L(c^lambda mod n^2) * mu mod n,
//   L(x) = (x - 1) / n,  lambda = lcm(p - 1, q - 1),  mu = lambda^-1 mod n.
// Multiplying ciphertexts adds plaintexts mod n. Reals are carried as
// fixed-point integers with `frac_bits` fractional bits, negatives embedded
// as n - |m|.
//
// Protocol: each client encodes its update, pre-multiplies by its integer
// weight n_k, and encrypts. The aggregator multiplies ciphertexts together
// using only the public key. A key holder decrypts, decodes, and divides by
// N = sum n_k to obtain the weighted mean.

#ifndef FEDEMBED_HE_H_
#define FEDEMBED_HE_H_

#include <gmpxx.h>

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "fedembed/tensor.h"

namespace fedembed::he {

struct HeParams {
  int modulus_bits = 2048;
  int frac_bits = 32;
  int64_t max_clients = 1024;
  double max_abs_value = 8.0;
  // Largest integer client weight (n_scale_max).
  int64_t max_weight = int64_t{1} << 20;

  // ConfigError unless the scalar fields are in range.
  void Validate() const;
  // Worst-case |aggregate plaintext|: 2^f * max_abs * K_max * max_weight.
  mpz_class WorstCaseMagnitude() const;
};

struct PublicKey {
  mpz_class n;
  mpz_class g;
  mpz_class n_squared;

  std::string ToJson() const;
  static PublicKey FromJson(const std::string& text,
                            const std::string& source);
  bool operator==(const PublicKey& o) const {
    return n == o.n && g == o.g;
  }
};

struct SecretKey {
  mpz_class lambda;
  mpz_class mu;

  std::string ToJson() const;
  static SecretKey FromJson(const std::string& text,
                            const std::string& source);
  bool operator==(const SecretKey& o) const {
    return lambda == o.lambda && mu == o.mu;
  }
};

struct KeyPair {
  PublicKey pk;
  SecretKey sk;
};

// Source of encryption randomness r in Z*_n.
class RandomSource {
 public:
  virtual ~RandomSource() = default;
  // Uniform in [1, n) and coprime to n.
  virtual mpz_class UnitBelow(const mpz_class& n) = 0;

  // Reproducible stream for tests and audit runs.
  static std::unique_ptr<RandomSource> Seeded(uint64_t seed);
  // Cryptographically secure stream from the operating system.
  static std::unique_ptr<RandomSource> OsEntropy();
};

// Deterministic for a fixed seed. Throws ConfigError if `params` cannot
// hold the worst-case aggregate without wrap-around, CryptoError if prime
// generation fails.
KeyPair Keygen(const HeParams& params, uint64_t seed);
// Same, seeded with 256 bits of operating system entropy.
KeyPair KeygenFromEntropy(const HeParams& params);

class FixedPointCodec {
 public:
  FixedPointCodec(const HeParams& params, const mpz_class& plaintext_modulus);

  int frac_bits() const { return frac_bits_; }
  const mpz_class& modulus() const { return n_; }

  // round(v_i * 2^f) mod n. OverflowError naming the index if
  // |v_i| > max_abs_value or v_i is not finite.
  std::vector<mpz_class> Encode(const Vec64& v) const;
  mpz_class EncodeScalar(double v, size_t index) const;
  // Inverse of Encode: residues above n/2 are read as negative.
  Vec64 Decode(std::span<const mpz_class> iv) const;
  double DecodeScalar(const mpz_class& m) const;

  double max_abs_value() const { return max_abs_; }
  int64_t max_weight() const { return max_weight_; }

 private:
  int frac_bits_;
  double max_abs_;
  int64_t max_weight_;
  mpz_class n_;
  mpz_class half_n_;
};

struct CiphertextVec {
  std::vector<mpz_class> values;
  size_t size() const { return values.size(); }
};

mpz_class EncryptInteger(const PublicKey& pk, const mpz_class& m,
                         RandomSource& rng);
mpz_class DecryptInteger(const PublicKey& pk, const SecretKey& sk,
                         const mpz_class& c);
// Homomorphic addition of two ciphertexts.
mpz_class AddCiphertexts(const PublicKey& pk, const mpz_class& a,
                         const mpz_class& b);

// Componentwise Enc(encode(update_i) * weight). Every component is range
// checked before the first encryption.
CiphertextVec EncryptUpdate(const PublicKey& pk, const FixedPointCodec& codec,
                            const Vec64& update, int64_t int_weight,
                            RandomSource& rng);

// Server side: homomorphic sum using only public material.
CiphertextVec Aggregate(const PublicKey& pk,
                        std::span<const CiphertextVec> ciphers,
                        int64_t max_clients);

// decode(Dec(agg)) / total_weight.
Vec64 DecryptAggregate(const PublicKey& pk, const SecretKey& sk,
                       const FixedPointCodec& codec, const CiphertextVec& agg,
                       int64_t total_weight);

// One line of the optional ciphertext audit transcript:
// {"client_id": int, "round": int, "ciphertexts": [hex]}
std::string TranscriptLine(int64_t client_id, int64_t round,
                           const CiphertextVec& c);

std::string ToHex(const mpz_class& v);
mpz_class FromHex(const std::string& hex, const std::string& what);

}  // namespace fedembed::he

#endif  // FEDEMBED_HE_H_
