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

#include "fedembed/he.h"

#include <openssl/rand.h>

#include <cmath>
#include <vector>

#include "fedembed/error.h"
#include "fedembed/io.h"
#include "json.hpp"

namespace fedembed::he {
namespace {

constexpr int kPrimeRetries = 16;

class SeededSource : public RandomSource {
 public:
  explicit SeededSource(uint64_t seed) : state_(gmp_randinit_mt) {
    state_.seed(mpz_class(std::to_string(seed)));
  }

  mpz_class UnitBelow(const mpz_class& n) override {
    for (;;) {
      mpz_class r = state_.get_z_range(n);
      if (r != 0 && gcd(r, n) == 1) return r;
    }
  }

 private:
  gmp_randclass state_;
};

class OsSource : public RandomSource {
 public:
  mpz_class UnitBelow(const mpz_class& n) override {
    // 64 extra bits keep the modular bias below 2^-64.
    const size_t bytes = (mpz_sizeinbase(n.get_mpz_t(), 2) + 64 + 7) / 8;
    std::vector<unsigned char> buf(bytes);
    for (;;) {
      if (RAND_bytes(buf.data(), static_cast<int>(buf.size())) != 1) {
        throw CryptoError("operating system entropy unavailable");
      }
      mpz_class r;
      mpz_import(r.get_mpz_t(), buf.size(), 1, 1, 0, 0, buf.data());
      r %= n;
      if (r != 0 && gcd(r, n) == 1) return r;
    }
  }
};

// Random prime of exactly `bits` bits with the top two bits set, so the
// product of two such primes has exactly 2 * bits bits.
mpz_class RandomPrime(gmp_randclass& state, int bits) {
  mpz_class x = state.get_z_bits(bits);
  mpz_setbit(x.get_mpz_t(), bits - 1);
  mpz_setbit(x.get_mpz_t(), bits - 2);
  mpz_nextprime(x.get_mpz_t(), x.get_mpz_t());
  return x;
}

mpz_class L(const mpz_class& x, const mpz_class& n) { return (x - 1) / n; }

nlohmann::json ParseKeyJson(const std::string& text, const std::string& source,
                            std::initializer_list<const char*> keys) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(source + ": malformed key JSON (" + e.what() + ")");
  }
  if (!j.is_object()) throw ParseError(source + ": expected a JSON object");
  for (const char* key : keys) {
    if (!j.contains(key) || !j[key].is_string()) {
      throw SchemaError(source + ": missing hex field \"" + key + "\"");
    }
  }
  return j;
}

}  // namespace

void HeParams::Validate() const {
  if (modulus_bits < 512) {
    throw ConfigError("he.modulus_bits must be >= 512, got " +
                      std::to_string(modulus_bits));
  }
  if (modulus_bits % 2 != 0) {
    throw ConfigError("he.modulus_bits must be even");
  }
  if (frac_bits < 0 || frac_bits > 256) {
    throw ConfigError("he.frac_bits must be in [0, 256]");
  }
  if (max_clients < 1) throw ConfigError("he.max_clients must be >= 1");
  if (max_weight < 1) throw ConfigError("he.max_weight must be >= 1");
  if (!(max_abs_value > 0.0) || !std::isfinite(max_abs_value)) {
    throw ConfigError("he.max_abs_value must be positive");
  }
}

mpz_class HeParams::WorstCaseMagnitude() const {
  mpz_class bound;
  mpz_set_d(bound.get_mpz_t(), std::ceil(std::ldexp(max_abs_value, frac_bits)));
  bound *= max_clients;
  bound *= max_weight;
  return bound;
}

std::string ToHex(const mpz_class& v) { return v.get_str(16); }

mpz_class FromHex(const std::string& hex, const std::string& what) {
  mpz_class v;
  if (hex.empty() || v.set_str(hex, 16) != 0 || v < 0) {
    throw ParseError(what + ": invalid hex integer");
  }
  return v;
}

std::string PublicKey::ToJson() const {
  OrderedJson j;
  j["n"] = ToHex(n);
  j["g"] = ToHex(g);
  return j.dump() + "\n";
}

PublicKey PublicKey::FromJson(const std::string& text,
                              const std::string& source) {
  const auto j = ParseKeyJson(text, source, {"n", "g"});
  PublicKey pk;
  pk.n = FromHex(j["n"].get<std::string>(), source + " n");
  pk.g = FromHex(j["g"].get<std::string>(), source + " g");
  pk.n_squared = pk.n * pk.n;
  return pk;
}

std::string SecretKey::ToJson() const {
  OrderedJson j;
  j["lambda"] = ToHex(lambda);
  j["mu"] = ToHex(mu);
  return j.dump() + "\n";
}

SecretKey SecretKey::FromJson(const std::string& text,
                              const std::string& source) {
  const auto j = ParseKeyJson(text, source, {"lambda", "mu"});
  SecretKey sk;
  sk.lambda = FromHex(j["lambda"].get<std::string>(), source + " lambda");
  sk.mu = FromHex(j["mu"].get<std::string>(), source + " mu");
  return sk;
}

std::unique_ptr<RandomSource> RandomSource::Seeded(uint64_t seed) {
  return std::make_unique<SeededSource>(seed);
}

std::unique_ptr<RandomSource> RandomSource::OsEntropy() {
  return std::make_unique<OsSource>();
}

namespace {

KeyPair KeygenFromSeed(const HeParams& params, const mpz_class& seed) {
  params.Validate();
  gmp_randclass state(gmp_randinit_mt);
  state.seed(seed);
  const int half = params.modulus_bits / 2;
  for (int attempt = 0; attempt < kPrimeRetries; ++attempt) {
    const mpz_class p = RandomPrime(state, half);
    const mpz_class q = RandomPrime(state, half);
    if (p == q) continue;
    const mpz_class n = p * q;
    if (static_cast<int>(mpz_sizeinbase(n.get_mpz_t(), 2)) !=
        params.modulus_bits) {
      continue;
    }
    const mpz_class pm1 = p - 1;
    const mpz_class qm1 = q - 1;
    if (gcd(n, pm1 * qm1) != 1) continue;

    // No wrap-around: worst-case aggregate must stay below n / 2.
    if (2 * params.WorstCaseMagnitude() >= n) {
      throw ConfigError(
          "he parameters overflow the plaintext space: 2^frac_bits * "
          "max_abs_value * max_clients * max_weight must be < n/2");
    }

    KeyPair kp;
    kp.pk.n = n;
    kp.pk.g = n + 1;
    kp.pk.n_squared = n * n;
    kp.sk.lambda = lcm(pm1, qm1);
    mpz_class gl;
    mpz_powm(gl.get_mpz_t(), kp.pk.g.get_mpz_t(), kp.sk.lambda.get_mpz_t(),
             kp.pk.n_squared.get_mpz_t());
    const mpz_class lg = L(gl, n);
    if (mpz_invert(kp.sk.mu.get_mpz_t(), lg.get_mpz_t(), n.get_mpz_t()) ==
        0) {
      continue;
    }
    return kp;
  }
  throw CryptoError("prime generation failed after " +
                    std::to_string(kPrimeRetries) + " attempts");
}

}  // namespace

KeyPair Keygen(const HeParams& params, uint64_t seed) {
  return KeygenFromSeed(params, mpz_class(std::to_string(seed)));
}

KeyPair KeygenFromEntropy(const HeParams& params) {
  unsigned char buf[32];
  if (RAND_bytes(buf, sizeof(buf)) != 1) {
    throw CryptoError("operating system entropy unavailable");
  }
  mpz_class seed;
  mpz_import(seed.get_mpz_t(), sizeof(buf), 1, 1, 0, 0, buf);
  return KeygenFromSeed(params, seed);
}

FixedPointCodec::FixedPointCodec(const HeParams& params,
                                 const mpz_class& plaintext_modulus)
    : frac_bits_(params.frac_bits),
      max_abs_(params.max_abs_value),
      max_weight_(params.max_weight),
      n_(plaintext_modulus),
      half_n_(plaintext_modulus / 2) {}

mpz_class FixedPointCodec::EncodeScalar(double v, size_t index) const {
  if (!std::isfinite(v) || std::fabs(v) > max_abs_) {
    throw OverflowError("fixed-point encode: component " +
                        std::to_string(index) + " = " + FormatDouble17(v) +
                        " exceeds max_abs_value " + FormatDouble17(max_abs_));
  }
  mpz_class m;
  // Scaling by 2^f is exact in binary floating point; only rounding loses.
  mpz_set_d(m.get_mpz_t(), std::nearbyint(std::ldexp(v, frac_bits_)));
  if (m < 0) m += n_;
  return m;
}

std::vector<mpz_class> FixedPointCodec::Encode(const Vec64& v) const {
  std::vector<mpz_class> out;
  out.reserve(v.size());
  for (size_t i = 0; i < v.size(); ++i) out.push_back(EncodeScalar(v[i], i));
  return out;
}

double FixedPointCodec::DecodeScalar(const mpz_class& m) const {
  mpz_class s = m % n_;
  if (s > half_n_) s -= n_;
  return std::ldexp(s.get_d(), -frac_bits_);
}

Vec64 FixedPointCodec::Decode(std::span<const mpz_class> iv) const {
  Vec64 out(iv.size());
  for (size_t i = 0; i < iv.size(); ++i) out[i] = DecodeScalar(iv[i]);
  return out;
}

mpz_class EncryptInteger(const PublicKey& pk, const mpz_class& m,
                         RandomSource& rng) {
  const mpz_class r = rng.UnitBelow(pk.n);
  mpz_class rn;
  mpz_powm(rn.get_mpz_t(), r.get_mpz_t(), pk.n.get_mpz_t(),
           pk.n_squared.get_mpz_t());
  // g^m = (1 + n)^m = 1 + m n  (mod n^2).
  mpz_class gm = (1 + (m % pk.n) * pk.n) % pk.n_squared;
  return (gm * rn) % pk.n_squared;
}

mpz_class DecryptInteger(const PublicKey& pk, const SecretKey& sk,
                         const mpz_class& c) {
  mpz_class x;
  mpz_powm(x.get_mpz_t(), c.get_mpz_t(), sk.lambda.get_mpz_t(),
           pk.n_squared.get_mpz_t());
  return (L(x, pk.n) * sk.mu) % pk.n;
}

mpz_class AddCiphertexts(const PublicKey& pk, const mpz_class& a,
                         const mpz_class& b) {
  return (a * b) % pk.n_squared;
}

CiphertextVec EncryptUpdate(const PublicKey& pk, const FixedPointCodec& codec,
                            const Vec64& update, int64_t int_weight,
                            RandomSource& rng) {
  if (int_weight < 1) {
    throw ConfigError("encrypt_update: weight must be >= 1, got " +
                      std::to_string(int_weight));
  }
  if (int_weight > codec.max_weight()) {
    throw OverflowError("encrypt_update: weight " +
                        std::to_string(int_weight) + " exceeds max_weight " +
                        std::to_string(codec.max_weight()));
  }
  std::vector<mpz_class> plain = codec.Encode(update);
  CiphertextVec out;
  out.values.reserve(plain.size());
  for (auto& m : plain) {
    m = (m * int_weight) % pk.n;
    out.values.push_back(EncryptInteger(pk, m, rng));
  }
  return out;
}

CiphertextVec Aggregate(const PublicKey& pk,
                        std::span<const CiphertextVec> ciphers,
                        int64_t max_clients) {
  if (ciphers.empty()) throw ConfigError("aggregate: no inputs");
  if (static_cast<int64_t>(ciphers.size()) > max_clients) {
    throw ConfigError("aggregate: " + std::to_string(ciphers.size()) +
                      " inputs exceed max_clients " +
                      std::to_string(max_clients));
  }
  const size_t dim = ciphers.front().size();
  for (const auto& c : ciphers) {
    if (c.size() != dim) {
      throw DimensionError("aggregate: ciphertext length " +
                           std::to_string(c.size()) + " vs " +
                           std::to_string(dim));
    }
  }
  CiphertextVec out = ciphers.front();
  for (size_t k = 1; k < ciphers.size(); ++k) {
    for (size_t i = 0; i < dim; ++i) {
      out.values[i] = AddCiphertexts(pk, out.values[i], ciphers[k].values[i]);
    }
  }
  return out;
}

Vec64 DecryptAggregate(const PublicKey& pk, const SecretKey& sk,
                       const FixedPointCodec& codec, const CiphertextVec& agg,
                       int64_t total_weight) {
  if (total_weight < 1) {
    throw ConfigError("decrypt_aggregate: total weight must be >= 1");
  }
  Vec64 out(agg.size());
  for (size_t i = 0; i < agg.size(); ++i) {
    out[i] = codec.DecodeScalar(DecryptInteger(pk, sk, agg.values[i])) /
             static_cast<double>(total_weight);
  }
  return out;
}

std::string TranscriptLine(int64_t client_id, int64_t round,
                           const CiphertextVec& c) {
  OrderedJson j;
  j["client_id"] = client_id;
  j["round"] = round;
  auto arr = OrderedJson::array();
  for (const auto& v : c.values) arr.push_back(ToHex(v));
  j["ciphertexts"] = std::move(arr);
  return j.dump() + "\n";
}

}  // namespace fedembed::he
