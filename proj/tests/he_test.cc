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


#include <gtest/gtest.h>

#include <cmath>

#include "fedembed/error.h"
#include "fedembed/he.h"
#include "fedembed/random.h"

namespace fedembed::he {
namespace {

HeParams SmallParams() {
  HeParams p;
  p.modulus_bits = 512;
  return p;
}

class HeTest : public ::testing::Test {
 protected:
  static void SetUpTestSuite() { keys_ = new KeyPair(Keygen(SmallParams(), 1)); }
  static void TearDownTestSuite() { delete keys_; }
  static KeyPair* keys_;
};
KeyPair* HeTest::keys_ = nullptr;

TEST_F(HeTest, KeygenIsDeterministicAndWellFormed) {
  const KeyPair again = Keygen(SmallParams(), 1);
  EXPECT_EQ(again.pk, keys_->pk);
  EXPECT_EQ(again.sk, keys_->sk);
  EXPECT_EQ(keys_->pk.g, keys_->pk.n + 1);
  EXPECT_EQ(keys_->pk.n_squared, keys_->pk.n * keys_->pk.n);
  EXPECT_GE(mpz_sizeinbase(keys_->pk.n.get_mpz_t(), 2), 511u);
  EXPECT_FALSE(Keygen(SmallParams(), 2).pk == keys_->pk);
}

TEST_F(HeTest, IntegerRoundTripAndHomomorphism) {
  auto rng = RandomSource::Seeded(3);
  const PublicKey& pk = keys_->pk;
  for (long v : {0L, 1L, 12345L, 999999937L}) {
    EXPECT_EQ(DecryptInteger(pk, keys_->sk, EncryptInteger(pk, v, *rng)), v);
  }
  const mpz_class a = EncryptInteger(pk, 40, *rng);
  const mpz_class b = EncryptInteger(pk, 2, *rng);
  EXPECT_EQ(DecryptInteger(pk, keys_->sk, AddCiphertexts(pk, a, b)), 42);
}

TEST_F(HeTest, EncryptionIsRandomized) {
  auto rng = RandomSource::Seeded(4);
  const mpz_class a = EncryptInteger(keys_->pk, 7, *rng);
  const mpz_class b = EncryptInteger(keys_->pk, 7, *rng);
  EXPECT_NE(a, b);
  auto os = RandomSource::OsEntropy();
  EXPECT_EQ(DecryptInteger(keys_->pk, keys_->sk,
                           EncryptInteger(keys_->pk, 7, *os)),
            7);
}

TEST_F(HeTest, CodecRoundTripWithinResolution) {
  const FixedPointCodec codec(SmallParams(), keys_->pk.n);
  Rng rng(5);
  for (int i = 0; i < 200; ++i) {
    const double v = rng.Uniform(-8.0, 8.0);
    EXPECT_NEAR(codec.DecodeScalar(codec.EncodeScalar(v, 0)), v,
                std::ldexp(1.0, -33));
  }
  EXPECT_EQ(codec.DecodeScalar(codec.EncodeScalar(-1.5, 0)), -1.5);
}

TEST_F(HeTest, CodecRangeBoundary) {
  const FixedPointCodec codec(SmallParams(), keys_->pk.n);
  EXPECT_NO_THROW(codec.EncodeScalar(8.0, 0));
  EXPECT_NO_THROW(codec.EncodeScalar(-8.0, 0));
  try {
    codec.Encode(Vec64{0.0, 8.5});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kOverflow);
    EXPECT_NE(std::string(e.what()).find("1"), std::string::npos);
  }
  EXPECT_THROW(codec.EncodeScalar(std::nan(""), 0), Error);
}

TEST_F(HeTest, AggregateEqualsWeightedMean) {
  const FixedPointCodec codec(SmallParams(), keys_->pk.n);
  auto rng = RandomSource::Seeded(6);
  Rng r(6);
  for (int t = 0; t < 5; ++t) {
    const size_t k = 2 + r.Below(5);
    const size_t dim = 1 + r.Below(6);
    std::vector<CiphertextVec> cts;
    std::vector<double> num(dim, 0.0);
    int64_t total = 0;
    for (size_t c = 0; c < k; ++c) {
      Vec64 u(dim);
      for (size_t i = 0; i < dim; ++i) u[i] = r.Uniform(-2.0, 2.0);
      const int64_t w = 1 + static_cast<int64_t>(r.Below(1000));
      cts.push_back(EncryptUpdate(keys_->pk, codec, u, w, *rng));
      for (size_t i = 0; i < dim; ++i) num[i] += static_cast<double>(w) * u[i];
      total += w;
    }
    const Vec64 got = DecryptAggregate(
        keys_->pk, keys_->sk, codec, Aggregate(keys_->pk, cts, 1024), total);
    for (size_t i = 0; i < dim; ++i) {
      EXPECT_NEAR(got[i], num[i] / static_cast<double>(total), 1e-6);
    }
  }
}

TEST_F(HeTest, AggregateChecks) {
  const FixedPointCodec codec(SmallParams(), keys_->pk.n);
  auto rng = RandomSource::Seeded(7);
  std::vector<CiphertextVec> cts = {
      EncryptUpdate(keys_->pk, codec, Vec64{1.0}, 1, *rng),
      EncryptUpdate(keys_->pk, codec, Vec64{1.0, 2.0}, 1, *rng)};
  try {
    Aggregate(keys_->pk, cts, 1024);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kDimension);
  }
  cts.pop_back();
  cts.push_back(cts.front());
  EXPECT_THROW(Aggregate(keys_->pk, cts, 1), Error);
  EXPECT_THROW(Aggregate(keys_->pk, {}, 4), Error);
}

TEST_F(HeTest, WeightLimits) {
  const FixedPointCodec codec(SmallParams(), keys_->pk.n);
  auto rng = RandomSource::Seeded(8);
  EXPECT_THROW(EncryptUpdate(keys_->pk, codec, Vec64{1.0}, 0, *rng), Error);
  try {
    EncryptUpdate(keys_->pk, codec, Vec64{1.0}, (int64_t{1} << 20) + 1, *rng);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kOverflow);
  }
}

TEST_F(HeTest, KeyJsonRoundTrip) {
  EXPECT_EQ(PublicKey::FromJson(keys_->pk.ToJson(), "pk"), keys_->pk);
  EXPECT_EQ(SecretKey::FromJson(keys_->sk.ToJson(), "sk"), keys_->sk);
  EXPECT_THROW(PublicKey::FromJson(R"({"n": "zz"})", "pk"), Error);
}

TEST_F(HeTest, TranscriptLineIsHex) {
  CiphertextVec c;
  c.values = {mpz_class(255), mpz_class(16)};
  EXPECT_EQ(TranscriptLine(3, 2, c),
            "{\"client_id\":3,\"round\":2,\"ciphertexts\":[\"ff\",\"10\"]}\n");
  EXPECT_EQ(FromHex(ToHex(mpz_class(123456789)), "x"), 123456789);
}

TEST(HeParamsTest, ValidationAndCapacity) {
  HeParams p;
  p.modulus_bits = 100;
  EXPECT_THROW(p.Validate(), Error);
  HeParams tiny;
  tiny.modulus_bits = 512;
  tiny.frac_bits = 256;
  tiny.max_abs_value = 1e60;
  tiny.max_clients = 1 << 20;
  tiny.max_weight = int64_t{1} << 62;
  try {
    Keygen(tiny, 1);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kConfig);
  }
}

}  // namespace
}  // namespace fedembed::he
