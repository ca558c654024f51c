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
#include <limits>

#include "fedembed/error.h"
#include "fedembed/random.h"
#include "fedembed/tensor.h"

namespace fedembed {
namespace {

TEST(TensorTest, DotAndNorm) {
  const Vec64 a({1.0, 2.0, 2.0});
  const Vec64 b({3.0, 0.0, -1.0});
  EXPECT_DOUBLE_EQ(Dot(a, b), 1.0);
  EXPECT_DOUBLE_EQ(L2Norm(a), 3.0);
}

TEST(TensorTest, CosineBoundsAndSymmetry) {
  Rng rng(11);
  for (int t = 0; t < 100; ++t) {
    Vec64 a(7), b(7);
    for (size_t i = 0; i < 7; ++i) {
      a[i] = rng.Uniform(-3, 3);
      b[i] = rng.Uniform(-3, 3);
    }
    const double c = Cosine(a, b);
    EXPECT_LE(std::abs(c), 1.0 + 1e-12);
    EXPECT_DOUBLE_EQ(c, Cosine(b, a));
    EXPECT_NEAR(Cosine(a, Scale(2.5, a)), 1.0, 1e-12);
  }
}

TEST(TensorTest, CosineRejectsZeroVector) {
  try {
    Cosine(Vec64(3), Vec64{1.0, 0.0, 0.0});
    FAIL() << "expected DegenerateInputError";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kDegenerateInput);
  }
}

TEST(TensorTest, LengthMismatchIsDimensionError) {
  try {
    Dot(Vec64(2), Vec64(3));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kDimension);
  }
}

TEST(TensorTest, MatVecMatchesHandComputation) {
  const Mat64 m(2, 3, {1, 2, 3, 4, 5, 6});
  const Vec64 y = MatVec(m, Vec64{1.0, 0.0, -1.0});
  EXPECT_EQ(y.raw(), (std::vector<double>{-2.0, -2.0}));
  EXPECT_EQ(MatVec(Mat64::Identity(3), Vec64{7, 8, 9}).raw(),
            (std::vector<double>{7, 8, 9}));
}

TEST(TensorTest, AxpyAddScale) {
  const Vec64 x({1, 2});
  const Vec64 y({10, 20});
  EXPECT_EQ(Axpy(2.0, x, y).raw(), (std::vector<double>{12, 24}));
  EXPECT_EQ(Add(x, y).raw(), (std::vector<double>{11, 22}));
  EXPECT_EQ(Scale(-1.0, x).raw(), (std::vector<double>{-1, -2}));
}

TEST(TensorTest, NonFiniteIsNumericError) {
  const double inf = std::numeric_limits<double>::infinity();
  try {
    Mat64(1, 2, {1.0, std::nan("")});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kNumeric);
  }
  try {
    Scale(inf, Vec64{1.0});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kNumeric);
  }
}

TEST(TensorTest, MatrixShapeMismatch) {
  EXPECT_THROW(Mat64(2, 2, {1, 2, 3}), Error);
}

TEST(RandomTest, DeterministicStreams) {
  Rng a(5), b(5), c(6);
  for (int i = 0; i < 10; ++i) EXPECT_EQ(a.NextU64(), b.NextU64());
  EXPECT_NE(Rng(5).NextU64(), c.NextU64());
  EXPECT_NE(DeriveSeed({1, 2}), DeriveSeed({2, 1}));
  EXPECT_EQ(DeriveSeed({1, 2, 3}), DeriveSeed({1, 2, 3}));
}

TEST(RandomTest, BelowAndSampleStayInRange) {
  Rng rng(3);
  for (int i = 0; i < 1000; ++i) EXPECT_LT(rng.Below(7), 7u);
  const auto s = rng.SampleWithoutReplacement(20, 20);
  std::vector<size_t> sorted(s.begin(), s.end());
  std::sort(sorted.begin(), sorted.end());
  for (size_t i = 0; i < 20; ++i) EXPECT_EQ(sorted[i], i);
}

}  // namespace
}  // namespace fedembed
