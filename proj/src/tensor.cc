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

#include "fedembed/tensor.h"

#include <cmath>
#include <string>

#include "fedembed/error.h"

namespace fedembed {
namespace {

void CheckSameLength(size_t a, size_t b, const char* op) {
  if (a != b) {
    throw DimensionError(std::string(op) + ": length " + std::to_string(a) +
                         " vs " + std::to_string(b));
  }
}

}  // namespace

Vec64 Vec64::Basis(size_t len, size_t index) {
  Vec64 v(len);
  v[index] = 1.0;
  return v;
}

Mat64::Mat64(size_t rows, size_t cols, std::vector<double> data)
    : rows_(rows), cols_(cols), data_(std::move(data)) {
  if (data_.size() != rows * cols) {
    throw DimensionError("Mat64: " + std::to_string(data_.size()) +
                         " values for " + std::to_string(rows) + "x" +
                         std::to_string(cols));
  }
  CheckFinite(data_, "Mat64");
}

Mat64 Mat64::Identity(size_t n) {
  Mat64 m(n, n);
  for (size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

void CheckFinite(std::span<const double> values, const char* what) {
  for (size_t i = 0; i < values.size(); ++i) {
    if (!std::isfinite(values[i])) {
      throw NumericError(std::string(what) + ": non-finite value at index " +
                         std::to_string(i));
    }
  }
}

double Dot(std::span<const double> a, std::span<const double> b) {
  CheckSameLength(a.size(), b.size(), "dot");
  double s = 0.0;
  for (size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double L2Norm(std::span<const double> a) {
  double s = 0.0;
  for (double x : a) s += x * x;
  return std::sqrt(s);
}

double Cosine(const Vec64& a, const Vec64& b) {
  CheckSameLength(a.size(), b.size(), "cosine");
  const double na = L2Norm(a);
  const double nb = L2Norm(b);
  if (na == 0.0 || nb == 0.0) {
    throw DegenerateInputError("cosine: zero-norm input");
  }
  return Dot(a, b) / (na * nb);
}

Vec64 MatVec(const Mat64& m, const Vec64& x) {
  CheckSameLength(m.cols(), x.size(), "matvec");
  Vec64 y(m.rows());
  for (size_t r = 0; r < m.rows(); ++r) y[r] = Dot(m.row(r), x.values());
  CheckFinite(y.values(), "matvec");
  return y;
}

Vec64 Axpy(double alpha, const Vec64& x, const Vec64& y) {
  CheckSameLength(x.size(), y.size(), "axpy");
  Vec64 out(y.size());
  for (size_t i = 0; i < y.size(); ++i) out[i] = y[i] + alpha * x[i];
  CheckFinite(out.values(), "axpy");
  return out;
}

Vec64 Add(const Vec64& a, const Vec64& b) { return Axpy(1.0, b, a); }

Vec64 Scale(double alpha, const Vec64& x) {
  Vec64 out(x.size());
  for (size_t i = 0; i < x.size(); ++i) out[i] = alpha * x[i];
  CheckFinite(out.values(), "scale");
  return out;
}

}  // namespace fedembed
