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

// Dense float64 vectors and row-major matrices. Every public operation
// rejects non-finite results so NaN/Inf never escape into training state.

#ifndef FEDEMBED_TENSOR_H_
#define FEDEMBED_TENSOR_H_

#include <cstddef>
#include <initializer_list>
#include <span>
#include <vector>

namespace fedembed {

class Vec64 {
 public:
  Vec64() = default;
  explicit Vec64(size_t len, double fill = 0.0) : data_(len, fill) {}
  Vec64(std::initializer_list<double> values) : data_(values) {}
  explicit Vec64(std::vector<double> values) : data_(std::move(values)) {}

  size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  double operator[](size_t i) const { return data_[i]; }
  double& operator[](size_t i) { return data_[i]; }

  std::span<const double> values() const { return data_; }
  std::span<double> values() { return data_; }
  const std::vector<double>& raw() const { return data_; }

  bool operator==(const Vec64&) const = default;

  static Vec64 Basis(size_t len, size_t index);

 private:
  std::vector<double> data_;
};

// Row-major: element (r, c) lives at data[r * cols + c].
class Mat64 {
 public:
  Mat64() = default;
  Mat64(size_t rows, size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}
  // Throws DimensionError unless data.size() == rows * cols.
  Mat64(size_t rows, size_t cols, std::vector<double> data);

  static Mat64 Identity(size_t n);

  size_t rows() const { return rows_; }
  size_t cols() const { return cols_; }

  double operator()(size_t r, size_t c) const { return data_[r * cols_ + c]; }
  double& operator()(size_t r, size_t c) { return data_[r * cols_ + c]; }

  std::span<const double> row(size_t r) const {
    return std::span<const double>(data_).subspan(r * cols_, cols_);
  }
  std::span<const double> values() const { return data_; }
  std::span<double> values() { return data_; }

  bool operator==(const Mat64&) const = default;

 private:
  size_t rows_ = 0;
  size_t cols_ = 0;
  std::vector<double> data_;
};

double Dot(std::span<const double> a, std::span<const double> b);
inline double Dot(const Vec64& a, const Vec64& b) {
  return Dot(a.values(), b.values());
}

double L2Norm(std::span<const double> a);
inline double L2Norm(const Vec64& a) { return L2Norm(a.values()); }

// Throws DegenerateInputError when either input has zero norm.
double Cosine(const Vec64& a, const Vec64& b);

Vec64 MatVec(const Mat64& m, const Vec64& x);

// Returns y + alpha * x.
Vec64 Axpy(double alpha, const Vec64& x, const Vec64& y);

Vec64 Add(const Vec64& a, const Vec64& b);
Vec64 Scale(double alpha, const Vec64& x);

// Throws NumericError if any element is NaN or Inf. `what` names the caller.
void CheckFinite(std::span<const double> values, const char* what);

}  // namespace fedembed

#endif  // FEDEMBED_TENSOR_H_
