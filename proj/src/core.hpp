// Copyright 2026 the prsp authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef PRSP_CORE_HPP
#define PRSP_CORE_HPP

#include <cstdint>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace prsp {

inline constexpr const char* kLibraryVersion = "0.1.0";

// Error taxonomy; the C API and the CLI map these onto their status codes.
class Error : public std::runtime_error {
  using std::runtime_error::runtime_error;
};
class ConfigError : public Error {
  using Error::Error;
};
class DataError : public Error {
  using Error::Error;
};
class NumericError : public Error {
  using Error::Error;
};

using RowMajorMatrix =
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MatView = Eigen::Map<RowMajorMatrix>;
using ConstMatView = Eigen::Map<const RowMajorMatrix>;
using ConstVecView = Eigen::Map<const Eigen::VectorXd>;

// Row-major, owning double matrix. Data points are rows throughout the
// library so shard boundaries are contiguous memory ranges.
class DenseMatrix {
 public:
  DenseMatrix() = default;
  DenseMatrix(std::size_t rows, std::size_t cols)
      : rows_(rows), cols_(cols), data_(rows * cols, 0.0) {}
  DenseMatrix(std::size_t rows, std::size_t cols, std::vector<double> data)
      : rows_(rows), cols_(cols), data_(std::move(data)) {
    if (data_.size() != rows_ * cols_)
      throw ConfigError("DenseMatrix: data length does not match shape");
  }

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t size() const { return data_.size(); }

  double& operator()(std::size_t r, std::size_t c) {
    return data_[r * cols_ + c];
  }
  double operator()(std::size_t r, std::size_t c) const {
    return data_[r * cols_ + c];
  }

  double* data() { return data_.data(); }
  const double* data() const { return data_.data(); }

  std::span<const double> row(std::size_t r) const {
    return {data_.data() + r * cols_, cols_};
  }

  bool all_finite() const;

  MatView view() {
    return MatView(data_.data(), static_cast<Eigen::Index>(rows_),
                   static_cast<Eigen::Index>(cols_));
  }
  ConstMatView view() const { return cview(); }
  ConstMatView cview() const {
    return ConstMatView(data_.data(), static_cast<Eigen::Index>(rows_),
                        static_cast<Eigen::Index>(cols_));
  }

  friend bool operator==(const DenseMatrix& a, const DenseMatrix& b) {
    return a.rows_ == b.rows_ && a.cols_ == b.cols_ && a.data_ == b.data_;
  }

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

enum class DataKind { kReal, kNonNegInteger };

// Immutable after construction; safe for concurrent reads.
struct DataSet {
  DenseMatrix y;  // N×D, one data point per row
  DataKind kind = DataKind::kReal;

  std::size_t size() const { return y.rows(); }
  std::size_t dim() const { return y.cols(); }

  // kNonNegInteger iff every entry is a non-negative whole number.
  static DataKind infer_kind(const DenseMatrix& y);
  static DataSet wrap(DenseMatrix y) {
    DataKind k = infer_kind(y);
    return DataSet{std::move(y), k};
  }
};

// log(sum_i exp(v_i)) by max-shift. Entries may be -inf; throws
// NumericError("empty support") when all of them are.
double log_sum_exp(std::span<const double> v);

// Reproducible random stream. The engine and every transform below are
// pinned by this implementation (recorded in run manifests as kAlgorithm),
// so a (seed, algorithm) pair identifies the draw sequence exactly.
class RngStream {
 public:
  static constexpr const char* kAlgorithm = "mt19937_64/box-muller";

  explicit RngStream(std::uint64_t seed) : seed_(seed), engine_(seed) {}

  // Independent stream for a (base, index) pair; used to give parallel
  // shards and auxiliary consumers their own sequences.
  static RngStream derived(std::uint64_t base_seed, std::uint64_t index);

  std::uint64_t seed() const { return seed_; }

  double uniform01();           // [0, 1)
  double normal();              // standard normal
  bool bernoulli(double p);     // p clamped to [0, 1]
  std::size_t categorical(std::span<const double> probs);
  std::uint64_t poisson(double rate);

 private:
  std::uint64_t seed_;
  std::mt19937_64 engine_;
};

}  // namespace prsp

#endif  // PRSP_CORE_HPP
