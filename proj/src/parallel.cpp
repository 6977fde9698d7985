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

#include "parallel.hpp"

#include <atomic>
#include <exception>
#include <thread>

namespace prsp {

ShardPlan ShardPlan::over(std::size_t rows, std::uint32_t workers) {
  return with_shards(rows, workers, workers);
}

ShardPlan ShardPlan::with_shards(std::size_t rows, std::uint32_t shard_count,
                                 std::uint32_t workers) {
  if (workers == 0) throw ConfigError("shard plan: workers must be >= 1");
  if (shard_count == 0) throw ConfigError("shard plan: shards must be >= 1");
  ShardPlan plan;
  plan.workers = workers;
  plan.shards.reserve(shard_count);
  const std::size_t base = rows / shard_count;
  const std::size_t extra = rows % shard_count;
  std::size_t begin = 0;
  for (std::uint32_t i = 0; i < shard_count; ++i) {
    const std::size_t len = base + (i < extra ? 1 : 0);
    plan.shards.push_back({begin, begin + len});
    begin += len;
  }
  return plan;
}

void ShardPlan::validate(std::size_t rows) const {
  if (workers == 0) throw ConfigError("shard plan: workers must be >= 1");
  if (shards.empty()) throw ConfigError("shard plan: no shards");
  std::size_t cursor = 0;
  for (const auto& s : shards) {
    if (s.begin != cursor || s.end < s.begin)
      throw ConfigError("shard plan: shards must be contiguous and ordered");
    cursor = s.end;
  }
  if (cursor != rows)
    throw ConfigError("shard plan: shards do not cover the dataset");
}

DenseMatrix& SuffStats::field(const std::string& name, std::size_t rows,
                              std::size_t cols) {
  for (auto& [key, mat] : fields_) {
    if (key == name) {
      if (mat.rows() != rows || mat.cols() != cols)
        throw ConfigError("suff stats: shape mismatch for field " + name);
      return mat;
    }
  }
  fields_.emplace_back(name, DenseMatrix(rows, cols));
  return fields_.back().second;
}

DenseMatrix& SuffStats::at(const std::string& name) {
  for (auto& [key, mat] : fields_)
    if (key == name) return mat;
  throw ConfigError("suff stats: missing field " + name);
}

const DenseMatrix& SuffStats::at(const std::string& name) const {
  for (const auto& [key, mat] : fields_)
    if (key == name) return mat;
  throw ConfigError("suff stats: missing field " + name);
}

bool SuffStats::has(const std::string& name) const {
  for (const auto& [key, mat] : fields_)
    if (key == name) return true;
  return false;
}

void SuffStats::combine(const SuffStats& other) {
  if (other.empty()) return;  // identity; leaves *this bitwise unchanged
  if (empty()) {
    *this = other;
    return;
  }
  if (fields_.size() != other.fields_.size())
    throw ConfigError("suff stats: combining incompatible layouts");
  for (std::size_t i = 0; i < fields_.size(); ++i) {
    auto& [key, mat] = fields_[i];
    const auto& [okey, omat] = other.fields_[i];
    if (key != okey || mat.rows() != omat.rows() || mat.cols() != omat.cols())
      throw ConfigError("suff stats: combining incompatible layouts");
    double* a = mat.data();
    const double* b = omat.data();
    for (std::size_t j = 0; j < mat.size(); ++j) a[j] += b[j];
  }
  points += other.points;
}

SuffStats map_reduce(const ShardFn& shard_fn, const ShardPlan& plan) {
  const std::size_t n_shards = plan.shards.size();
  std::vector<SuffStats> partial(n_shards);
  std::vector<std::exception_ptr> failures(n_shards);

  std::atomic<std::size_t> next{0};
  auto worker = [&]() {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= n_shards) return;
      try {
        partial[i] = shard_fn(plan.shards[i]);
      } catch (...) {
        failures[i] = std::current_exception();
      }
    }
  };

  const std::uint32_t threads = std::min<std::uint32_t>(
      plan.workers, static_cast<std::uint32_t>(n_shards));
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(threads);
    for (std::uint32_t t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }

  for (std::size_t i = 0; i < n_shards; ++i) {
    if (failures[i]) {
      const std::string where = "shard " + std::to_string(i) + ": ";
      try {
        std::rethrow_exception(failures[i]);
      } catch (const ConfigError& e) {
        throw ConfigError(where + e.what());
      } catch (const DataError& e) {
        throw DataError(where + e.what());
      } catch (const NumericError& e) {
        throw NumericError(where + e.what());
      } catch (const std::exception& e) {
        throw Error(where + e.what());
      }
    }
  }

  // Ordered pairwise fold: reproducibility outranks reduction speed here.
  SuffStats total;
  for (std::size_t i = 0; i < n_shards; ++i) total.combine(partial[i]);
  return total;
}

}  // namespace prsp
