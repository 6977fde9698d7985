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

#ifndef PRSP_PARALLEL_HPP
#define PRSP_PARALLEL_HPP

#include <cstdint>
#include <deque>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "core.hpp"

namespace prsp {

struct RowRange {
  std::size_t begin = 0;
  std::size_t end = 0;
  std::size_t size() const { return end - begin; }
};

// Contiguous, ordered, disjoint row shards covering the dataset once.
// Shard boundaries (not the worker count) determine reduction order, so a
// fixed plan gives bitwise-identical results for any worker count.
struct ShardPlan {
  std::uint32_t workers = 1;
  std::vector<RowRange> shards;

  // One shard per worker, near-equal sizes (difference <= 1).
  static ShardPlan over(std::size_t rows, std::uint32_t workers);
  // Decouples shard boundaries from executor width.
  static ShardPlan with_shards(std::size_t rows, std::uint32_t shard_count,
                               std::uint32_t workers);

  void validate(std::size_t rows) const;  // throws ConfigError
};

// Named additive accumulators produced by a model E-step over one shard.
// combine() is associative with the empty stats as identity; combining
// with the identity leaves the operand bitwise unchanged.
class SuffStats {
 public:
  std::uint64_t points = 0;

  // Get-or-create; shape must match an existing field of the same name.
  DenseMatrix& field(const std::string& name, std::size_t rows,
                     std::size_t cols);
  DenseMatrix& at(const std::string& name);
  const DenseMatrix& at(const std::string& name) const;
  bool has(const std::string& name) const;

  double& scalar(const std::string& name) { return field(name, 1, 1)(0, 0); }
  double scalar(const std::string& name) const { return at(name)(0, 0); }

  bool empty() const { return points == 0 && fields_.empty(); }
  const std::deque<std::pair<std::string, DenseMatrix>>& fields() const {
    return fields_;
  }

  void combine(const SuffStats& other);

 private:
  // Deque keeps references from field() stable while more fields are added.
  std::deque<std::pair<std::string, DenseMatrix>> fields_;
};

using ShardFn = std::function<SuffStats(RowRange)>;

// Runs the shard function concurrently on plan.workers threads and folds
// the per-shard stats strictly in ascending shard order. The result is a
// pure function of (shard function, shard boundaries); worker scheduling
// cannot change it. A failing shard aborts the whole call with its id.
SuffStats map_reduce(const ShardFn& shard_fn, const ShardPlan& plan);

}  // namespace prsp

#endif  // PRSP_PARALLEL_HPP
