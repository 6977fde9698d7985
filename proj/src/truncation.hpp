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

#ifndef PRSP_TRUNCATION_HPP
#define PRSP_TRUNCATION_HPP

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "core.hpp"

namespace prsp {

struct TruncationConfig {
  std::uint32_t latents = 0;  // H
  std::uint32_t hprime = 0;   // candidate units per data point, 1..H
  std::uint32_t gamma = 0;    // max simultaneously active units, 1..hprime
  std::uint64_t state_cap = 1000000;  // per-data-point state budget

  void validate() const;  // throws ConfigError
};

// One latent configuration, stored sparsely as (unit, value) pairs ordered
// by unit index. An empty list is the all-zero state.
struct LatentState {
  std::vector<std::pair<std::uint32_t, double>> active;

  std::size_t active_count() const { return active.size(); }
  std::vector<double> to_dense(std::uint32_t latents) const;
};

struct StateSet {
  std::vector<std::uint32_t> candidates;  // I, ascending, size hprime
  std::vector<LatentState> states;
};

// Indices of the `hprime` largest scores; ties broken toward the smaller
// index; result sorted ascending.
std::vector<std::uint32_t> select_candidates(std::span<const double> scores,
                                             std::uint32_t hprime);

// Number of states enumerated for a config with `n_values` allowed non-zero
// values per unit: 1 + H*V + sum_{k=2..gamma} C(hprime,k) * V^k.
// Saturates at UINT64_MAX.
std::uint64_t truncated_state_count(const TruncationConfig& cfg,
                                    std::uint32_t n_values);

// Shared enumeration machinery. Multi-active supports are expressed as
// positions into the candidate set, so one template serves every data
// point; only the candidate indices differ.
//
// State order (pinned for bit-reproducible posteriors): the zero state,
// then singletons ascending by (unit, value) over ALL units, then
// multi-active states with support inside the candidate set, supports in
// lexicographic order (prefixes first) and value tuples in lexicographic
// order within each support.
class StateTemplate {
 public:
  // `values`: the allowed non-zero values, ascending, 0 excluded.
  StateTemplate(const TruncationConfig& cfg, std::span<const double> values);

  std::size_t total_states() const { return total_states_; }
  std::span<const double> values() const { return values_; }
  const TruncationConfig& config() const { return cfg_; }

  // Writes the full state list for one candidate set into `out`
  // (cleared first). `candidates` must be ascending with size hprime.
  void instantiate(std::span<const std::uint32_t> candidates,
                   std::vector<LatentState>& out) const;

 private:
  TruncationConfig cfg_;
  std::vector<double> values_;
  // Multi-active patterns: (position in candidate set, value) pairs.
  std::vector<std::vector<std::pair<std::uint32_t, double>>> patterns_;
  std::size_t total_states_ = 0;
};

StateSet enumerate_binary_states(std::vector<std::uint32_t> candidates,
                                 std::uint32_t latents, std::uint32_t gamma);

StateSet enumerate_valued_states(std::vector<std::uint32_t> candidates,
                                 std::uint32_t latents, std::uint32_t gamma,
                                 std::span<const double> values,
                                 std::uint64_t state_cap = 1000000);

// Named per-state statistic evaluated under the truncated posterior.
struct StatRequest {
  std::string name;
  std::function<double(std::size_t state_index)> value;
};

struct TruncatedPosterior {
  std::vector<double> q;  // sums to 1
  std::vector<std::pair<std::string, double>> expectations;
  double log_partition = 0.0;  // log sum of joints at temperature 1
};

// q_i = exp(lj_i/T - logsumexp(lj/T)). The log partition is always the
// T=1 value so free-energy traces are comparable across schedules.
TruncatedPosterior truncated_expectations(std::span<const double> log_joints,
                                          double temperature,
                                          std::span<const StatRequest> stats = {});

}  // namespace prsp

#endif  // PRSP_TRUNCATION_HPP
