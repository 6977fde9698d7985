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

#include "truncation.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace prsp {

void TruncationConfig::validate() const {
  if (latents == 0) throw ConfigError("truncation: latents must be >= 1");
  if (hprime == 0 || hprime > latents)
    throw ConfigError("truncation: hprime must satisfy 1 <= hprime <= latents");
  if (gamma == 0 || gamma > hprime)
    throw ConfigError("truncation: gamma must satisfy 1 <= gamma <= hprime");
  if (state_cap == 0) throw ConfigError("truncation: state cap must be >= 1");
}

std::vector<double> LatentState::to_dense(std::uint32_t latents) const {
  std::vector<double> s(latents, 0.0);
  for (auto [h, v] : active) s[h] = v;
  return s;
}

std::vector<std::uint32_t> select_candidates(std::span<const double> scores,
                                             std::uint32_t hprime) {
  const std::uint32_t h = static_cast<std::uint32_t>(scores.size());
  if (hprime == 0 || hprime > h)
    throw ConfigError("select_candidates: hprime out of range");
  for (double s : scores)
    if (!std::isfinite(s))
      throw ConfigError("select_candidates: scores must be finite");

  std::vector<std::uint32_t> order(h);
  std::iota(order.begin(), order.end(), 0u);
  // Descending score; equal scores keep the smaller index first.
  std::stable_sort(order.begin(), order.end(),
                   [&](std::uint32_t a, std::uint32_t b) {
                     return scores[a] > scores[b];
                   });
  order.resize(hprime);
  std::sort(order.begin(), order.end());
  return order;
}

namespace {

std::uint64_t sat_mul(std::uint64_t a, std::uint64_t b) {
  if (a != 0 && b > UINT64_MAX / a) return UINT64_MAX;
  return a * b;
}

std::uint64_t sat_add(std::uint64_t a, std::uint64_t b) {
  return (UINT64_MAX - a < b) ? UINT64_MAX : a + b;
}

std::uint64_t binomial(std::uint64_t n, std::uint64_t k) {
  if (k > n) return 0;
  k = std::min(k, n - k);
  std::uint64_t r = 1;
  for (std::uint64_t i = 1; i <= k; ++i) {
    r = sat_mul(r, n - k + i);
    r /= i;
  }
  return r;
}

}  // namespace

std::uint64_t truncated_state_count(const TruncationConfig& cfg,
                                    std::uint32_t n_values) {
  std::uint64_t total = 1;  // zero state
  total = sat_add(total, sat_mul(cfg.latents, n_values));
  std::uint64_t vpow = n_values;
  for (std::uint32_t k = 2; k <= cfg.gamma; ++k) {
    vpow = sat_mul(vpow, n_values);
    total = sat_add(total, sat_mul(binomial(cfg.hprime, k), vpow));
  }
  return total;
}

StateTemplate::StateTemplate(const TruncationConfig& cfg,
                             std::span<const double> values)
    : cfg_(cfg), values_(values.begin(), values.end()) {
  cfg_.validate();
  if (values_.empty())
    throw ConfigError("state enumeration: value alphabet must be non-empty");
  for (double v : values_)
    if (v == 0.0)
      throw ConfigError("state enumeration: non-zero alphabet contains 0");
  if (!std::is_sorted(values_.begin(), values_.end()))
    std::sort(values_.begin(), values_.end());
  if (std::adjacent_find(values_.begin(), values_.end()) != values_.end())
    throw ConfigError("state enumeration: duplicate alphabet value");

  const std::uint64_t count =
      truncated_state_count(cfg_, static_cast<std::uint32_t>(values_.size()));
  if (count > cfg_.state_cap)
    throw ConfigError("state explosion: " + std::to_string(count) +
                      " states per data point exceeds cap of " +
                      std::to_string(cfg_.state_cap));

  // Depth-first over support positions yields supports in lexicographic
  // order with prefixes first; the value odometer runs within each support.
  std::vector<std::uint32_t> support;
  std::vector<std::size_t> value_idx;
  auto emit_values = [&]() {
    const std::size_t k = support.size();
    value_idx.assign(k, 0);
    for (;;) {
      auto& pat = patterns_.emplace_back();
      pat.reserve(k);
      for (std::size_t i = 0; i < k; ++i)
        pat.emplace_back(support[i], values_[value_idx[i]]);
      // advance odometer, last slot fastest
      std::size_t i = k;
      while (i > 0) {
        --i;
        if (++value_idx[i] < values_.size()) break;
        value_idx[i] = 0;
        if (i == 0) return;
      }
    }
  };
  auto dfs = [&](auto&& self, std::uint32_t next) -> void {
    if (support.size() >= 2) emit_values();
    if (support.size() == cfg_.gamma) return;
    for (std::uint32_t p = next; p < cfg_.hprime; ++p) {
      support.push_back(p);
      self(self, p + 1);
      support.pop_back();
    }
  };
  if (cfg_.gamma >= 2) dfs(dfs, 0);

  total_states_ = 1 + static_cast<std::size_t>(cfg_.latents) * values_.size() +
                  patterns_.size();
}

void StateTemplate::instantiate(std::span<const std::uint32_t> candidates,
                                std::vector<LatentState>& out) const {
  if (candidates.size() != cfg_.hprime)
    throw ConfigError("instantiate: candidate set size must equal hprime");
  out.clear();
  out.reserve(total_states_);
  out.emplace_back();  // zero state
  for (std::uint32_t h = 0; h < cfg_.latents; ++h)
    for (double v : values_)
      out.push_back(LatentState{{{h, v}}});
  for (const auto& pat : patterns_) {
    LatentState s;
    s.active.reserve(pat.size());
    for (auto [pos, v] : pat) s.active.emplace_back(candidates[pos], v);
    out.push_back(std::move(s));
  }
}

StateSet enumerate_valued_states(std::vector<std::uint32_t> candidates,
                                 std::uint32_t latents, std::uint32_t gamma,
                                 std::span<const double> values,
                                 std::uint64_t state_cap) {
  if (!std::is_sorted(candidates.begin(), candidates.end()))
    throw ConfigError("enumerate states: candidate set must be ascending");
  for (std::uint32_t c : candidates)
    if (c >= latents)
      throw ConfigError("enumerate states: candidate index out of range");
  TruncationConfig cfg{latents, static_cast<std::uint32_t>(candidates.size()),
                       gamma, state_cap};
  StateTemplate tmpl(cfg, values);
  StateSet set;
  set.candidates = std::move(candidates);
  tmpl.instantiate(set.candidates, set.states);
  return set;
}

StateSet enumerate_binary_states(std::vector<std::uint32_t> candidates,
                                 std::uint32_t latents, std::uint32_t gamma) {
  const double one = 1.0;
  return enumerate_valued_states(std::move(candidates), latents, gamma,
                                 std::span<const double>(&one, 1));
}

TruncatedPosterior truncated_expectations(std::span<const double> log_joints,
                                          double temperature,
                                          std::span<const StatRequest> stats) {
  if (log_joints.empty())
    throw ConfigError("truncated_expectations: no states");
  if (!(temperature >= 1.0))
    throw ConfigError("truncated_expectations: temperature must be >= 1");
  for (double lj : log_joints)
    if (!std::isfinite(lj))
      throw NumericError("truncated_expectations: non-finite log joint");

  TruncatedPosterior post;
  post.log_partition = log_sum_exp(log_joints);

  std::vector<double> scaled;
  std::span<const double> basis = log_joints;
  if (temperature != 1.0) {
    scaled.resize(log_joints.size());
    for (std::size_t i = 0; i < log_joints.size(); ++i)
      scaled[i] = log_joints[i] / temperature;
    basis = scaled;
  }
  const double lse = log_sum_exp(basis);
  post.q.resize(basis.size());
  for (std::size_t i = 0; i < basis.size(); ++i)
    post.q[i] = std::exp(basis[i] - lse);

  post.expectations.reserve(stats.size());
  for (const auto& req : stats) {
    double acc = 0.0;
    for (std::size_t i = 0; i < post.q.size(); ++i)
      acc += post.q[i] * req.value(i);
    post.expectations.emplace_back(req.name, acc);
  }
  return post;
}

}  // namespace prsp
