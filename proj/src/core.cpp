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

#include "core.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace prsp {

bool DenseMatrix::all_finite() const {
  return std::all_of(data_.begin(), data_.end(),
                     [](double x) { return std::isfinite(x); });
}

DataKind DataSet::infer_kind(const DenseMatrix& y) {
  const double* p = y.data();
  for (std::size_t i = 0; i < y.size(); ++i) {
    if (p[i] < 0.0 || p[i] != std::floor(p[i])) return DataKind::kReal;
  }
  return DataKind::kNonNegInteger;
}

double log_sum_exp(std::span<const double> v) {
  if (v.empty()) throw NumericError("log_sum_exp: empty support");
  double m = -std::numeric_limits<double>::infinity();
  for (double x : v) m = std::max(m, x);
  if (std::isinf(m) && m < 0) throw NumericError("log_sum_exp: empty support");
  if (v.size() == 1) return v[0];
  double acc = 0.0;
  for (double x : v) acc += std::exp(x - m);
  return m + std::log(acc);
}

namespace {

// splitmix64; standard 64-bit mix used to decorrelate derived seeds.
std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

}  // namespace

RngStream RngStream::derived(std::uint64_t base_seed, std::uint64_t index) {
  return RngStream(mix64(mix64(base_seed) ^ mix64(index + 1)));
}

double RngStream::uniform01() {
  // 53-bit mantissa draw; engine output is pinned by the standard.
  return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

double RngStream::normal() {
  // Box-Muller on our own uniforms; std::normal_distribution is not
  // reproducible across standard libraries.
  double u1 = uniform01();
  while (u1 <= 0.0) u1 = uniform01();
  const double u2 = uniform01();
  return std::sqrt(-2.0 * std::log(u1)) *
         std::cos(2.0 * 3.14159265358979323846 * u2);
}

bool RngStream::bernoulli(double p) { return uniform01() < p; }

std::size_t RngStream::categorical(std::span<const double> probs) {
  if (probs.empty()) throw ConfigError("categorical: empty probability vector");
  double total = 0.0;
  for (double p : probs) total += p;
  double u = uniform01() * total;
  double acc = 0.0;
  for (std::size_t i = 0; i + 1 < probs.size(); ++i) {
    acc += probs[i];
    if (u < acc) return i;
  }
  return probs.size() - 1;
}

std::uint64_t RngStream::poisson(double rate) {
  if (rate < 0.0 || !std::isfinite(rate))
    throw ConfigError("poisson: rate must be finite and >= 0");
  if (rate == 0.0) return 0;
  // Inversion by exponential inter-arrival sums, carried out in log space
  // so large rates do not underflow. O(rate) draws per sample.
  std::uint64_t k = 0;
  double acc = 0.0;
  for (;;) {
    double u = uniform01();
    while (u <= 0.0) u = uniform01();
    acc -= std::log(u);
    if (acc > rate) return k;
    ++k;
  }
}

}  // namespace prsp
