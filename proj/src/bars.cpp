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

#include "bars.hpp"

#include <algorithm>

namespace prsp {

DenseMatrix bars_dictionary(std::uint32_t size, double amplitude) {
  const std::size_t d = static_cast<std::size_t>(size) * size;
  DenseMatrix w(d, 2 * static_cast<std::size_t>(size));
  for (std::uint32_t k = 0; k < size; ++k) {
    for (std::uint32_t j = 0; j < size; ++j) {
      w(static_cast<std::size_t>(k) * size + j, k) = amplitude;  // horizontal
      w(static_cast<std::size_t>(j) * size + k, size + k) = amplitude;  // vertical
    }
  }
  return w;
}

BarsData make_bars(const BarsSpec& spec) {
  if (spec.size == 0) throw ConfigError("bars: size must be >= 1");
  if (spec.n == 0) throw ConfigError("bars: need at least one data point");
  if (spec.amplitude <= 0.0) throw ConfigError("bars: amplitude must be > 0");
  if (spec.noise < 0.0) throw ConfigError("bars: noise must be >= 0");
  const std::uint32_t n_bars = 2 * spec.size;
  const double prob =
      spec.prob > 0.0 ? spec.prob : 2.0 / static_cast<double>(n_bars);
  if (prob >= 1.0) throw ConfigError("bars: prob must lie in (0,1)");

  BarsData out;
  out.truth = bars_dictionary(spec.size, spec.amplitude);
  const std::size_t d = out.truth.rows();

  RngStream rng(spec.seed);
  DenseMatrix y(spec.n, d);
  std::vector<std::uint32_t> active;
  for (std::size_t i = 0; i < spec.n; ++i) {
    active.clear();
    for (std::uint32_t b = 0; b < n_bars; ++b)
      if (rng.bernoulli(prob)) active.push_back(b);
    for (std::size_t px = 0; px < d; ++px) {
      double v = 0.0;
      for (std::uint32_t b : active) {
        const double w = out.truth(px, b);
        v = spec.max_mode ? std::max(v, w) : v + w;
      }
      y(i, px) = v + spec.noise * rng.normal();
    }
  }
  out.data = DataSet::wrap(std::move(y));
  return out;
}

}  // namespace prsp
