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

#ifndef PRSP_BARS_HPP
#define PRSP_BARS_HPP

#include "core.hpp"

namespace prsp {

// Synthetic bars benchmark: data points are R×R images (flattened row by
// row to D = R² pixels) containing the R horizontal and R vertical bars,
// each active independently with probability `prob`, combined linearly or
// by per-pixel max, plus additive Gaussian noise.
struct BarsSpec {
  std::uint32_t size = 5;        // R
  std::size_t n = 1000;
  double prob = 0.0;             // 0 picks the default 2 / (2R)
  double amplitude = 10.0;
  double noise = 2.0;
  bool max_mode = false;
  std::uint64_t seed = 0;
};

struct BarsData {
  DataSet data;       // n × R²
  DenseMatrix truth;  // R² × 2R ground-truth dictionary (bar per column)
};

DenseMatrix bars_dictionary(std::uint32_t size, double amplitude);
BarsData make_bars(const BarsSpec& spec);

}  // namespace prsp

#endif  // PRSP_BARS_HPP
