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

#ifndef PRSP_ANNEALING_HPP
#define PRSP_ANNEALING_HPP

#include <cstddef>
#include <utility>
#include <vector>

#include "core.hpp"

namespace prsp {

// Piecewise-linear schedule over the training budget. Anchor positions are
// fractions of the budget in [0,1] so schedules transfer across budgets;
// evaluation clamps to the first/last anchor outside their range.
class Schedule {
 public:
  Schedule() : anchors_{{0.0, 0.0}} {}
  explicit Schedule(std::vector<std::pair<double, double>> anchors);
  static Schedule constant(double value) { return Schedule({{0.0, value}}); }

  double value_at(double position) const;
  const std::vector<std::pair<double, double>>& anchors() const {
    return anchors_;
  }
  bool is_constant(double value) const;

 private:
  std::vector<std::pair<double, double>> anchors_;
};

struct AnnealState {
  std::size_t iteration = 0;
  std::size_t max_iterations = 0;
  double temperature = 1.0;   // never below 1
  double w_noise_std = 0.0;   // relative weight-noise magnitude, >= 0
  bool finished = false;
};

// Training schedule driver: iteration budget, posterior temperature and
// parameter-noise magnitude. Values are pure functions of
// (schedules, budget, iteration), so reset-and-replay is exact.
class LinearAnnealing {
 public:
  explicit LinearAnnealing(std::size_t max_iterations,
                           Schedule temperature = Schedule::constant(1.0),
                           Schedule w_noise = Schedule::constant(0.0));

  const AnnealState& state() const { return state_; }
  const AnnealState& next();  // throws Error when already finished
  void reset();

  std::size_t max_iterations() const { return state_.max_iterations; }
  const Schedule& temperature_schedule() const { return temperature_; }
  const Schedule& w_noise_schedule() const { return w_noise_; }

 private:
  void refresh();

  Schedule temperature_;
  Schedule w_noise_;
  AnnealState state_;
};

}  // namespace prsp

#endif  // PRSP_ANNEALING_HPP
