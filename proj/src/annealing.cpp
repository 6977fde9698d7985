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

#include "annealing.hpp"

#include <algorithm>
#include <cmath>

namespace prsp {

Schedule::Schedule(std::vector<std::pair<double, double>> anchors)
    : anchors_(std::move(anchors)) {
  if (anchors_.empty())
    throw ConfigError("schedule: at least one anchor required");
  for (std::size_t i = 0; i < anchors_.size(); ++i) {
    if (!std::isfinite(anchors_[i].first) || !std::isfinite(anchors_[i].second))
      throw ConfigError("schedule: anchors must be finite");
    if (anchors_[i].first < 0.0 || anchors_[i].first > 1.0)
      throw ConfigError("schedule: anchor positions must lie in [0,1]");
    if (i > 0 && anchors_[i].first <= anchors_[i - 1].first)
      throw ConfigError("schedule: anchor positions must be strictly increasing");
  }
}

double Schedule::value_at(double position) const {
  if (position <= anchors_.front().first) return anchors_.front().second;
  if (position >= anchors_.back().first) return anchors_.back().second;
  for (std::size_t i = 1; i < anchors_.size(); ++i) {
    if (position <= anchors_[i].first) {
      const auto [p0, v0] = anchors_[i - 1];
      const auto [p1, v1] = anchors_[i];
      const double t = (position - p0) / (p1 - p0);
      return v0 + t * (v1 - v0);
    }
  }
  return anchors_.back().second;
}

bool Schedule::is_constant(double value) const {
  return std::all_of(anchors_.begin(), anchors_.end(),
                     [&](const auto& a) { return a.second == value; });
}

LinearAnnealing::LinearAnnealing(std::size_t max_iterations,
                                 Schedule temperature, Schedule w_noise)
    : temperature_(std::move(temperature)), w_noise_(std::move(w_noise)) {
  if (max_iterations == 0)
    throw ConfigError("annealing: max_iterations must be >= 1");
  state_.max_iterations = max_iterations;
  reset();
}

void LinearAnnealing::refresh() {
  const double pos = static_cast<double>(state_.iteration) /
                     static_cast<double>(state_.max_iterations);
  // T < 1 would sharpen instead of flatten; clamp so T=1 is the floor.
  state_.temperature = std::max(1.0, temperature_.value_at(pos));
  state_.w_noise_std = std::max(0.0, w_noise_.value_at(pos));
  state_.finished = state_.iteration >= state_.max_iterations;
}

const AnnealState& LinearAnnealing::next() {
  if (state_.finished)
    throw Error("annealing: next() called past the iteration budget");
  ++state_.iteration;
  refresh();
  return state_;
}

void LinearAnnealing::reset() {
  state_.iteration = 0;
  refresh();
}

}  // namespace prsp
