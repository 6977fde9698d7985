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

#include "em.hpp"

#include <chrono>
#include <cmath>

namespace prsp {

TrainResult run(const Model& model, ModelParams params, const DataSet& data,
                LinearAnnealing& annealing, const ShardPlan& plan,
                RunLogger* logger, const TrainOptions& options) {
  if (data.size() == 0) throw DataError("run: empty dataset");
  model.validate(params, &data);
  plan.validate(data.size());
  if (options.tol && !(*options.tol >= 0.0))
    throw ConfigError("run: convergence tolerance must be >= 0");

  RngStream noise_rng = RngStream::derived(options.noise_seed, 0x6e6f6973);
  annealing.reset();

  TrainResult result;
  double prev_f = std::numeric_limits<double>::quiet_NaN();
  while (!annealing.state().finished) {
    const AnnealState& st = annealing.next();
    const auto t0 = std::chrono::steady_clock::now();
    StepResult step = model.step(params, st, data, plan);
    params = std::move(step.params);
    if (st.w_noise_std > 0.0)
      model.perturb_weights(params, st.w_noise_std, noise_rng);
    const double seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
            .count();

    const std::size_t iteration = result.free_energy_trace.size();
    result.free_energy_trace.push_back(step.free_energy);
    result.wall_times.push_back(seconds);
    if (logger)
      logger->on_iteration(iteration, step.free_energy, seconds, params);
    if (!std::isfinite(step.free_energy)) {
      if (logger) logger->on_abort(iteration, params);
      throw NumericError("run: non-finite free energy at iteration " +
                         std::to_string(iteration));
    }

    const bool inert = st.temperature == 1.0 && st.w_noise_std == 0.0;
    if (options.tol && inert && !std::isnan(prev_f) &&
        std::abs(step.free_energy - prev_f) <=
            *options.tol * (1.0 + std::abs(step.free_energy)))
      break;
    prev_f = step.free_energy;
  }

  result.iterations_run = result.free_energy_trace.size();
  result.final_params = std::move(params);
  if (logger) logger->on_finished(result);
  return result;
}

}  // namespace prsp
