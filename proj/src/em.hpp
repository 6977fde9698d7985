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

#ifndef PRSP_EM_HPP
#define PRSP_EM_HPP

#include <optional>
#include <vector>

#include "annealing.hpp"
#include "model.hpp"

namespace prsp {

struct TrainResult {
  ModelParams final_params;
  std::vector<double> free_energy_trace;  // one per iteration run
  std::vector<double> wall_times;         // seconds per iteration
  std::size_t iterations_run = 0;
};

// Observer for the training loop; the directory logger in the I/O layer
// turns these calls into the trace file and checkpoints.
class RunLogger {
 public:
  virtual ~RunLogger() = default;
  virtual void on_iteration(std::size_t /*iteration*/, double /*free_energy*/,
                            double /*seconds*/, const ModelParams& /*params*/) {}
  virtual void on_abort(std::size_t /*iteration*/, const ModelParams& /*params*/) {}
  virtual void on_finished(const TrainResult& /*result*/) {}
};

struct TrainOptions {
  // Relative free-energy change below which training stops early; only
  // active once annealing is inert (T=1, zero parameter noise). Off by
  // default: the standard workflow runs a fixed budget.
  std::optional<double> tol;
  // Stream for the annealed parameter noise.
  std::uint64_t noise_seed = 0;
};

// The EM loop: advance the annealing schedule, take one model step, apply
// scheduled parameter noise, log, repeat until the budget is exhausted (or
// the early-stop rule fires). A non-finite free energy aborts with a
// diagnostic checkpoint through the logger.
TrainResult run(const Model& model, ModelParams params, const DataSet& data,
                LinearAnnealing& annealing, const ShardPlan& plan,
                RunLogger* logger = nullptr, const TrainOptions& options = {});

}  // namespace prsp

#endif  // PRSP_EM_HPP
