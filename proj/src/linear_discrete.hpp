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

#ifndef PRSP_LINEAR_DISCRETE_HPP
#define PRSP_LINEAR_DISCRETE_HPP

#include <string>
#include <vector>

#include "model.hpp"

namespace prsp {

enum class DiscreteFamily { kBsc, kTsc, kDsc };

// Linear superposition Ws with Gaussian noise and a discrete prior. BSC,
// TSC and DSC run through one engine over a per-family value table
// (allowed non-zero values with their log probabilities), so the DSC
// nestings of BSC and TSC hold down to the arithmetic.
class LinearDiscreteModel final : public Model {
 public:
  LinearDiscreteModel(DiscreteFamily family, std::uint32_t dim,
                      std::uint32_t latents, TruncationConfig trunc,
                      std::vector<double> dsc_values = {});

  const std::string& name() const override { return name_; }
  std::uint32_t dim() const override { return dim_; }
  std::uint32_t latents() const override { return latents_; }
  const TruncationConfig& truncation() const { return trunc_; }
  DiscreteFamily family() const { return family_; }

  void validate(const ModelParams& params, const DataSet* data) const override;
  ModelParams standard_init(const DataSet& data, RngStream& rng) const override;
  StepResult step(const ModelParams& params, const AnnealState& anneal,
                  const DataSet& data, const ShardPlan& plan) const override;
  InferenceResult inference(const ModelParams& params, const DataSet& data,
                            const ShardPlan& plan) const override;
  DataSet generate(const ModelParams& params, std::size_t n,
                   RngStream& rng) const override;
  double exact_log_likelihood(const ModelParams& params,
                              const DataSet& data) const override;
  void perturb_weights(ModelParams& params, double noise_std,
                       RngStream& rng) const override;

  double log_prior(const ModelParams& params, std::span<const double> s) const;
  double log_joint(const ModelParams& params, std::span<const double> y,
                   std::span<const double> s) const;
  // Per-unit scores for candidate selection: the best singleton log joint
  // of each unit, with terms constant across units dropped.
  std::vector<double> selection_scores(const ModelParams& params,
                                       std::span<const double> y) const;
  SuffStats estep_stats(const ModelParams& params, const DataSet& data,
                        RowRange rows, double temperature) const;
  ModelParams mstep(const SuffStats& stats, const ModelParams& prev) const;

 private:
  struct ValueTable {
    std::vector<double> values;     // allowed non-zero values, ascending
    std::vector<double> log_probs;  // aligned with values
    double log_p0 = 0.0;
  };
  ValueTable value_table(const LinearDiscreteParams& p) const;
  const LinearDiscreteParams& cast(const ModelParams& params) const;

  SuffStats estep_impl(const LinearDiscreteParams& p, const ValueTable& table,
                       const StateTemplate& tmpl, const DataSet& data,
                       RowRange rows, double temperature,
                       InferenceResult* infer_out = nullptr) const;

  DiscreteFamily family_;
  std::string name_;
  std::uint32_t dim_;
  std::uint32_t latents_;
  TruncationConfig trunc_;
  std::vector<double> init_values_;  // DSC alphabet handed to standard_init
};

}  // namespace prsp

#endif  // PRSP_LINEAR_DISCRETE_HPP
