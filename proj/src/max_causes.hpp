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

#ifndef PRSP_MAX_CAUSES_HPP
#define PRSP_MAX_CAUSES_HPP

#include <string>
#include <vector>

#include "model.hpp"

namespace prsp {

enum class MaxMode { kMax, kAbsMax };

// Per-dimension winning column under a binary latent configuration:
// the largest active weight (kMax) or the active weight of largest
// magnitude, kept with its sign (kAbsMax). Ties go to the smaller unit.
std::vector<double> effective_weight(const DenseMatrix& w,
                                     std::span<const double> s, MaxMode mode);

// D×H indicator of the winning unit per dimension; rows sum to 1.
// The all-zero configuration has no winner and is rejected.
DenseMatrix winner_indicator(const DenseMatrix& w, std::span<const double> s,
                             MaxMode mode);

// MCA / MMCA: non-linear max superposition, Gaussian noise, Bernoulli
// prior. The M-step is a generalized (fixed-point) update: winners are
// assigned under the current dictionary and each entry solves the
// resulting weighted average; the noise update re-evaluates residuals
// under the new dictionary with the posterior held fixed.
class MaxCausesModel final : public Model {
 public:
  MaxCausesModel(MaxMode mode, std::uint32_t dim, std::uint32_t latents,
                 TruncationConfig trunc, double soft_winner_rho = 0.0);

  const std::string& name() const override { return name_; }
  std::uint32_t dim() const override { return dim_; }
  std::uint32_t latents() const override { return latents_; }
  MaxMode mode() const { return mode_; }
  const TruncationConfig& truncation() const { return trunc_; }

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

  double log_joint(const ModelParams& params, std::span<const double> y,
                   std::span<const double> s) const;
  std::vector<double> selection_scores(const ModelParams& params,
                                       std::span<const double> y) const;
  SuffStats estep_stats(const ModelParams& params, const DataSet& data,
                        RowRange rows, double temperature) const;
  // Dictionary and prior updates from the winner statistics; the caller
  // completes the step with the residual pass for sigma2.
  ModelParams mstep_fixedpoint(const SuffStats& stats,
                               const ModelParams& prev) const;

 private:
  const McaParams& cast(const ModelParams& params) const;
  SuffStats estep_impl(const McaParams& p, const StateTemplate& tmpl,
                       const DataSet& data, RowRange rows, double temperature,
                       InferenceResult* infer_out = nullptr) const;
  // Sum of q-weighted residuals |y - wbar(s)|² with q from `posterior`
  // parameters and effective weights from `updated`.
  SuffStats residual_impl(const McaParams& posterior, const McaParams& updated,
                          const StateTemplate& tmpl, const DataSet& data,
                          RowRange rows, double temperature) const;

  MaxMode mode_;
  std::string name_;
  std::uint32_t dim_;
  std::uint32_t latents_;
  TruncationConfig trunc_;
  double soft_winner_rho_;  // 0 = hard winners
};

}  // namespace prsp

#endif  // PRSP_MAX_CAUSES_HPP
