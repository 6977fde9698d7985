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

#ifndef PRSP_SPIKE_SLAB_HPP
#define PRSP_SPIKE_SLAB_HPP

#include <string>
#include <vector>

#include "model.hpp"

namespace prsp {

// Conditional posterior of the slab variables for one support set, together
// with the log marginal of (y, support).
struct SupportPosterior {
  double log_marginal = 0.0;
  Eigen::VectorXd mean;        // kappa, |A|
  Eigen::MatrixXd covariance;  // Lambda, |A|×|A|
};

// Linear superposition with Gaussian noise and a spike-and-slab prior:
// s_h = b_h z_h, b_h ~ Bernoulli(pi), z_h ~ N(mu_h, psi_h). The slab is
// integrated out analytically per binary support, so truncation enumerates
// supports only.
class SpikeSlabModel final : public Model {
 public:
  SpikeSlabModel(std::uint32_t dim, std::uint32_t latents,
                 TruncationConfig trunc);

  const std::string& name() const override { return name_; }
  std::uint32_t dim() const override { return dim_; }
  std::uint32_t latents() const override { return latents_; }
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

  // All factorizations are |A|×|A|; the D×D observation covariance is never
  // formed. The empty support yields the pure-noise marginal.
  SupportPosterior support_posterior(const ModelParams& params,
                                     std::span<const double> y,
                                     std::span<const std::uint32_t> active) const;
  std::vector<double> selection_scores(const ModelParams& params,
                                       std::span<const double> y) const;
  SuffStats estep_stats(const ModelParams& params, const DataSet& data,
                        RowRange rows, double temperature) const;
  ModelParams mstep(const SuffStats& stats, const ModelParams& prev) const;

 private:
  struct Workspace;
  const GscParams& cast(const ModelParams& params) const;

  // Core of support_posterior on cached per-point quantities
  // (gram = WᵀW, b = Wᵀy, y2 = |y|²).
  SupportPosterior support_posterior_cached(
      const GscParams& p, const Eigen::MatrixXd& gram, const Eigen::VectorXd& b,
      double y2, std::span<const std::uint32_t> active) const;

  SuffStats estep_impl(const GscParams& p, const StateTemplate& tmpl,
                       const DataSet& data, RowRange rows, double temperature,
                       InferenceResult* infer_out = nullptr) const;

  std::string name_ = "gsc";
  std::uint32_t dim_;
  std::uint32_t latents_;
  TruncationConfig trunc_;
};

}  // namespace prsp

#endif  // PRSP_SPIKE_SLAB_HPP
