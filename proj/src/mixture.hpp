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

#ifndef PRSP_MIXTURE_HPP
#define PRSP_MIXTURE_HPP

#include <string>
#include <vector>

#include "model.hpp"

namespace prsp {

enum class MixtureKind { kGaussian, kPoisson };

// GMM (isotropic per-component Gaussian) and PMM (independent Poisson
// rates per dimension). The latent space has H states, so the posterior is
// exact; truncation is bypassed but the annealing temperature is shared.
// The Poisson likelihood omits the data-only -log y! constant throughout
// (responsibilities are unaffected; the free energy shifts by exactly that
// constant).
class MixtureModel final : public Model {
 public:
  MixtureModel(MixtureKind kind, std::uint32_t dim, std::uint32_t latents);

  const std::string& name() const override { return name_; }
  std::uint32_t dim() const override { return dim_; }
  std::uint32_t latents() const override { return latents_; }
  MixtureKind kind() const { return kind_; }

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

  std::vector<double> responsibilities(const ModelParams& params,
                                       std::span<const double> y) const;
  SuffStats estep_stats(const ModelParams& params, const DataSet& data,
                        RowRange rows, double temperature) const;
  ModelParams mstep(const SuffStats& stats, const ModelParams& prev) const;

 private:
  const MixtureParams& cast(const ModelParams& params) const;
  // Unnormalized log joint terms log mix_c + log p(y|c) for every component.
  void log_joint_terms(const MixtureParams& p, std::span<const double> y,
                       std::span<double> out) const;
  SuffStats estep_impl(const MixtureParams& p, const DataSet& data,
                       RowRange rows, double temperature,
                       InferenceResult* infer_out = nullptr) const;

  MixtureKind kind_;
  std::string name_;
  std::uint32_t dim_;
  std::uint32_t latents_;
};

}  // namespace prsp

#endif  // PRSP_MIXTURE_HPP
