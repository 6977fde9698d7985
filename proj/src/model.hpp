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

#ifndef PRSP_MODEL_HPP
#define PRSP_MODEL_HPP

#include <memory>
#include <string>
#include <variant>
#include <vector>

#include "annealing.hpp"
#include "core.hpp"
#include "parallel.hpp"
#include "truncation.hpp"

namespace prsp {

// Parameter clips shared across families. EM updates clip into these
// ranges to keep the chain away from absorbing states.
inline constexpr double kMinSigma2 = 1e-12;
inline constexpr double kMinPi = 1e-6;
inline constexpr double kMinCategoricalProb = 1e-9;
inline constexpr double kMinSlabVar = 1e-10;
inline constexpr double kMinMcaWeight = 1e-8;
inline constexpr double kEvidenceFloor = 1e-9;

// BSC / TSC / DSC. For BSC and TSC the prior is the scalar `pi`; for DSC it
// is the zero-inclusive alphabet `values` with matching `probs`.
struct LinearDiscreteParams {
  DenseMatrix w;  // D×H dictionary
  double sigma2 = 1.0;
  double pi = 0.1;
  std::vector<double> values;
  std::vector<double> probs;
};

// Spike-and-slab sparse coding: s_h = b_h * z_h with b_h ~ Bernoulli(pi)
// and z_h ~ N(mu_h, psi_h).
struct GscParams {
  DenseMatrix w;
  double pi = 0.1;
  std::vector<double> mu;
  std::vector<double> psi;
  double sigma2 = 1.0;
};

struct McaParams {
  DenseMatrix w;
  double pi = 0.1;
  double sigma2 = 1.0;
};

// GMM and PMM. `centers` holds component means (GMM) or rates (PMM) as
// columns; `sigma2` is per-component isotropic variance (GMM only).
struct MixtureParams {
  DenseMatrix centers;  // D×H
  std::vector<double> mix;
  std::vector<double> sigma2;
};

using ModelParams =
    std::variant<LinearDiscreteParams, GscParams, McaParams, MixtureParams>;

std::size_t param_float_count(const ModelParams& params);

struct StepResult {
  ModelParams params;
  double free_energy = 0.0;  // at the parameters entering the step, T=1
};

struct InferenceResult {
  DenseMatrix map_states;       // N×H most probable configurations
  std::vector<double> map_mass;  // posterior mass of each MAP state
  DenseMatrix expected_states;  // N×H posterior means
};

class Model {
 public:
  virtual ~Model() = default;

  virtual const std::string& name() const = 0;
  virtual std::uint32_t dim() const = 0;
  virtual std::uint32_t latents() const = 0;

  virtual void validate(const ModelParams& params,
                        const DataSet* data) const = 0;

  virtual ModelParams standard_init(const DataSet& data, RngStream& rng) const = 0;

  // One EM step: E-step over the (sharded) dataset at the annealed
  // temperature, then the M-step. The returned free energy is evaluated at
  // the incoming parameters and always at temperature 1.
  virtual StepResult step(const ModelParams& params, const AnnealState& anneal,
                          const DataSet& data, const ShardPlan& plan) const = 0;

  virtual InferenceResult inference(const ModelParams& params,
                                    const DataSet& data,
                                    const ShardPlan& plan) const = 0;

  virtual DataSet generate(const ModelParams& params, std::size_t n,
                           RngStream& rng) const = 0;

  // Small-problem oracle: exact log likelihood by full enumeration (or in
  // closed form where the latent space is already tractable). Throws
  // ConfigError when the state space is too large.
  virtual double exact_log_likelihood(const ModelParams& params,
                                      const DataSet& data) const = 0;

  // Additive zero-mean Gaussian on the weight-like parameters,
  // std = noise_std * per-column RMS. Family clips are re-applied.
  virtual void perturb_weights(ModelParams& params, double noise_std,
                               RngStream& rng) const = 0;
};

// Factory over the model registry: bsc, tsc, dsc, gsc, mca, mmca, gmm, pmm.
// `dsc_values` is required for dsc and rejected elsewhere; mixtures ignore
// the truncation config.
std::unique_ptr<Model> make_model(const std::string& name, std::uint32_t dim,
                                  std::uint32_t latents,
                                  const TruncationConfig& trunc,
                                  std::span<const double> dsc_values = {});

const std::vector<std::string>& model_names();
bool model_uses_truncation(const std::string& name);

// Named parameter arrays, in a stable order, for checkpointing and the C
// API. Scalars become 1×1 arrays.
std::vector<std::pair<std::string, DenseMatrix>> params_to_arrays(
    const ModelParams& params);
ModelParams params_from_arrays(
    const std::string& model_name,
    const std::vector<std::pair<std::string, DenseMatrix>>& arrays);

namespace detail {

// Column means and mean per-dimension population variance of the data.
std::vector<double> data_column_means(const DataSet& data);
double data_mean_variance(const DataSet& data);

// Common weight initialization: W_dh = mean_d + eps, eps ~ N(0, var/H).
// Degenerate (zero-variance) data leaves the noise at zero and warns.
DenseMatrix init_weights(const DataSet& data, std::uint32_t latents,
                         RngStream& rng, bool take_abs);

// In-place additive noise with per-column RMS scaling; row-major draw order.
void add_column_scaled_noise(DenseMatrix& w, double noise_std, RngStream& rng);

double clip(double x, double lo, double hi);

}  // namespace detail

}  // namespace prsp

#endif  // PRSP_MODEL_HPP
