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

#include "mixture.hpp"

#include <algorithm>
#include <cmath>

namespace prsp {

namespace {

constexpr double kLog2Pi = 1.8378770664093454836;
constexpr double kMinRate = 1e-9;

}  // namespace

MixtureModel::MixtureModel(MixtureKind kind, std::uint32_t dim,
                           std::uint32_t latents)
    : kind_(kind),
      name_(kind == MixtureKind::kGaussian ? "gmm" : "pmm"),
      dim_(dim),
      latents_(latents) {
  if (dim_ == 0 || latents_ == 0)
    throw ConfigError(name_ + ": dim and latents must be >= 1");
}

const MixtureParams& MixtureModel::cast(const ModelParams& params) const {
  const auto* p = std::get_if<MixtureParams>(&params);
  if (!p) throw ConfigError(name_ + ": wrong parameter family");
  return *p;
}

void MixtureModel::validate(const ModelParams& params,
                            const DataSet* data) const {
  const auto& p = cast(params);
  if (p.centers.rows() != dim_ || p.centers.cols() != latents_)
    throw ConfigError(name_ + ": component matrix shape mismatch");
  if (!p.centers.all_finite())
    throw NumericError(name_ + ": non-finite components");
  if (p.mix.size() != latents_)
    throw ConfigError(name_ + ": mixing vector length mismatch");
  double total = 0.0;
  for (double m : p.mix) {
    if (!(m > 0.0)) throw ConfigError(name_ + ": mixing weights must be positive");
    total += m;
  }
  if (std::abs(total - 1.0) > 1e-6)
    throw ConfigError(name_ + ": mixing weights must sum to 1");
  if (kind_ == MixtureKind::kGaussian) {
    if (p.sigma2.size() != latents_)
      throw ConfigError("gmm: variance vector length mismatch");
    for (double v : p.sigma2)
      if (!(v > 0.0)) throw ConfigError("gmm: variances must be positive");
  } else {
    if (!p.sigma2.empty())
      throw ConfigError("pmm: unexpected variance vector");
    for (std::size_t i = 0; i < p.centers.size(); ++i)
      if (!(p.centers.data()[i] > 0.0))
        throw ConfigError("pmm: rates must be positive");
  }
  if (data) {
    if (data->dim() != dim_) throw DataError(name_ + ": data dimension mismatch");
    if (kind_ == MixtureKind::kPoisson &&
        data->kind != DataKind::kNonNegInteger)
      throw DataError("pmm: data must be non-negative integers");
  }
}

ModelParams MixtureModel::standard_init(const DataSet& data,
                                        RngStream& rng) const {
  MixtureParams p;
  p.centers = detail::init_weights(data, latents_, rng, false);
  if (kind_ == MixtureKind::kPoisson) {
    double* c = p.centers.data();
    for (std::size_t i = 0; i < p.centers.size(); ++i)
      c[i] = std::max(c[i], 1e-6);
  } else {
    p.sigma2.assign(latents_,
                    std::max(detail::data_mean_variance(data), kMinSigma2));
  }
  p.mix.assign(latents_, 1.0 / static_cast<double>(latents_));
  return p;
}

void MixtureModel::log_joint_terms(const MixtureParams& p,
                                   std::span<const double> y,
                                   std::span<double> out) const {
  for (std::uint32_t c = 0; c < latents_; ++c) {
    double ll = 0.0;
    if (kind_ == MixtureKind::kGaussian) {
      const double s2 = p.sigma2[c];
      double resid = 0.0;
      for (std::size_t d = 0; d < dim_; ++d) {
        const double r = y[d] - p.centers(d, c);
        resid += r * r;
      }
      ll = -0.5 * static_cast<double>(dim_) * (kLog2Pi + std::log(s2)) -
           resid / (2.0 * s2);
    } else {
      for (std::size_t d = 0; d < dim_; ++d) {
        const double rate = p.centers(d, c);
        ll += y[d] * std::log(rate) - rate;
      }
    }
    out[c] = std::log(p.mix[c]) + ll;
  }
}

std::vector<double> MixtureModel::responsibilities(
    const ModelParams& params, std::span<const double> y) const {
  const auto& p = cast(params);
  std::vector<double> terms(latents_);
  log_joint_terms(p, y, terms);
  const double lse = log_sum_exp(terms);
  std::vector<double> r(latents_);
  for (std::uint32_t c = 0; c < latents_; ++c)
    r[c] = std::exp(terms[c] - lse);
  return r;
}

SuffStats MixtureModel::estep_impl(const MixtureParams& p, const DataSet& data,
                                   RowRange rows, double temperature,
                                   InferenceResult* infer_out) const {
  const std::size_t d = dim_, h = latents_;
  SuffStats stats;
  DenseMatrix& sum_r = stats.field("sum_r", 1, h);
  DenseMatrix& sum_r_y = stats.field("sum_r_y", d, h);
  DenseMatrix& sum_r_y2 = stats.field("sum_r_y2", 1, h);
  stats.scalar("log_partition") = 0.0;

  std::vector<double> terms(h), r(h);
  for (std::size_t n = rows.begin; n < rows.end; ++n) {
    const std::span<const double> y = data.y.row(n);
    log_joint_terms(p, y, terms);
    const double lse1 = log_sum_exp(terms);
    if (temperature == 1.0) {
      for (std::uint32_t c = 0; c < h; ++c) r[c] = std::exp(terms[c] - lse1);
    } else {
      double m = terms[0];
      for (double v : terms) m = std::max(m, v);
      double acc = 0.0;
      for (std::uint32_t c = 0; c < h; ++c) {
        r[c] = std::exp((terms[c] - m) / temperature);
        acc += r[c];
      }
      for (double& v : r) v /= acc;
    }

    double y2 = 0.0;
    for (std::size_t di = 0; di < d; ++di) y2 += y[di] * y[di];
    for (std::uint32_t c = 0; c < h; ++c) {
      sum_r(0, c) += r[c];
      sum_r_y2(0, c) += r[c] * y2;
      for (std::size_t di = 0; di < d; ++di)
        sum_r_y(di, c) += r[c] * y[di];
    }
    stats.scalar("log_partition") += lse1;
    ++stats.points;

    if (infer_out) {
      std::size_t best = 0;
      for (std::uint32_t c = 1; c < h; ++c)
        if (r[c] > r[best]) best = c;
      infer_out->map_mass[n] = r[best];
      infer_out->map_states(n, best) = 1.0;
      for (std::uint32_t c = 0; c < h; ++c)
        infer_out->expected_states(n, c) = r[c];
    }
  }
  return stats;
}

SuffStats MixtureModel::estep_stats(const ModelParams& params,
                                    const DataSet& data, RowRange rows,
                                    double temperature) const {
  return estep_impl(cast(params), data, rows, temperature);
}

ModelParams MixtureModel::mstep(const SuffStats& stats,
                                const ModelParams& prev) const {
  const auto& pp = cast(prev);
  if (stats.points == 0) throw ConfigError(name_ + ": mstep without data");
  const double n = static_cast<double>(stats.points);
  const ConstMatView sum_r = stats.at("sum_r").view();
  const ConstMatView sum_r_y = stats.at("sum_r_y").view();
  const ConstMatView sum_r_y2 = stats.at("sum_r_y2").view();

  MixtureParams out = pp;
  for (std::uint32_t c = 0; c < latents_; ++c) {
    const double rc = sum_r(0, c);
    if (rc < kEvidenceFloor) continue;  // empty component: carry forward
    if (kind_ == MixtureKind::kGaussian) {
      double m2 = 0.0;
      for (std::size_t d = 0; d < dim_; ++d) {
        out.centers(d, c) = sum_r_y(d, c) / rc;
        m2 += out.centers(d, c) * out.centers(d, c);
      }
      out.sigma2[c] = std::max(
          (sum_r_y2(0, c) - m2 * rc) / (static_cast<double>(dim_) * rc),
          kMinSigma2);
    } else {
      for (std::size_t d = 0; d < dim_; ++d)
        out.centers(d, c) = std::max(sum_r_y(d, c) / rc, kMinRate);
    }
  }
  bool floored = false;
  for (std::uint32_t c = 0; c < latents_; ++c) {
    out.mix[c] = sum_r(0, c) / n;
    if (out.mix[c] < kMinCategoricalProb) {
      out.mix[c] = kMinCategoricalProb;
      floored = true;
    }
  }
  if (floored) {
    double total = 0.0;
    for (double m : out.mix) total += m;
    for (double& m : out.mix) m /= total;
  }
  return out;
}

StepResult MixtureModel::step(const ModelParams& params,
                              const AnnealState& anneal, const DataSet& data,
                              const ShardPlan& plan) const {
  validate(params, &data);
  plan.validate(data.size());
  const auto& p = cast(params);
  const double temperature = anneal.temperature;
  SuffStats stats = map_reduce(
      [&](RowRange rows) { return estep_impl(p, data, rows, temperature); },
      plan);
  return StepResult{mstep(stats, params), stats.scalar("log_partition")};
}

InferenceResult MixtureModel::inference(const ModelParams& params,
                                        const DataSet& data,
                                        const ShardPlan& plan) const {
  validate(params, &data);
  plan.validate(data.size());
  const auto& p = cast(params);
  InferenceResult res;
  res.map_states = DenseMatrix(data.size(), latents_);
  res.map_mass.assign(data.size(), 0.0);
  res.expected_states = DenseMatrix(data.size(), latents_);
  map_reduce(
      [&](RowRange rows) { return estep_impl(p, data, rows, 1.0, &res); },
      plan);
  return res;
}

DataSet MixtureModel::generate(const ModelParams& params, std::size_t n,
                               RngStream& rng) const {
  validate(params, nullptr);
  const auto& p = cast(params);
  DenseMatrix y(n, dim_);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t c = rng.categorical(p.mix);
    if (kind_ == MixtureKind::kGaussian) {
      const double std = std::sqrt(p.sigma2[c]);
      for (std::size_t d = 0; d < dim_; ++d)
        y(i, d) = p.centers(d, c) + std * rng.normal();
    } else {
      for (std::size_t d = 0; d < dim_; ++d)
        y(i, d) = static_cast<double>(rng.poisson(p.centers(d, c)));
    }
  }
  return DataSet::wrap(std::move(y));
}

double MixtureModel::exact_log_likelihood(const ModelParams& params,
                                          const DataSet& data) const {
  validate(params, &data);
  const auto& p = cast(params);
  double total = 0.0;
  std::vector<double> terms(latents_);
  for (std::size_t i = 0; i < data.size(); ++i) {
    log_joint_terms(p, data.y.row(i), terms);
    total += log_sum_exp(terms);
  }
  return total;
}

void MixtureModel::perturb_weights(ModelParams& params, double noise_std,
                                   RngStream& rng) const {
  auto& p = std::get<MixtureParams>(params);
  detail::add_column_scaled_noise(p.centers, noise_std, rng);
  if (kind_ == MixtureKind::kPoisson) {
    double* c = p.centers.data();
    for (std::size_t i = 0; i < p.centers.size(); ++i)
      c[i] = std::max(c[i], kMinRate);
  }
}

}  // namespace prsp
