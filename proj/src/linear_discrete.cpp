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

#include "linear_discrete.hpp"

#include <algorithm>
#include <cmath>

namespace prsp {

namespace {

constexpr double kLog2Pi = 1.8378770664093454836;

double gauss_log_norm(std::size_t dim, double sigma2) {
  return -0.5 * static_cast<double>(dim) * (kLog2Pi + std::log(sigma2));
}

}  // namespace

LinearDiscreteModel::LinearDiscreteModel(DiscreteFamily family,
                                         std::uint32_t dim,
                                         std::uint32_t latents,
                                         TruncationConfig trunc,
                                         std::vector<double> dsc_values)
    : family_(family),
      dim_(dim),
      latents_(latents),
      trunc_(trunc),
      init_values_(std::move(dsc_values)) {
  if (dim_ == 0 || latents_ == 0)
    throw ConfigError("linear model: dim and latents must be >= 1");
  trunc_.latents = latents_;
  trunc_.validate();
  switch (family_) {
    case DiscreteFamily::kBsc: name_ = "bsc"; break;
    case DiscreteFamily::kTsc: name_ = "tsc"; break;
    case DiscreteFamily::kDsc: name_ = "dsc"; break;
  }
  if (family_ == DiscreteFamily::kDsc) {
    if (init_values_.size() < 2)
      throw ConfigError("dsc: alphabet needs at least two values");
    std::sort(init_values_.begin(), init_values_.end());
    if (std::adjacent_find(init_values_.begin(), init_values_.end()) !=
        init_values_.end())
      throw ConfigError("dsc: alphabet values must be distinct");
    if (std::find(init_values_.begin(), init_values_.end(), 0.0) ==
        init_values_.end())
      throw ConfigError("dsc: alphabet must contain 0");
  }
}

const LinearDiscreteParams& LinearDiscreteModel::cast(
    const ModelParams& params) const {
  const auto* p = std::get_if<LinearDiscreteParams>(&params);
  if (!p) throw ConfigError(name_ + ": wrong parameter family");
  return *p;
}

LinearDiscreteModel::ValueTable LinearDiscreteModel::value_table(
    const LinearDiscreteParams& p) const {
  ValueTable t;
  switch (family_) {
    case DiscreteFamily::kBsc:
      t.values = {1.0};
      t.log_probs = {std::log(p.pi)};
      t.log_p0 = std::log(1.0 - p.pi);
      break;
    case DiscreteFamily::kTsc:
      t.values = {-1.0, 1.0};
      t.log_probs = {std::log(p.pi / 2.0), std::log(p.pi / 2.0)};
      t.log_p0 = std::log(1.0 - p.pi);
      break;
    case DiscreteFamily::kDsc:
      for (std::size_t k = 0; k < p.values.size(); ++k) {
        if (p.values[k] == 0.0) {
          t.log_p0 = std::log(p.probs[k]);
        } else {
          t.values.push_back(p.values[k]);
          t.log_probs.push_back(std::log(p.probs[k]));
        }
      }
      break;
  }
  return t;
}

void LinearDiscreteModel::validate(const ModelParams& params,
                                   const DataSet* data) const {
  const auto& p = cast(params);
  if (p.w.rows() != dim_ || p.w.cols() != latents_)
    throw ConfigError(name_ + ": dictionary shape mismatch");
  if (!p.w.all_finite()) throw NumericError(name_ + ": non-finite dictionary");
  if (!(p.sigma2 > 0.0) || !std::isfinite(p.sigma2))
    throw ConfigError(name_ + ": sigma2 must be positive");
  if (family_ == DiscreteFamily::kDsc) {
    if (p.values.size() < 2 || p.values.size() != p.probs.size())
      throw ConfigError("dsc: values/probs size mismatch");
    if (!std::is_sorted(p.values.begin(), p.values.end()))
      throw ConfigError("dsc: values must be ascending");
    if (std::find(p.values.begin(), p.values.end(), 0.0) == p.values.end())
      throw ConfigError("dsc: alphabet must contain 0");
    double total = 0.0;
    for (double q : p.probs) {
      if (!(q > 0.0)) throw ConfigError("dsc: probabilities must be positive");
      total += q;
    }
    if (std::abs(total - 1.0) > 1e-6)
      throw ConfigError("dsc: probabilities must sum to 1");
  } else {
    if (!(p.pi > 0.0 && p.pi < 1.0))
      throw ConfigError(name_ + ": pi must lie in (0,1)");
  }
  if (data && data->dim() != dim_)
    throw DataError(name_ + ": data dimension mismatch");
}

ModelParams LinearDiscreteModel::standard_init(const DataSet& data,
                                               RngStream& rng) const {
  LinearDiscreteParams p;
  p.w = detail::init_weights(data, latents_, rng, false);
  p.sigma2 = std::max(detail::data_mean_variance(data), kMinSigma2);
  const double h = static_cast<double>(latents_);
  const double hp = static_cast<double>(std::min(trunc_.hprime, latents_));
  if (family_ == DiscreteFamily::kDsc) {
    p.values = init_values_;
    const double k = static_cast<double>(p.values.size());
    // Uniform mass on the non-zero values, remainder on zero.
    const double nonzero = hp / (2.0 * h * k);
    p.probs.assign(p.values.size(), nonzero);
    for (std::size_t i = 0; i < p.values.size(); ++i)
      if (p.values[i] == 0.0) p.probs[i] = 1.0 - hp / (2.0 * h) * (1.0 - 1.0 / k);
  } else {
    p.pi = hp / (2.0 * h);
  }
  return p;
}

double LinearDiscreteModel::log_prior(const ModelParams& params,
                                      std::span<const double> s) const {
  const auto& p = cast(params);
  const ValueTable table = value_table(p);
  double acc = 0.0;
  for (double v : s) {
    if (v == 0.0) {
      acc += table.log_p0;
      continue;
    }
    const auto it = std::find(table.values.begin(), table.values.end(), v);
    if (it == table.values.end())
      throw ConfigError(name_ + ": latent value outside the alphabet");
    acc += table.log_probs[static_cast<std::size_t>(it - table.values.begin())];
  }
  return acc;
}

double LinearDiscreteModel::log_joint(const ModelParams& params,
                                      std::span<const double> y,
                                      std::span<const double> s) const {
  const auto& p = cast(params);
  const ConstMatView w = p.w.view();
  ConstVecView yv(y.data(), static_cast<Eigen::Index>(y.size()));
  ConstVecView sv(s.data(), static_cast<Eigen::Index>(s.size()));
  const double resid = (yv - w * sv).squaredNorm();
  return log_prior(params, s) + gauss_log_norm(dim_, p.sigma2) -
         resid / (2.0 * p.sigma2);
}

std::vector<double> LinearDiscreteModel::selection_scores(
    const ModelParams& params, std::span<const double> y) const {
  const auto& p = cast(params);
  const ValueTable table = value_table(p);
  const ConstMatView w = p.w.view();
  ConstVecView yv(y.data(), static_cast<Eigen::Index>(y.size()));
  const Eigen::VectorXd b = w.transpose() * yv;
  const double inv2s = 1.0 / (2.0 * p.sigma2);
  std::vector<double> scores(latents_);
  for (std::uint32_t h = 0; h < latents_; ++h) {
    const double g = w.col(h).squaredNorm();
    double best = -std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < table.values.size(); ++k) {
      const double v = table.values[k];
      best = std::max(best,
                      table.log_probs[k] + (2.0 * v * b[h] - v * v * g) * inv2s);
    }
    scores[h] = best;
  }
  return scores;
}

SuffStats LinearDiscreteModel::estep_impl(const LinearDiscreteParams& p,
                                          const ValueTable& table,
                                          const StateTemplate& tmpl,
                                          const DataSet& data, RowRange rows,
                                          double temperature,
                                          InferenceResult* infer_out) const {
  const std::size_t d = dim_, h = latents_;
  const std::size_t n_values = table.values.size();

  SuffStats stats;
  DenseMatrix& sum_s = stats.field("sum_s", 1, h);
  DenseMatrix& sum_ssT = stats.field("sum_ssT", h, h);
  DenseMatrix& sum_y_sT = stats.field("sum_y_sT", d, h);
  DenseMatrix& counts = stats.field("value_counts", 1, n_values);
  stats.scalar("sum_y2") = 0.0;
  stats.scalar("log_partition") = 0.0;

  const ConstMatView w = p.w.view();
  const Eigen::MatrixXd gram = w.transpose() * w;
  const double inv2s = 1.0 / (2.0 * p.sigma2);
  const double norm_const = gauss_log_norm(d, p.sigma2);
  // log prior relative to the all-zero state, per value.
  std::vector<double> dlp(n_values);
  for (std::size_t k = 0; k < n_values; ++k)
    dlp[k] = table.log_probs[k] - table.log_p0;
  const double zero_prior = static_cast<double>(h) * table.log_p0;

  std::vector<double> scores(h), lj, q, es(h);
  std::vector<LatentState> states;
  Eigen::VectorXd b(h);

  auto value_index = [&](double v) {
    for (std::size_t k = 0; k < n_values; ++k)
      if (table.values[k] == v) return k;
    throw ConfigError(name_ + ": state value outside the alphabet");
  };

  for (std::size_t n = rows.begin; n < rows.end; ++n) {
    ConstVecView y(data.y.data() + n * d, static_cast<Eigen::Index>(d));
    b.noalias() = w.transpose() * y;
    const double y2 = y.squaredNorm();

    for (std::uint32_t u = 0; u < h; ++u) {
      double best = -std::numeric_limits<double>::infinity();
      for (std::size_t k = 0; k < n_values; ++k) {
        const double v = table.values[k];
        best = std::max(best, table.log_probs[k] +
                                  (2.0 * v * b[u] - v * v * gram(u, u)) * inv2s);
      }
      scores[u] = best;
    }
    const auto cand = select_candidates(scores, trunc_.hprime);
    tmpl.instantiate(cand, states);

    const double base = zero_prior + norm_const - y2 * inv2s;
    lj.resize(states.size());
    for (std::size_t i = 0; i < states.size(); ++i) {
      const auto& act = states[i].active;
      double prior = 0.0, lin = 0.0, quad = 0.0;
      for (std::size_t a = 0; a < act.size(); ++a) {
        const auto [ha, va] = act[a];
        prior += dlp[value_index(va)];
        lin += va * b[ha];
        quad += va * va * gram(ha, ha);
        for (std::size_t c = a + 1; c < act.size(); ++c)
          quad += 2.0 * va * act[c].second * gram(ha, act[c].first);
      }
      lj[i] = base + prior + (2.0 * lin - quad) * inv2s;
    }

    const double lse1 = log_sum_exp(lj);
    q.resize(lj.size());
    if (temperature == 1.0) {
      for (std::size_t i = 0; i < lj.size(); ++i)
        q[i] = std::exp(lj[i] - lse1);
    } else {
      double m = lj[0];
      for (double v : lj) m = std::max(m, v);
      double acc = 0.0;
      for (std::size_t i = 0; i < lj.size(); ++i) {
        q[i] = std::exp((lj[i] - m) / temperature);
        acc += q[i];
      }
      for (double& v : q) v /= acc;
    }

    std::fill(es.begin(), es.end(), 0.0);
    for (std::size_t i = 0; i < states.size(); ++i) {
      const double qi = q[i];
      const auto& act = states[i].active;
      for (std::size_t a = 0; a < act.size(); ++a) {
        const auto [ha, va] = act[a];
        es[ha] += qi * va;
        counts(0, value_index(va)) += qi;
        sum_ssT(ha, ha) += qi * va * va;
        for (std::size_t c = a + 1; c < act.size(); ++c) {
          const double cross = qi * va * act[c].second;
          sum_ssT(ha, act[c].first) += cross;
          sum_ssT(act[c].first, ha) += cross;
        }
      }
    }
    for (std::size_t j = 0; j < h; ++j) sum_s(0, j) += es[j];
    for (std::size_t i = 0; i < d; ++i) {
      const double yi = y[static_cast<Eigen::Index>(i)];
      for (std::size_t j = 0; j < h; ++j) sum_y_sT(i, j) += yi * es[j];
    }
    stats.scalar("sum_y2") += y2;
    stats.scalar("log_partition") += lse1;
    ++stats.points;

    if (infer_out) {
      std::size_t best = 0;
      for (std::size_t i = 1; i < q.size(); ++i)
        if (q[i] > q[best]) best = i;
      infer_out->map_mass[n] = q[best];
      for (auto [ha, va] : states[best].active)
        infer_out->map_states(n, ha) = va;
      for (std::size_t j = 0; j < h; ++j)
        infer_out->expected_states(n, j) = es[j];
    }
  }
  return stats;
}

SuffStats LinearDiscreteModel::estep_stats(const ModelParams& params,
                                           const DataSet& data, RowRange rows,
                                           double temperature) const {
  const auto& p = cast(params);
  const ValueTable table = value_table(p);
  const StateTemplate tmpl(trunc_, table.values);
  return estep_impl(p, table, tmpl, data, rows, temperature);
}

ModelParams LinearDiscreteModel::mstep(const SuffStats& stats,
                                       const ModelParams& prev) const {
  const auto& pp = cast(prev);
  const double n = static_cast<double>(stats.points);
  const double d = static_cast<double>(dim_);
  const double nh = n * static_cast<double>(latents_);
  if (stats.points == 0) throw ConfigError(name_ + ": mstep without data");

  const ConstMatView ssT = stats.at("sum_ssT").view();
  const ConstMatView ysT = stats.at("sum_y_sT").view();

  LinearDiscreteParams out = pp;

  const double trace = ssT.trace();
  if (trace > 0.0) {
    Eigen::MatrixXd b = ssT;
    const double ridge = 1e-9 * trace / static_cast<double>(latents_);
    b.diagonal().array() += ridge;
    Eigen::LLT<Eigen::MatrixXd> llt(b);
    if (llt.info() == Eigen::Success) {
      // W' = A B^{-1} with A = sum_y_sT; B is symmetric.
      Eigen::MatrixXd wt = llt.solve(ysT.transpose());
      out.w = DenseMatrix(dim_, latents_);
      out.w.view() = wt.transpose();
    }
    // A failed factorization keeps the previous dictionary; the ridge makes
    // this unreachable for nonzero posterior mass.
  }

  const ConstMatView w = out.w.cview();
  const double t1 = stats.scalar("sum_y2");
  const double t2 = (w.array() * ysT.array()).sum();
  const double t3 = ((w.transpose() * w).array() * ssT.array()).sum();
  out.sigma2 = std::max((t1 - 2.0 * t2 + t3) / (n * d), kMinSigma2);

  const ConstMatView counts = stats.at("value_counts").view();
  switch (family_) {
    case DiscreteFamily::kBsc: {
      out.pi = detail::clip(counts(0, 0) / nh, kMinPi, 1.0 - kMinPi);
      break;
    }
    case DiscreteFamily::kTsc: {
      out.pi =
          detail::clip((counts(0, 0) + counts(0, 1)) / nh, kMinPi, 1.0 - kMinPi);
      break;
    }
    case DiscreteFamily::kDsc: {
      double nonzero_mass = 0.0;
      std::size_t k = 0;
      for (std::size_t i = 0; i < out.values.size(); ++i) {
        if (out.values[i] == 0.0) continue;
        out.probs[i] = counts(0, static_cast<Eigen::Index>(k)) / nh;
        nonzero_mass += out.probs[i];
        ++k;
      }
      for (std::size_t i = 0; i < out.values.size(); ++i)
        if (out.values[i] == 0.0) out.probs[i] = 1.0 - nonzero_mass;
      bool floored = false;
      for (double& q : out.probs)
        if (q < kMinCategoricalProb) {
          q = kMinCategoricalProb;
          floored = true;
        }
      if (floored) {
        double total = 0.0;
        for (double q : out.probs) total += q;
        for (double& q : out.probs) q /= total;
      }
      break;
    }
  }
  return out;
}

StepResult LinearDiscreteModel::step(const ModelParams& params,
                                     const AnnealState& anneal,
                                     const DataSet& data,
                                     const ShardPlan& plan) const {
  validate(params, &data);
  plan.validate(data.size());
  const auto& p = cast(params);
  const ValueTable table = value_table(p);
  const StateTemplate tmpl(trunc_, table.values);
  const double temperature = anneal.temperature;
  SuffStats stats = map_reduce(
      [&](RowRange rows) {
        return estep_impl(p, table, tmpl, data, rows, temperature);
      },
      plan);
  StepResult result{mstep(stats, params), stats.scalar("log_partition")};
  return result;
}

InferenceResult LinearDiscreteModel::inference(const ModelParams& params,
                                               const DataSet& data,
                                               const ShardPlan& plan) const {
  validate(params, &data);
  plan.validate(data.size());
  const auto& p = cast(params);
  const ValueTable table = value_table(p);
  const StateTemplate tmpl(trunc_, table.values);

  InferenceResult res;
  res.map_states = DenseMatrix(data.size(), latents_);
  res.map_mass.assign(data.size(), 0.0);
  res.expected_states = DenseMatrix(data.size(), latents_);

  // Shards write disjoint result rows; the stats are discarded.
  map_reduce(
      [&](RowRange rows) {
        return estep_impl(p, table, tmpl, data, rows, 1.0, &res);
      },
      plan);
  return res;
}

DataSet LinearDiscreteModel::generate(const ModelParams& params, std::size_t n,
                                      RngStream& rng) const {
  validate(params, nullptr);
  const auto& p = cast(params);
  const ConstMatView w = p.w.view();
  const double noise_std = std::sqrt(p.sigma2);
  DenseMatrix y(n, dim_);
  Eigen::VectorXd s(latents_);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::uint32_t j = 0; j < latents_; ++j) {
      switch (family_) {
        case DiscreteFamily::kBsc:
          s[j] = rng.bernoulli(p.pi) ? 1.0 : 0.0;
          break;
        case DiscreteFamily::kTsc:
          s[j] = rng.bernoulli(p.pi) ? (rng.bernoulli(0.5) ? 1.0 : -1.0) : 0.0;
          break;
        case DiscreteFamily::kDsc:
          s[j] = p.values[rng.categorical(p.probs)];
          break;
      }
    }
    Eigen::VectorXd mean = w * s;
    for (std::uint32_t di = 0; di < dim_; ++di)
      y(i, di) = mean[di] + noise_std * rng.normal();
  }
  return DataSet::wrap(std::move(y));
}

double LinearDiscreteModel::exact_log_likelihood(const ModelParams& params,
                                                 const DataSet& data) const {
  validate(params, &data);
  const auto& p = cast(params);
  const ValueTable table = value_table(p);
  // The full state space is the truncated enumeration with hprime = gamma = H.
  TruncationConfig full{latents_, latents_, latents_, 1u << 22};
  const std::uint64_t count = truncated_state_count(
      full, static_cast<std::uint32_t>(table.values.size()));
  if (count > (1u << 22))
    throw ConfigError(name_ + ": state space too large for exact evaluation");
  std::vector<std::uint32_t> all(latents_);
  for (std::uint32_t i = 0; i < latents_; ++i) all[i] = i;
  StateTemplate tmpl(full, table.values);
  std::vector<LatentState> states;
  tmpl.instantiate(all, states);

  double total = 0.0;
  std::vector<double> lj(states.size());
  for (std::size_t i = 0; i < data.size(); ++i) {
    for (std::size_t s = 0; s < states.size(); ++s) {
      const auto dense = states[s].to_dense(latents_);
      lj[s] = log_joint(params, data.y.row(i), dense);
    }
    total += log_sum_exp(lj);
  }
  return total;
}

void LinearDiscreteModel::perturb_weights(ModelParams& params, double noise_std,
                                          RngStream& rng) const {
  auto& p = std::get<LinearDiscreteParams>(params);
  detail::add_column_scaled_noise(p.w, noise_std, rng);
}

}  // namespace prsp
