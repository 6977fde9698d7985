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

#include "max_causes.hpp"

#include <algorithm>
#include <cmath>

namespace prsp {

namespace {

constexpr double kLog2Pi = 1.8378770664093454836;

// Winning active unit at one dimension; assumes at least one active unit.
std::uint32_t winner_at(const DenseMatrix& w, std::size_t d,
                        std::span<const std::uint32_t> active, MaxMode mode) {
  std::uint32_t best = active[0];
  double best_key = mode == MaxMode::kMax ? w(d, active[0])
                                          : std::abs(w(d, active[0]));
  for (std::size_t i = 1; i < active.size(); ++i) {
    const double key = mode == MaxMode::kMax ? w(d, active[i])
                                             : std::abs(w(d, active[i]));
    if (key > best_key) {
      best_key = key;
      best = active[i];
    }
  }
  return best;
}

std::vector<std::uint32_t> active_units(std::span<const double> s) {
  std::vector<std::uint32_t> active;
  for (std::size_t h = 0; h < s.size(); ++h) {
    if (s[h] == 1.0)
      active.push_back(static_cast<std::uint32_t>(h));
    else if (s[h] != 0.0)
      throw ConfigError("max causes: latent configuration must be binary");
  }
  return active;
}

}  // namespace

std::vector<double> effective_weight(const DenseMatrix& w,
                                     std::span<const double> s, MaxMode mode) {
  if (s.size() != w.cols())
    throw ConfigError("effective_weight: latent length mismatch");
  const auto active = active_units(s);
  std::vector<double> out(w.rows(), 0.0);
  if (active.empty()) return out;
  for (std::size_t d = 0; d < w.rows(); ++d)
    out[d] = w(d, winner_at(w, d, active, mode));
  return out;
}

DenseMatrix winner_indicator(const DenseMatrix& w, std::span<const double> s,
                             MaxMode mode) {
  if (s.size() != w.cols())
    throw ConfigError("winner_indicator: latent length mismatch");
  const auto active = active_units(s);
  if (active.empty())
    throw ConfigError("winner_indicator: the zero state has no winner");
  DenseMatrix a(w.rows(), w.cols());
  for (std::size_t d = 0; d < w.rows(); ++d)
    a(d, winner_at(w, d, active, mode)) = 1.0;
  return a;
}

MaxCausesModel::MaxCausesModel(MaxMode mode, std::uint32_t dim,
                               std::uint32_t latents, TruncationConfig trunc,
                               double soft_winner_rho)
    : mode_(mode),
      name_(mode == MaxMode::kMax ? "mca" : "mmca"),
      dim_(dim),
      latents_(latents),
      trunc_(trunc),
      soft_winner_rho_(soft_winner_rho) {
  if (dim_ == 0 || latents_ == 0)
    throw ConfigError(name_ + ": dim and latents must be >= 1");
  trunc_.latents = latents_;
  trunc_.validate();
  if (soft_winner_rho_ < 0.0)
    throw ConfigError(name_ + ": soft winner exponent must be >= 0");
  if (soft_winner_rho_ > 0.0 && mode_ != MaxMode::kMax)
    throw ConfigError("soft winners require the non-negative max mode");
}

const McaParams& MaxCausesModel::cast(const ModelParams& params) const {
  const auto* p = std::get_if<McaParams>(&params);
  if (!p) throw ConfigError(name_ + ": wrong parameter family");
  return *p;
}

void MaxCausesModel::validate(const ModelParams& params,
                              const DataSet* data) const {
  const auto& p = cast(params);
  if (p.w.rows() != dim_ || p.w.cols() != latents_)
    throw ConfigError(name_ + ": dictionary shape mismatch");
  if (!p.w.all_finite()) throw NumericError(name_ + ": non-finite dictionary");
  if (mode_ == MaxMode::kMax) {
    for (std::size_t i = 0; i < p.w.size(); ++i)
      if (p.w.data()[i] < kMinMcaWeight)
        throw ConfigError("mca: dictionary entries must be >= the weight floor");
  }
  if (!(p.pi > 0.0 && p.pi < 1.0))
    throw ConfigError(name_ + ": pi must lie in (0,1)");
  if (!(p.sigma2 > 0.0)) throw ConfigError(name_ + ": sigma2 must be positive");
  if (data && data->dim() != dim_)
    throw DataError(name_ + ": data dimension mismatch");
}

ModelParams MaxCausesModel::standard_init(const DataSet& data,
                                          RngStream& rng) const {
  McaParams p;
  p.w = detail::init_weights(data, latents_, rng, mode_ == MaxMode::kMax);
  p.sigma2 = std::max(detail::data_mean_variance(data), kMinSigma2);
  p.pi = static_cast<double>(std::min(trunc_.hprime, latents_)) /
         (2.0 * static_cast<double>(latents_));
  return p;
}

double MaxCausesModel::log_joint(const ModelParams& params,
                                 std::span<const double> y,
                                 std::span<const double> s) const {
  const auto& p = cast(params);
  const auto wbar = effective_weight(p.w, s, mode_);
  double resid = 0.0;
  std::size_t actives = 0;
  for (std::size_t d = 0; d < y.size(); ++d) {
    const double r = y[d] - wbar[d];
    resid += r * r;
  }
  for (double v : s) actives += v != 0.0 ? 1 : 0;
  const double prior = static_cast<double>(actives) * std::log(p.pi) +
                       static_cast<double>(latents_ - actives) *
                           std::log(1.0 - p.pi);
  return prior - 0.5 * static_cast<double>(dim_) *
                     (kLog2Pi + std::log(p.sigma2)) -
         resid / (2.0 * p.sigma2);
}

std::vector<double> MaxCausesModel::selection_scores(
    const ModelParams& params, std::span<const double> y) const {
  const auto& p = cast(params);
  const ConstMatView w = p.w.view();
  ConstVecView yv(y.data(), static_cast<Eigen::Index>(y.size()));
  const double inv2s = 1.0 / (2.0 * p.sigma2);
  std::vector<double> scores(latents_);
  // Singleton joints up to terms constant across units.
  for (std::uint32_t h = 0; h < latents_; ++h)
    scores[h] = (2.0 * w.col(h).dot(yv) - w.col(h).squaredNorm()) * inv2s;
  return scores;
}

SuffStats MaxCausesModel::estep_impl(const McaParams& p,
                                     const StateTemplate& tmpl,
                                     const DataSet& data, RowRange rows,
                                     double temperature,
                                     InferenceResult* infer_out) const {
  const std::size_t d = dim_, h = latents_;

  SuffStats stats;
  DenseMatrix& num = stats.field("winner_num", d, h);
  DenseMatrix& den = stats.field("winner_den", d, h);
  stats.scalar("sum_act") = 0.0;
  stats.scalar("log_partition") = 0.0;

  const double lp1 = std::log(p.pi), lp0 = std::log(1.0 - p.pi);
  const double norm_const =
      -0.5 * static_cast<double>(d) * (kLog2Pi + std::log(p.sigma2));
  const double inv2s = 1.0 / (2.0 * p.sigma2);
  const ConstMatView w = p.w.view();

  std::vector<double> scores(h), lj, q, es(h);
  std::vector<LatentState> states;
  std::vector<std::uint32_t> winners;  // per (state, dimension)
  std::vector<std::uint32_t> active;

  for (std::size_t n = rows.begin; n < rows.end; ++n) {
    ConstVecView y(data.y.data() + n * d, static_cast<Eigen::Index>(d));

    for (std::uint32_t u = 0; u < h; ++u)
      scores[u] = (2.0 * w.col(u).dot(y) - w.col(u).squaredNorm()) * inv2s;
    const auto cand = select_candidates(scores, trunc_.hprime);
    tmpl.instantiate(cand, states);

    lj.resize(states.size());
    winners.assign(states.size() * d, 0);
    for (std::size_t i = 0; i < states.size(); ++i) {
      active.clear();
      for (auto [hu, v] : states[i].active) active.push_back(hu);
      double resid = 0.0;
      if (active.empty()) {
        resid = y.squaredNorm();
      } else {
        for (std::size_t di = 0; di < d; ++di) {
          const std::uint32_t win = winner_at(p.w, di, active, mode_);
          winners[i * d + di] = win;
          const double r = y[static_cast<Eigen::Index>(di)] - p.w(di, win);
          resid += r * r;
        }
      }
      const double k = static_cast<double>(active.size());
      lj[i] = k * lp1 + (static_cast<double>(h) - k) * lp0 + norm_const -
              resid * inv2s;
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
      if (act.empty()) continue;
      stats.scalar("sum_act") += qi * static_cast<double>(act.size());
      for (auto [hu, v] : act) es[hu] += qi;
      if (soft_winner_rho_ > 0.0) {
        // Softened credit assignment over the active units.
        for (std::size_t di = 0; di < d; ++di) {
          double wmax = 0.0;
          for (auto [hu, v] : act) wmax = std::max(wmax, p.w(di, hu));
          double total = 0.0;
          for (auto [hu, v] : act)
            total += std::pow(p.w(di, hu) / wmax, soft_winner_rho_);
          for (auto [hu, v] : act) {
            const double share =
                std::pow(p.w(di, hu) / wmax, soft_winner_rho_) / total;
            num(di, hu) += qi * share * y[static_cast<Eigen::Index>(di)];
            den(di, hu) += qi * share;
          }
        }
      } else {
        for (std::size_t di = 0; di < d; ++di) {
          const std::uint32_t win = winners[i * d + di];
          num(di, win) += qi * y[static_cast<Eigen::Index>(di)];
          den(di, win) += qi;
        }
      }
    }
    stats.scalar("log_partition") += lse1;
    ++stats.points;

    if (infer_out) {
      std::size_t best = 0;
      for (std::size_t i = 1; i < q.size(); ++i)
        if (q[i] > q[best]) best = i;
      infer_out->map_mass[n] = q[best];
      for (auto [hu, v] : states[best].active)
        infer_out->map_states(n, hu) = 1.0;
      for (std::size_t j = 0; j < h; ++j)
        infer_out->expected_states(n, j) = es[j];
    }
  }
  return stats;
}

SuffStats MaxCausesModel::residual_impl(const McaParams& posterior,
                                        const McaParams& updated,
                                        const StateTemplate& tmpl,
                                        const DataSet& data, RowRange rows,
                                        double temperature) const {
  const std::size_t d = dim_, h = latents_;
  SuffStats stats;
  stats.scalar("residual") = 0.0;

  const double lp1 = std::log(posterior.pi), lp0 = std::log(1.0 - posterior.pi);
  const double norm_const =
      -0.5 * static_cast<double>(d) * (kLog2Pi + std::log(posterior.sigma2));
  const double inv2s = 1.0 / (2.0 * posterior.sigma2);
  const ConstMatView w = posterior.w.view();

  std::vector<double> scores(h), lj, q, resid_new;
  std::vector<LatentState> states;
  std::vector<std::uint32_t> active;

  for (std::size_t n = rows.begin; n < rows.end; ++n) {
    ConstVecView y(data.y.data() + n * d, static_cast<Eigen::Index>(d));

    for (std::uint32_t u = 0; u < h; ++u)
      scores[u] = (2.0 * w.col(u).dot(y) - w.col(u).squaredNorm()) * inv2s;
    const auto cand = select_candidates(scores, trunc_.hprime);
    tmpl.instantiate(cand, states);

    lj.resize(states.size());
    resid_new.resize(states.size());
    for (std::size_t i = 0; i < states.size(); ++i) {
      active.clear();
      for (auto [hu, v] : states[i].active) active.push_back(hu);
      double r_old = 0.0, r_new = 0.0;
      if (active.empty()) {
        r_old = r_new = y.squaredNorm();
      } else {
        for (std::size_t di = 0; di < d; ++di) {
          const double yd = y[static_cast<Eigen::Index>(di)];
          const double a = yd - posterior.w(di, winner_at(posterior.w, di,
                                                          active, mode_));
          const double b = yd - updated.w(di, winner_at(updated.w, di, active,
                                                        mode_));
          r_old += a * a;
          r_new += b * b;
        }
      }
      const double k = static_cast<double>(active.size());
      lj[i] = k * lp1 + (static_cast<double>(h) - k) * lp0 + norm_const -
              r_old * inv2s;
      resid_new[i] = r_new;
    }

    q.resize(lj.size());
    double m = lj[0];
    for (double v : lj) m = std::max(m, v);
    double acc = 0.0;
    for (std::size_t i = 0; i < lj.size(); ++i) {
      q[i] = std::exp((lj[i] - m) / temperature);
      acc += q[i];
    }
    double point_resid = 0.0;
    for (std::size_t i = 0; i < lj.size(); ++i)
      point_resid += q[i] / acc * resid_new[i];
    stats.scalar("residual") += point_resid;
    ++stats.points;
  }
  return stats;
}

SuffStats MaxCausesModel::estep_stats(const ModelParams& params,
                                      const DataSet& data, RowRange rows,
                                      double temperature) const {
  const auto& p = cast(params);
  const double one = 1.0;
  const StateTemplate tmpl(trunc_, std::span<const double>(&one, 1));
  return estep_impl(p, tmpl, data, rows, temperature);
}

ModelParams MaxCausesModel::mstep_fixedpoint(const SuffStats& stats,
                                             const ModelParams& prev) const {
  const auto& pp = cast(prev);
  if (stats.points == 0) throw ConfigError(name_ + ": mstep without data");
  const double n = static_cast<double>(stats.points);
  const double nh = n * static_cast<double>(latents_);
  const ConstMatView num = stats.at("winner_num").view();
  const ConstMatView den = stats.at("winner_den").view();

  McaParams out = pp;
  for (std::size_t d = 0; d < dim_; ++d)
    for (std::uint32_t h = 0; h < latents_; ++h) {
      if (den(d, h) >= kEvidenceFloor) {
        double v = num(d, h) / den(d, h);
        if (mode_ == MaxMode::kMax) v = std::max(v, kMinMcaWeight);
        out.w(d, h) = v;
      }
      // Entries without evidence keep their current value.
    }
  out.pi = detail::clip(stats.scalar("sum_act") / nh, kMinPi, 1.0 - kMinPi);
  return out;
}

StepResult MaxCausesModel::step(const ModelParams& params,
                                const AnnealState& anneal, const DataSet& data,
                                const ShardPlan& plan) const {
  validate(params, &data);
  plan.validate(data.size());
  const auto& p = cast(params);
  const double one = 1.0;
  const StateTemplate tmpl(trunc_, std::span<const double>(&one, 1));
  const double temperature = anneal.temperature;

  SuffStats stats = map_reduce(
      [&](RowRange rows) {
        return estep_impl(p, tmpl, data, rows, temperature);
      },
      plan);
  ModelParams updated = mstep_fixedpoint(stats, params);

  // sigma2 from residuals under the new dictionary, posterior held fixed.
  const auto& pu = cast(updated);
  SuffStats resid = map_reduce(
      [&](RowRange rows) {
        return residual_impl(p, pu, tmpl, data, rows, temperature);
      },
      plan);
  auto& out = std::get<McaParams>(updated);
  out.sigma2 = std::max(resid.scalar("residual") /
                            (static_cast<double>(stats.points) *
                             static_cast<double>(dim_)),
                        kMinSigma2);
  return StepResult{std::move(updated), stats.scalar("log_partition")};
}

InferenceResult MaxCausesModel::inference(const ModelParams& params,
                                          const DataSet& data,
                                          const ShardPlan& plan) const {
  validate(params, &data);
  plan.validate(data.size());
  const auto& p = cast(params);
  const double one = 1.0;
  const StateTemplate tmpl(trunc_, std::span<const double>(&one, 1));

  InferenceResult res;
  res.map_states = DenseMatrix(data.size(), latents_);
  res.map_mass.assign(data.size(), 0.0);
  res.expected_states = DenseMatrix(data.size(), latents_);
  map_reduce(
      [&](RowRange rows) {
        return estep_impl(p, tmpl, data, rows, 1.0, &res);
      },
      plan);
  return res;
}

DataSet MaxCausesModel::generate(const ModelParams& params, std::size_t n,
                                 RngStream& rng) const {
  validate(params, nullptr);
  const auto& p = cast(params);
  const double noise_std = std::sqrt(p.sigma2);
  DenseMatrix y(n, dim_);
  std::vector<double> s(latents_);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::uint32_t j = 0; j < latents_; ++j)
      s[j] = rng.bernoulli(p.pi) ? 1.0 : 0.0;
    const auto wbar = effective_weight(p.w, s, mode_);
    for (std::uint32_t di = 0; di < dim_; ++di)
      y(i, di) = wbar[di] + noise_std * rng.normal();
  }
  return DataSet::wrap(std::move(y));
}

double MaxCausesModel::exact_log_likelihood(const ModelParams& params,
                                            const DataSet& data) const {
  validate(params, &data);
  const auto& p = cast(params);
  if (latents_ > 22)
    throw ConfigError(name_ + ": state space too large for exact evaluation");
  const std::uint64_t n_states = 1ull << latents_;
  double total = 0.0;
  std::vector<double> lj(n_states);
  std::vector<double> s(latents_);
  for (std::size_t i = 0; i < data.size(); ++i) {
    for (std::uint64_t mask = 0; mask < n_states; ++mask) {
      for (std::uint32_t h = 0; h < latents_; ++h)
        s[h] = (mask & (1ull << h)) ? 1.0 : 0.0;
      lj[mask] = log_joint(params, data.y.row(i), s);
    }
    total += log_sum_exp(lj);
  }
  return total;
}

void MaxCausesModel::perturb_weights(ModelParams& params, double noise_std,
                                     RngStream& rng) const {
  auto& p = std::get<McaParams>(params);
  detail::add_column_scaled_noise(p.w, noise_std, rng);
  if (mode_ == MaxMode::kMax) {
    double* w = p.w.data();
    for (std::size_t i = 0; i < p.w.size(); ++i)
      w[i] = std::max(w[i], kMinMcaWeight);
  }
}

}  // namespace prsp
