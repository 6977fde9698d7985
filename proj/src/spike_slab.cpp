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

#include "spike_slab.hpp"

#include <algorithm>
#include <cmath>

namespace prsp {

namespace {

constexpr double kLog2Pi = 1.8378770664093454836;

}  // namespace

SpikeSlabModel::SpikeSlabModel(std::uint32_t dim, std::uint32_t latents,
                               TruncationConfig trunc)
    : dim_(dim), latents_(latents), trunc_(trunc) {
  if (dim_ == 0 || latents_ == 0)
    throw ConfigError("gsc: dim and latents must be >= 1");
  trunc_.latents = latents_;
  trunc_.validate();
}

const GscParams& SpikeSlabModel::cast(const ModelParams& params) const {
  const auto* p = std::get_if<GscParams>(&params);
  if (!p) throw ConfigError("gsc: wrong parameter family");
  return *p;
}

void SpikeSlabModel::validate(const ModelParams& params,
                              const DataSet* data) const {
  const auto& p = cast(params);
  if (p.w.rows() != dim_ || p.w.cols() != latents_)
    throw ConfigError("gsc: dictionary shape mismatch");
  if (!p.w.all_finite()) throw NumericError("gsc: non-finite dictionary");
  if (!(p.pi > 0.0 && p.pi < 1.0))
    throw ConfigError("gsc: pi must lie in (0,1)");
  if (!(p.sigma2 > 0.0)) throw ConfigError("gsc: sigma2 must be positive");
  if (p.mu.size() != latents_ || p.psi.size() != latents_)
    throw ConfigError("gsc: mu/psi length mismatch");
  for (double v : p.psi)
    if (!(v > 0.0)) throw ConfigError("gsc: psi must be positive");
  if (data && data->dim() != dim_)
    throw DataError("gsc: data dimension mismatch");
}

ModelParams SpikeSlabModel::standard_init(const DataSet& data,
                                          RngStream& rng) const {
  GscParams p;
  p.w = detail::init_weights(data, latents_, rng, false);
  p.sigma2 = std::max(detail::data_mean_variance(data), kMinSigma2);
  p.pi = static_cast<double>(std::min(trunc_.hprime, latents_)) /
         (2.0 * static_cast<double>(latents_));
  p.mu.assign(latents_, 0.0);
  p.psi.assign(latents_, 1.0);
  return p;
}

SupportPosterior SpikeSlabModel::support_posterior_cached(
    const GscParams& p, const Eigen::MatrixXd& gram, const Eigen::VectorXd& b,
    double y2, std::span<const std::uint32_t> active) const {
  const std::size_t k = active.size();
  const double lp1 = std::log(p.pi), lp0 = std::log(1.0 - p.pi);
  const double prior = static_cast<double>(k) * lp1 +
                       static_cast<double>(latents_ - k) * lp0;
  const double d = static_cast<double>(dim_);

  SupportPosterior out;
  if (k == 0) {
    out.log_marginal = prior - 0.5 * d * (kLog2Pi + std::log(p.sigma2)) -
                       y2 / (2.0 * p.sigma2);
    return out;
  }

  // Precision of z_A | y: P = W_A'W_A / sigma2 + diag(1/psi_A).
  Eigen::MatrixXd prec(k, k);
  Eigen::VectorXd mu_a(k), rhs(k);
  double log_psi = 0.0;
  for (std::size_t i = 0; i < k; ++i) {
    const std::uint32_t hi = active[i];
    mu_a[i] = p.mu[hi];
    log_psi += std::log(p.psi[hi]);
    for (std::size_t j = 0; j < k; ++j)
      prec(i, j) = gram(active[i], active[j]) / p.sigma2;
    prec(i, i) += 1.0 / p.psi[hi];
    rhs[i] = b[hi] / p.sigma2 + p.mu[hi] / p.psi[hi];
  }

  Eigen::LLT<Eigen::MatrixXd> llt(prec);
  if (llt.info() != Eigen::Success) {
    // One shot of jitter; the system is PD in exact arithmetic.
    const double jitter = 1e-10 * prec.trace() / static_cast<double>(k);
    prec.diagonal().array() += jitter;
    llt.compute(prec);
    if (llt.info() != Eigen::Success)
      throw NumericError("gsc: slab posterior factorization failed");
  }

  out.mean = llt.solve(rhs);
  out.covariance = llt.solve(Eigen::MatrixXd::Identity(k, k));

  double log_det_prec = 0.0;
  const auto& l = llt.matrixLLT();
  for (std::size_t i = 0; i < k; ++i) log_det_prec += 2.0 * std::log(l(i, i));

  // Residual against the slab-mean prediction via the Woodbury identity:
  // r'C^{-1}r = |r|²/sigma2 - u'Lambda u with u = W_A'r / sigma2.
  Eigen::VectorXd ga_mu(k), u(k);
  for (std::size_t i = 0; i < k; ++i) {
    double acc = 0.0;
    for (std::size_t j = 0; j < k; ++j)
      acc += gram(active[i], active[j]) * mu_a[j];
    ga_mu[i] = acc;
    u[i] = (b[active[i]] - acc) / p.sigma2;
  }
  double r2 = y2;
  for (std::size_t i = 0; i < k; ++i)
    r2 += -2.0 * mu_a[i] * b[active[i]] + mu_a[i] * ga_mu[i];
  const double quad = r2 / p.sigma2 - u.dot(out.covariance * u);
  // log|C| = D log sigma2 + sum log psi_A + log|P|.
  const double log_det = d * std::log(p.sigma2) + log_psi + log_det_prec;
  out.log_marginal = prior - 0.5 * (d * kLog2Pi + log_det + quad);
  return out;
}

SupportPosterior SpikeSlabModel::support_posterior(
    const ModelParams& params, std::span<const double> y,
    std::span<const std::uint32_t> active) const {
  const auto& p = cast(params);
  if (y.size() != dim_) throw DataError("gsc: data dimension mismatch");
  for (std::size_t i = 0; i < active.size(); ++i) {
    if (active[i] >= latents_)
      throw ConfigError("gsc: active index out of range");
    if (i > 0 && active[i] <= active[i - 1])
      throw ConfigError("gsc: active set must be ascending");
  }
  const ConstMatView w = p.w.view();
  ConstVecView yv(y.data(), static_cast<Eigen::Index>(y.size()));
  // Only the active columns enter; cost grows with |A|, not D³.
  const std::size_t k = active.size();
  Eigen::VectorXd b = Eigen::VectorXd::Zero(latents_);
  Eigen::MatrixXd gram = Eigen::MatrixXd::Zero(latents_, latents_);
  for (std::size_t i = 0; i < k; ++i) {
    b[active[i]] = w.col(active[i]).dot(yv);
    for (std::size_t j = 0; j <= i; ++j) {
      const double g = w.col(active[i]).dot(w.col(active[j]));
      gram(active[i], active[j]) = g;
      gram(active[j], active[i]) = g;
    }
  }
  return support_posterior_cached(p, gram, b, yv.squaredNorm(), active);
}

std::vector<double> SpikeSlabModel::selection_scores(
    const ModelParams& params, std::span<const double> y) const {
  const auto& p = cast(params);
  const ConstMatView w = p.w.view();
  ConstVecView yv(y.data(), static_cast<Eigen::Index>(y.size()));
  const double y2 = yv.squaredNorm();
  const double d = static_cast<double>(dim_);
  std::vector<double> scores(latents_);
  // Rank-1 singleton marginals; O(D) per unit.
  for (std::uint32_t h = 0; h < latents_; ++h) {
    const double g = w.col(h).squaredNorm();
    const double bh = w.col(h).dot(yv);
    const double prec = g / p.sigma2 + 1.0 / p.psi[h];
    const double lambda = 1.0 / prec;
    const double u = (bh - g * p.mu[h]) / p.sigma2;
    const double r2 = y2 - 2.0 * p.mu[h] * bh + p.mu[h] * p.mu[h] * g;
    const double log_det =
        d * std::log(p.sigma2) + std::log(p.psi[h]) + std::log(prec);
    scores[h] = -0.5 * (log_det + r2 / p.sigma2 - u * u * lambda);
  }
  return scores;
}

SuffStats SpikeSlabModel::estep_impl(const GscParams& p,
                                     const StateTemplate& tmpl,
                                     const DataSet& data, RowRange rows,
                                     double temperature,
                                     InferenceResult* infer_out) const {
  const std::size_t d = dim_, h = latents_;

  SuffStats stats;
  DenseMatrix& sum_s = stats.field("sum_s", 1, h);
  DenseMatrix& sum_ssT = stats.field("sum_ssT", h, h);
  DenseMatrix& sum_y_sT = stats.field("sum_y_sT", d, h);
  DenseMatrix& sum_b = stats.field("sum_b", 1, h);
  DenseMatrix& sum_bz2 = stats.field("sum_bz2", 1, h);
  stats.scalar("sum_y2") = 0.0;
  stats.scalar("log_partition") = 0.0;

  const ConstMatView w = p.w.view();
  const Eigen::MatrixXd gram = w.transpose() * w;

  std::vector<double> scores(h), lj, q, es(h);
  std::vector<LatentState> states;
  std::vector<SupportPosterior> posts;
  std::vector<std::uint32_t> support;
  Eigen::VectorXd b(h);

  for (std::size_t n = rows.begin; n < rows.end; ++n) {
    ConstVecView y(data.y.data() + n * d, static_cast<Eigen::Index>(d));
    b.noalias() = w.transpose() * y;
    const double y2 = y.squaredNorm();

    for (std::uint32_t u = 0; u < h; ++u) {
      const double g = gram(u, u);
      const double prec = g / p.sigma2 + 1.0 / p.psi[u];
      const double uu = (b[u] - g * p.mu[u]) / p.sigma2;
      const double r2 = y2 - 2.0 * p.mu[u] * b[u] + p.mu[u] * p.mu[u] * g;
      scores[u] = -0.5 * (std::log(p.psi[u]) + std::log(prec) + r2 / p.sigma2 -
                          uu * uu / prec);
    }
    const auto cand = select_candidates(scores, trunc_.hprime);
    tmpl.instantiate(cand, states);

    lj.resize(states.size());
    posts.resize(states.size());
    for (std::size_t i = 0; i < states.size(); ++i) {
      support.clear();
      for (auto [hu, v] : states[i].active) support.push_back(hu);
      posts[i] = support_posterior_cached(p, gram, b, y2, support);
      lj[i] = posts[i].log_marginal;
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
      const auto& post = posts[i];
      for (std::size_t a = 0; a < act.size(); ++a) {
        const std::uint32_t ha = act[a].first;
        const double kappa = post.mean[static_cast<Eigen::Index>(a)];
        const double second =
            post.covariance(static_cast<Eigen::Index>(a),
                            static_cast<Eigen::Index>(a)) +
            kappa * kappa;
        es[ha] += qi * kappa;
        sum_b(0, ha) += qi;
        sum_bz2(0, ha) += qi * second;
        sum_ssT(ha, ha) += qi * second;
        for (std::size_t c = a + 1; c < act.size(); ++c) {
          const std::uint32_t hc = act[c].first;
          const double cross =
              qi * (post.covariance(static_cast<Eigen::Index>(a),
                                    static_cast<Eigen::Index>(c)) +
                    kappa * post.mean[static_cast<Eigen::Index>(c)]);
          sum_ssT(ha, hc) += cross;
          sum_ssT(hc, ha) += cross;
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
      // The MAP row carries the slab conditional mean on the MAP support.
      const auto& act = states[best].active;
      for (std::size_t a = 0; a < act.size(); ++a)
        infer_out->map_states(n, act[a].first) =
            posts[best].mean[static_cast<Eigen::Index>(a)];
      for (std::size_t j = 0; j < h; ++j)
        infer_out->expected_states(n, j) = es[j];
    }
  }
  return stats;
}

SuffStats SpikeSlabModel::estep_stats(const ModelParams& params,
                                      const DataSet& data, RowRange rows,
                                      double temperature) const {
  const auto& p = cast(params);
  const double one = 1.0;
  const StateTemplate tmpl(trunc_, std::span<const double>(&one, 1));
  return estep_impl(p, tmpl, data, rows, temperature);
}

ModelParams SpikeSlabModel::mstep(const SuffStats& stats,
                                  const ModelParams& prev) const {
  const auto& pp = cast(prev);
  if (stats.points == 0) throw ConfigError("gsc: mstep without data");
  const double n = static_cast<double>(stats.points);
  const double d = static_cast<double>(dim_);
  const double nh = n * static_cast<double>(latents_);

  const ConstMatView ssT = stats.at("sum_ssT").view();
  const ConstMatView ysT = stats.at("sum_y_sT").view();
  const ConstMatView sb = stats.at("sum_b").view();
  const ConstMatView sbz2 = stats.at("sum_bz2").view();
  const ConstMatView ss = stats.at("sum_s").view();

  GscParams out = pp;

  const double trace = ssT.trace();
  if (trace > 0.0) {
    Eigen::MatrixXd bmat = ssT;
    bmat.diagonal().array() += 1e-9 * trace / static_cast<double>(latents_);
    Eigen::LLT<Eigen::MatrixXd> llt(bmat);
    if (llt.info() == Eigen::Success) {
      Eigen::MatrixXd wt = llt.solve(ysT.transpose());
      out.w = DenseMatrix(dim_, latents_);
      out.w.view() = wt.transpose();
    }
  }

  double total_b = 0.0;
  for (std::uint32_t j = 0; j < latents_; ++j) {
    const double bj = sb(0, j);
    total_b += bj;
    if (bj < kEvidenceFloor) continue;  // no evidence: carry mu, psi forward
    out.mu[j] = ss(0, j) / bj;
    out.psi[j] = std::max(sbz2(0, j) / bj - out.mu[j] * out.mu[j], kMinSlabVar);
  }
  out.pi = detail::clip(total_b / nh, kMinPi, 1.0 - kMinPi);

  const ConstMatView w = out.w.cview();
  const double t1 = stats.scalar("sum_y2");
  const double t2 = (w.array() * ysT.array()).sum();
  const double t3 = ((w.transpose() * w).array() * ssT.array()).sum();
  out.sigma2 = std::max((t1 - 2.0 * t2 + t3) / (n * d), kMinSigma2);
  return out;
}

StepResult SpikeSlabModel::step(const ModelParams& params,
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
  return StepResult{mstep(stats, params), stats.scalar("log_partition")};
}

InferenceResult SpikeSlabModel::inference(const ModelParams& params,
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

DataSet SpikeSlabModel::generate(const ModelParams& params, std::size_t n,
                                 RngStream& rng) const {
  validate(params, nullptr);
  const auto& p = cast(params);
  const ConstMatView w = p.w.view();
  const double noise_std = std::sqrt(p.sigma2);
  DenseMatrix y(n, dim_);
  Eigen::VectorXd s(latents_);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::uint32_t j = 0; j < latents_; ++j) {
      if (rng.bernoulli(p.pi))
        s[j] = p.mu[j] + std::sqrt(p.psi[j]) * rng.normal();
      else
        s[j] = 0.0;
    }
    Eigen::VectorXd mean = w * s;
    for (std::uint32_t di = 0; di < dim_; ++di)
      y(i, di) = mean[di] + noise_std * rng.normal();
  }
  return DataSet::wrap(std::move(y));
}

double SpikeSlabModel::exact_log_likelihood(const ModelParams& params,
                                            const DataSet& data) const {
  validate(params, &data);
  const auto& p = cast(params);
  if (latents_ > 22)
    throw ConfigError("gsc: state space too large for exact evaluation");
  const std::uint64_t n_states = 1ull << latents_;
  const ConstMatView w = p.w.view();
  const Eigen::MatrixXd gram = w.transpose() * w;

  double total = 0.0;
  std::vector<double> lj(n_states);
  std::vector<std::uint32_t> support;
  for (std::size_t i = 0; i < data.size(); ++i) {
    ConstVecView y(data.y.data() + i * dim_, static_cast<Eigen::Index>(dim_));
    const Eigen::VectorXd b = w.transpose() * y;
    const double y2 = y.squaredNorm();
    for (std::uint64_t mask = 0; mask < n_states; ++mask) {
      support.clear();
      for (std::uint32_t h = 0; h < latents_; ++h)
        if (mask & (1ull << h)) support.push_back(h);
      lj[mask] = support_posterior_cached(p, gram, b, y2, support).log_marginal;
    }
    total += log_sum_exp(lj);
  }
  return total;
}

void SpikeSlabModel::perturb_weights(ModelParams& params, double noise_std,
                                     RngStream& rng) const {
  auto& p = std::get<GscParams>(params);
  detail::add_column_scaled_noise(p.w, noise_std, rng);
}

}  // namespace prsp
