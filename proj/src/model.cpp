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

#include "model.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>

#include "linear_discrete.hpp"
#include "max_causes.hpp"
#include "mixture.hpp"
#include "spike_slab.hpp"

namespace prsp {

std::size_t param_float_count(const ModelParams& params) {
  std::size_t n = 0;
  for (const auto& [name, mat] : params_to_arrays(params)) n += mat.size();
  return n;
}

const std::vector<std::string>& model_names() {
  static const std::vector<std::string> names = {"bsc", "tsc", "dsc", "gsc",
                                                 "mca", "mmca", "gmm", "pmm"};
  return names;
}

bool model_uses_truncation(const std::string& name) {
  return name != "gmm" && name != "pmm";
}

std::unique_ptr<Model> make_model(const std::string& name, std::uint32_t dim,
                                  std::uint32_t latents,
                                  const TruncationConfig& trunc,
                                  std::span<const double> dsc_values) {
  if (name != "dsc" && !dsc_values.empty())
    throw ConfigError("model " + name + " does not take a value alphabet");
  if (name == "bsc")
    return std::make_unique<LinearDiscreteModel>(DiscreteFamily::kBsc, dim,
                                                 latents, trunc);
  if (name == "tsc")
    return std::make_unique<LinearDiscreteModel>(DiscreteFamily::kTsc, dim,
                                                 latents, trunc);
  if (name == "dsc") {
    if (dsc_values.empty())
      throw ConfigError("model dsc requires a value alphabet");
    return std::make_unique<LinearDiscreteModel>(
        DiscreteFamily::kDsc, dim, latents, trunc,
        std::vector<double>(dsc_values.begin(), dsc_values.end()));
  }
  if (name == "gsc")
    return std::make_unique<SpikeSlabModel>(dim, latents, trunc);
  if (name == "mca")
    return std::make_unique<MaxCausesModel>(MaxMode::kMax, dim, latents, trunc);
  if (name == "mmca")
    return std::make_unique<MaxCausesModel>(MaxMode::kAbsMax, dim, latents,
                                            trunc);
  if (name == "gmm")
    return std::make_unique<MixtureModel>(MixtureKind::kGaussian, dim, latents);
  if (name == "pmm")
    return std::make_unique<MixtureModel>(MixtureKind::kPoisson, dim, latents);
  throw ConfigError("unknown model: " + name);
}

std::vector<std::pair<std::string, DenseMatrix>> params_to_arrays(
    const ModelParams& params) {
  std::vector<std::pair<std::string, DenseMatrix>> out;
  auto scalar = [](double v) {
    DenseMatrix m(1, 1);
    m(0, 0) = v;
    return m;
  };
  auto rowvec = [](const std::vector<double>& v) {
    return DenseMatrix(1, v.size(), v);
  };
  if (const auto* p = std::get_if<LinearDiscreteParams>(&params)) {
    out.emplace_back("W", p->w);
    out.emplace_back("sigma2", scalar(p->sigma2));
    if (p->values.empty()) {
      out.emplace_back("pi", scalar(p->pi));
    } else {
      out.emplace_back("values", rowvec(p->values));
      out.emplace_back("probs", rowvec(p->probs));
    }
  } else if (const auto* p = std::get_if<GscParams>(&params)) {
    out.emplace_back("W", p->w);
    out.emplace_back("sigma2", scalar(p->sigma2));
    out.emplace_back("pi", scalar(p->pi));
    out.emplace_back("mu", rowvec(p->mu));
    out.emplace_back("psi", rowvec(p->psi));
  } else if (const auto* p = std::get_if<McaParams>(&params)) {
    out.emplace_back("W", p->w);
    out.emplace_back("sigma2", scalar(p->sigma2));
    out.emplace_back("pi", scalar(p->pi));
  } else if (const auto* p = std::get_if<MixtureParams>(&params)) {
    const bool gaussian = !p->sigma2.empty();
    out.emplace_back(gaussian ? "means" : "rates", p->centers);
    out.emplace_back("mix", rowvec(p->mix));
    if (gaussian) out.emplace_back("sigma2", rowvec(p->sigma2));
  }
  return out;
}

namespace {

const DenseMatrix& array_named(
    const std::vector<std::pair<std::string, DenseMatrix>>& arrays,
    const std::string& name) {
  for (const auto& [key, mat] : arrays)
    if (key == name) return mat;
  throw DataError("missing parameter array: " + name);
}

std::vector<double> as_vector(const DenseMatrix& m) {
  return std::vector<double>(m.data(), m.data() + m.size());
}

}  // namespace

ModelParams params_from_arrays(
    const std::string& model_name,
    const std::vector<std::pair<std::string, DenseMatrix>>& arrays) {
  if (model_name == "bsc" || model_name == "tsc" || model_name == "mca" ||
      model_name == "mmca" || model_name == "dsc") {
    if (model_name == "mca" || model_name == "mmca") {
      McaParams p;
      p.w = array_named(arrays, "W");
      p.sigma2 = array_named(arrays, "sigma2")(0, 0);
      p.pi = array_named(arrays, "pi")(0, 0);
      return p;
    }
    LinearDiscreteParams p;
    p.w = array_named(arrays, "W");
    p.sigma2 = array_named(arrays, "sigma2")(0, 0);
    if (model_name == "dsc") {
      p.values = as_vector(array_named(arrays, "values"));
      p.probs = as_vector(array_named(arrays, "probs"));
    } else {
      p.pi = array_named(arrays, "pi")(0, 0);
    }
    return p;
  }
  if (model_name == "gsc") {
    GscParams p;
    p.w = array_named(arrays, "W");
    p.sigma2 = array_named(arrays, "sigma2")(0, 0);
    p.pi = array_named(arrays, "pi")(0, 0);
    p.mu = as_vector(array_named(arrays, "mu"));
    p.psi = as_vector(array_named(arrays, "psi"));
    return p;
  }
  if (model_name == "gmm" || model_name == "pmm") {
    MixtureParams p;
    p.centers = array_named(arrays, model_name == "gmm" ? "means" : "rates");
    p.mix = as_vector(array_named(arrays, "mix"));
    if (model_name == "gmm") p.sigma2 = as_vector(array_named(arrays, "sigma2"));
    return p;
  }
  throw ConfigError("unknown model: " + model_name);
}

namespace detail {

std::vector<double> data_column_means(const DataSet& data) {
  const std::size_t n = data.size(), d = data.dim();
  std::vector<double> means(d, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const double* row = data.y.data() + i * d;
    for (std::size_t j = 0; j < d; ++j) means[j] += row[j];
  }
  for (double& m : means) m /= static_cast<double>(n);
  return means;
}

double data_mean_variance(const DataSet& data) {
  const std::size_t n = data.size(), d = data.dim();
  const std::vector<double> means = data_column_means(data);
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double* row = data.y.data() + i * d;
    for (std::size_t j = 0; j < d; ++j) {
      const double c = row[j] - means[j];
      acc += c * c;
    }
  }
  return acc / static_cast<double>(n * d);
}

DenseMatrix init_weights(const DataSet& data, std::uint32_t latents,
                         RngStream& rng, bool take_abs) {
  if (data.size() < 2)
    throw DataError("standard_init requires at least two data points");
  const std::size_t d = data.dim();
  const std::vector<double> means = data_column_means(data);
  const double var = data_mean_variance(data);
  if (var <= 0.0)
    std::cerr << "prsp: warning: zero-variance data, initializing without noise"
              << std::endl;
  const double std = var > 0.0 ? std::sqrt(var / latents) : 0.0;
  DenseMatrix w(d, latents);
  for (std::size_t i = 0; i < d; ++i)
    for (std::uint32_t h = 0; h < latents; ++h) {
      double v = means[i] + std * rng.normal();
      if (take_abs) v = std::max(std::abs(v), kMinMcaWeight);
      w(i, h) = v;
    }
  return w;
}

void add_column_scaled_noise(DenseMatrix& w, double noise_std, RngStream& rng) {
  const std::size_t d = w.rows(), h = w.cols();
  std::vector<double> rms(h, 0.0);
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t j = 0; j < h; ++j) rms[j] += w(i, j) * w(i, j);
  for (std::size_t j = 0; j < h; ++j)
    rms[j] = std::sqrt(rms[j] / static_cast<double>(d));
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t j = 0; j < h; ++j)
      w(i, j) += noise_std * rms[j] * rng.normal();
}

double clip(double x, double lo, double hi) {
  return std::min(std::max(x, lo), hi);
}

}  // namespace detail

}  // namespace prsp
