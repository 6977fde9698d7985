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

#include "prsp.h"

#include <cstring>
#include <thread>

#include "array_io.hpp"
#include "bars.hpp"
#include "core.hpp"
#include "em.hpp"
#include "model.hpp"
#include "run_io.hpp"

struct prsp_dataset {
  prsp::DataSet data;
  std::string source_path;  // empty for in-memory data
};

struct prsp_matrix {
  prsp::DenseMatrix m;
};

struct prsp_session {
  std::string model;
  std::uint32_t latents = 0;
  std::uint32_t hprime = 0;  // 0 = latents
  std::uint32_t gamma = 0;   // 0 = hprime
  std::vector<double> values;
  std::size_t iterations = 0;
  std::uint64_t seed = 0;
  std::uint32_t workers = 0;  // 0 = logical CPUs
  std::uint32_t shards = 0;   // 0 = workers
  double tolerance = -1.0;
  prsp::Schedule temperature = prsp::Schedule::constant(1.0);
  prsp::Schedule w_noise = prsp::Schedule::constant(0.0);
};

struct prsp_result {
  prsp::TrainResult result;
};

struct prsp_run {
  prsp::TrainedRun run;
};

namespace {

thread_local std::string g_last_error;

template <class Fn>
prsp_status guarded(Fn&& fn) {
  try {
    fn();
    g_last_error.clear();
    return PRSP_OK;
  } catch (const prsp::ConfigError& e) {
    g_last_error = e.what();
    return PRSP_ERR_CONFIG;
  } catch (const prsp::DataError& e) {
    g_last_error = e.what();
    return PRSP_ERR_DATA;
  } catch (const prsp::NumericError& e) {
    g_last_error = e.what();
    return PRSP_ERR_NUMERIC;
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return PRSP_ERR_INTERNAL;
  }
}

prsp_status require(bool ok, const char* message) {
  if (ok) return PRSP_OK;
  g_last_error = message;
  return PRSP_ERR_CONFIG;
}

std::uint32_t effective_workers(std::uint32_t requested) {
  if (requested > 0) return requested;
  const unsigned hw = std::thread::hardware_concurrency();
  return hw > 0 ? hw : 1;
}

prsp::Schedule make_schedule(const double* positions, const double* values,
                             std::uint32_t count) {
  std::vector<std::pair<double, double>> anchors;
  anchors.reserve(count);
  for (std::uint32_t i = 0; i < count; ++i)
    anchors.emplace_back(positions[i], values[i]);
  return prsp::Schedule(std::move(anchors));
}

prsp::RunConfig session_config(const prsp_session& s, const prsp_dataset& data) {
  if (s.model.empty()) throw prsp::ConfigError("session: model not set");
  if (s.latents == 0) throw prsp::ConfigError("session: latents not set");
  if (s.iterations == 0) throw prsp::ConfigError("session: iterations not set");
  prsp::RunConfig config;
  config.model = s.model;
  config.dim = static_cast<std::uint32_t>(data.data.dim());
  config.latents = s.latents;
  config.hprime = s.hprime == 0 ? s.latents : s.hprime;
  config.gamma = s.gamma == 0 ? config.hprime : s.gamma;
  config.values = s.values;
  config.iterations = s.iterations;
  config.seed = s.seed;
  config.workers = effective_workers(s.workers);
  config.shards = s.shards == 0 ? config.workers : s.shards;
  if (s.tolerance >= 0.0) config.tolerance = s.tolerance;
  config.temperature = s.temperature;
  config.w_noise = s.w_noise;
  return config;
}

}  // namespace

extern "C" {

const char* prsp_version(void) { return prsp::kLibraryVersion; }

const char* prsp_last_error(void) { return g_last_error.c_str(); }

/* ---- datasets ------------------------------------------------------- */

prsp_status prsp_dataset_load(const char* path, prsp_dataset** out) {
  if (auto st = require(path && out, "null argument")) return st;
  return guarded([&] {
    auto ds = std::make_unique<prsp_dataset>();
    ds->data = prsp::load_dataset(path);
    ds->source_path = path;
    *out = ds.release();
  });
}

prsp_status prsp_dataset_create(uint64_t rows, uint64_t cols,
                                const double* row_major, prsp_dataset** out) {
  if (auto st = require(row_major && out, "null argument")) return st;
  if (auto st = require(rows > 0 && cols > 0, "empty dataset")) return st;
  return guarded([&] {
    auto ds = std::make_unique<prsp_dataset>();
    prsp::DenseMatrix m(rows, cols,
                        std::vector<double>(row_major, row_major + rows * cols));
    ds->data = prsp::DataSet::wrap(std::move(m));
    *out = ds.release();
  });
}

prsp_status prsp_dataset_save(const prsp_dataset* data, const char* path) {
  if (auto st = require(data && path, "null argument")) return st;
  return guarded([&] { prsp::save_dataset(path, data->data); });
}

uint64_t prsp_dataset_rows(const prsp_dataset* data) {
  return data ? data->data.size() : 0;
}

uint64_t prsp_dataset_cols(const prsp_dataset* data) {
  return data ? data->data.dim() : 0;
}

const double* prsp_dataset_data(const prsp_dataset* data) {
  return data ? data->data.y.data() : nullptr;
}

void prsp_dataset_free(prsp_dataset* data) { delete data; }

/* ---- matrices ------------------------------------------------------- */

prsp_status prsp_matrix_load(const char* path, prsp_matrix** out) {
  if (auto st = require(path && out, "null argument")) return st;
  return guarded([&] {
    auto m = std::make_unique<prsp_matrix>();
    m->m = prsp::load_array(path);
    *out = m.release();
  });
}

prsp_status prsp_matrix_save(const prsp_matrix* m, const char* path) {
  if (auto st = require(m && path, "null argument")) return st;
  return guarded([&] { prsp::save_array(path, m->m); });
}

uint64_t prsp_matrix_rows(const prsp_matrix* m) { return m ? m->m.rows() : 0; }

uint64_t prsp_matrix_cols(const prsp_matrix* m) { return m ? m->m.cols() : 0; }

const double* prsp_matrix_data(const prsp_matrix* m) {
  return m ? m->m.data() : nullptr;
}

void prsp_matrix_free(prsp_matrix* m) { delete m; }

/* ---- bars ----------------------------------------------------------- */

prsp_status prsp_bars_generate(uint32_t size, uint64_t n, double prob,
                               double amplitude, double noise,
                               const char* mode, uint64_t seed,
                               prsp_dataset** data_out,
                               prsp_matrix** truth_out) {
  if (auto st = require(mode && data_out, "null argument")) return st;
  const bool linear = std::strcmp(mode, "linear") == 0;
  const bool maxmode = std::strcmp(mode, "max") == 0;
  if (auto st = require(linear || maxmode, "bars: mode must be linear or max"))
    return st;
  return guarded([&] {
    prsp::BarsSpec spec;
    spec.size = size;
    spec.n = n;
    spec.prob = prob;
    spec.amplitude = amplitude;
    spec.noise = noise;
    spec.max_mode = maxmode;
    spec.seed = seed;
    prsp::BarsData bars = prsp::make_bars(spec);
    auto ds = std::make_unique<prsp_dataset>();
    ds->data = std::move(bars.data);
    if (truth_out) {
      auto truth = std::make_unique<prsp_matrix>();
      truth->m = std::move(bars.truth);
      *truth_out = truth.release();
    }
    *data_out = ds.release();
  });
}

/* ---- training ------------------------------------------------------- */

prsp_status prsp_session_create(prsp_session** out) {
  if (auto st = require(out != nullptr, "null argument")) return st;
  return guarded([&] { *out = new prsp_session(); });
}

void prsp_session_free(prsp_session* s) { delete s; }

prsp_status prsp_session_set_model(prsp_session* s, const char* name) {
  if (auto st = require(s && name, "null argument")) return st;
  return guarded([&] {
    const auto& names = prsp::model_names();
    if (std::find(names.begin(), names.end(), name) == names.end())
      throw prsp::ConfigError(std::string("unknown model: ") + name);
    s->model = name;
  });
}

prsp_status prsp_session_set_latents(prsp_session* s, uint32_t latents) {
  if (auto st = require(s != nullptr, "null argument")) return st;
  if (auto st = require(latents > 0, "latents must be >= 1")) return st;
  s->latents = latents;
  return PRSP_OK;
}

prsp_status prsp_session_set_truncation(prsp_session* s, uint32_t hprime,
                                        uint32_t gamma) {
  if (auto st = require(s != nullptr, "null argument")) return st;
  s->hprime = hprime;
  s->gamma = gamma;
  return PRSP_OK;
}

prsp_status prsp_session_set_values(prsp_session* s, const double* values,
                                    uint32_t count) {
  if (auto st = require(s && values, "null argument")) return st;
  s->values.assign(values, values + count);
  return PRSP_OK;
}

prsp_status prsp_session_set_iterations(prsp_session* s, uint64_t iterations) {
  if (auto st = require(s != nullptr, "null argument")) return st;
  if (auto st = require(iterations > 0, "iterations must be >= 1")) return st;
  s->iterations = iterations;
  return PRSP_OK;
}

prsp_status prsp_session_set_seed(prsp_session* s, uint64_t seed) {
  if (auto st = require(s != nullptr, "null argument")) return st;
  s->seed = seed;
  return PRSP_OK;
}

prsp_status prsp_session_set_workers(prsp_session* s, uint32_t workers) {
  if (auto st = require(s != nullptr, "null argument")) return st;
  s->workers = workers;
  return PRSP_OK;
}

prsp_status prsp_session_set_shards(prsp_session* s, uint32_t shards) {
  if (auto st = require(s != nullptr, "null argument")) return st;
  s->shards = shards;
  return PRSP_OK;
}

prsp_status prsp_session_set_tolerance(prsp_session* s, double tol) {
  if (auto st = require(s != nullptr, "null argument")) return st;
  s->tolerance = tol;
  return PRSP_OK;
}

prsp_status prsp_session_set_temperature(prsp_session* s,
                                         const double* positions,
                                         const double* values,
                                         uint32_t count) {
  if (auto st = require(s && positions && values && count > 0, "null argument"))
    return st;
  return guarded([&] { s->temperature = make_schedule(positions, values, count); });
}

prsp_status prsp_session_set_weight_noise(prsp_session* s,
                                          const double* positions,
                                          const double* values,
                                          uint32_t count) {
  if (auto st = require(s && positions && values && count > 0, "null argument"))
    return st;
  return guarded([&] { s->w_noise = make_schedule(positions, values, count); });
}

prsp_status prsp_train(prsp_session* s, const prsp_dataset* data,
                       const char* out_dir, prsp_result** out) {
  if (auto st = require(s && data, "null argument")) return st;
  return guarded([&] {
    prsp::RunConfig config = session_config(*s, *data);
    prsp::TrainResult result =
        prsp::train_run(config, data->data, data->source_path,
                        out_dir ? out_dir : "");
    if (out) {
      auto r = std::make_unique<prsp_result>();
      r->result = std::move(result);
      *out = r.release();
    }
  });
}

uint64_t prsp_result_iterations(const prsp_result* r) {
  return r ? r->result.iterations_run : 0;
}

prsp_status prsp_result_trace(const prsp_result* r, double* free_energy) {
  if (auto st = require(r && free_energy, "null argument")) return st;
  std::copy(r->result.free_energy_trace.begin(),
            r->result.free_energy_trace.end(), free_energy);
  return PRSP_OK;
}

prsp_status prsp_result_param(const prsp_result* r, const char* name,
                              prsp_matrix** out) {
  if (auto st = require(r && name && out, "null argument")) return st;
  return guarded([&] {
    for (const auto& [key, mat] : prsp::params_to_arrays(r->result.final_params)) {
      if (key == name) {
        auto m = std::make_unique<prsp_matrix>();
        m->m = mat;
        *out = m.release();
        return;
      }
    }
    throw prsp::ConfigError(std::string("no parameter named ") + name);
  });
}

void prsp_result_free(prsp_result* r) { delete r; }

/* ---- trained runs --------------------------------------------------- */

prsp_status prsp_run_open(const char* dir, prsp_run** out) {
  if (auto st = require(dir && out, "null argument")) return st;
  return guarded([&] {
    auto run = std::make_unique<prsp_run>();
    run->run = prsp::load_run(dir);
    *out = run.release();
  });
}

const char* prsp_run_model(const prsp_run* run) {
  return run ? run->run.config.model.c_str() : "";
}

void prsp_run_free(prsp_run* run) { delete run; }

prsp_status prsp_infer(const prsp_run* run, const prsp_dataset* data,
                       uint32_t workers, prsp_matrix** s_out,
                       prsp_matrix** p_out) {
  if (auto st = require(run && data && s_out && p_out, "null argument"))
    return st;
  return guarded([&] {
    const prsp::ShardPlan plan = prsp::ShardPlan::over(
        data->data.size(), effective_workers(workers));
    prsp::InferenceResult res =
        run->run.model->inference(run->run.params, data->data, plan);
    auto s = std::make_unique<prsp_matrix>();
    s->m = std::move(res.map_states);
    auto p = std::make_unique<prsp_matrix>();
    const std::size_t n = res.map_mass.size();
    p->m = prsp::DenseMatrix(n, 1, std::move(res.map_mass));
    *s_out = s.release();
    *p_out = p.release();
  });
}

prsp_status prsp_generate(const prsp_run* run, uint64_t n, uint64_t seed,
                          prsp_dataset** out) {
  if (auto st = require(run && out, "null argument")) return st;
  if (auto st = require(n > 0, "generate: n must be >= 1")) return st;
  return guarded([&] {
    prsp::RngStream rng(seed);
    auto ds = std::make_unique<prsp_dataset>();
    ds->data = run->run.model->generate(run->run.params, n, rng);
    *out = ds.release();
  });
}

} /* extern "C" */
