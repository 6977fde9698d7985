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

// Command-line front end for the prsp library. Talks to the shared
// library exclusively through the C API in prsp.h.
//
// Exit codes: 0 success, 2 configuration error, 3 data error,
// 4 numerical abort.

#include <cstdio>
#include <memory>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "prsp.h"

namespace {

int status_to_exit(prsp_status st) {
  switch (st) {
    case PRSP_OK: return 0;
    case PRSP_ERR_CONFIG: return 2;
    case PRSP_ERR_DATA: return 3;
    case PRSP_ERR_NUMERIC: return 4;
    default: return 1;
  }
}

int fail(prsp_status st) {
  std::fprintf(stderr, "prsp: error: %s\n", prsp_last_error());
  return status_to_exit(st);
}

struct DatasetHandle {
  prsp_dataset* p = nullptr;
  ~DatasetHandle() { prsp_dataset_free(p); }
};
struct MatrixHandle {
  prsp_matrix* p = nullptr;
  ~MatrixHandle() { prsp_matrix_free(p); }
};
struct SessionHandle {
  prsp_session* p = nullptr;
  ~SessionHandle() { prsp_session_free(p); }
};
struct RunHandle {
  prsp_run* p = nullptr;
  ~RunHandle() { prsp_run_free(p); }
};

struct TrainArgs {
  std::string model, data, out;
  std::uint32_t latents = 0;
  std::uint32_t hprime = 0;
  std::uint32_t gamma = 0;
  std::uint64_t iterations = 0;
  std::uint64_t seed = 0;
  std::vector<double> values;
  double temp_max = 0.0;
  double temp_frac = 0.5;
  double w_noise = 0.0;
  double w_noise_end_frac = 0.5;
  std::uint32_t workers = 0;
  std::uint32_t shards = 0;
  double tol = -1.0;
};

int run_train(const TrainArgs& args, bool has_tol, bool has_temp,
              bool has_noise) {
  SessionHandle session;
  if (auto st = prsp_session_create(&session.p)) return fail(st);
  if (auto st = prsp_session_set_model(session.p, args.model.c_str()))
    return fail(st);
  if (auto st = prsp_session_set_latents(session.p, args.latents))
    return fail(st);
  const std::uint32_t hprime = args.hprime ? args.hprime : args.latents;
  const std::uint32_t gamma = args.gamma ? args.gamma : hprime;
  if (auto st = prsp_session_set_truncation(session.p, hprime, gamma))
    return fail(st);
  if (args.model == "dsc" && args.values.empty()) {
    std::fprintf(stderr, "prsp: error: --model dsc requires --values\n");
    return 2;
  }
  if (args.model != "dsc" && !args.values.empty()) {
    std::fprintf(stderr, "prsp: error: --values is only valid with --model dsc\n");
    return 2;
  }
  if (!args.values.empty()) {
    if (auto st = prsp_session_set_values(
            session.p, args.values.data(),
            static_cast<std::uint32_t>(args.values.size())))
      return fail(st);
  }
  if (auto st = prsp_session_set_iterations(session.p, args.iterations))
    return fail(st);
  if (auto st = prsp_session_set_seed(session.p, args.seed)) return fail(st);
  if (auto st = prsp_session_set_workers(session.p, args.workers))
    return fail(st);
  if (auto st = prsp_session_set_shards(session.p, args.shards))
    return fail(st);
  if (has_tol) {
    if (auto st = prsp_session_set_tolerance(session.p, args.tol))
      return fail(st);
  }
  if (has_temp) {
    const double pos[2] = {0.0, args.temp_frac};
    const double val[2] = {args.temp_max, 1.0};
    if (auto st = prsp_session_set_temperature(session.p, pos, val, 2))
      return fail(st);
  }
  if (has_noise) {
    const double pos[2] = {0.0, args.w_noise_end_frac};
    const double val[2] = {args.w_noise, 0.0};
    if (auto st = prsp_session_set_weight_noise(session.p, pos, val, 2))
      return fail(st);
  }

  DatasetHandle data;
  if (auto st = prsp_dataset_load(args.data.c_str(), &data.p)) return fail(st);

  prsp_result* result = nullptr;
  if (auto st = prsp_train(session.p, data.p, args.out.c_str(), &result))
    return fail(st);
  const std::uint64_t iterations = prsp_result_iterations(result);
  std::vector<double> trace(iterations);
  prsp_result_trace(result, trace.data());
  prsp_result_free(result);
  std::printf("trained %s for %llu iterations, final free energy %.6f\n",
              args.model.c_str(), static_cast<unsigned long long>(iterations),
              iterations ? trace.back() : 0.0);
  std::printf("run written to %s\n", args.out.c_str());
  return 0;
}

int run_infer(const std::string& run_dir, const std::string& data_path,
              const std::string& out_prefix, std::uint32_t workers) {
  RunHandle run;
  if (auto st = prsp_run_open(run_dir.c_str(), &run.p)) return fail(st);
  DatasetHandle data;
  if (auto st = prsp_dataset_load(data_path.c_str(), &data.p)) return fail(st);
  MatrixHandle s, p;
  if (auto st = prsp_infer(run.p, data.p, workers, &s.p, &p.p)) return fail(st);
  if (auto st = prsp_matrix_save(s.p, (out_prefix + ".s").c_str()))
    return fail(st);
  if (auto st = prsp_matrix_save(p.p, (out_prefix + ".p").c_str()))
    return fail(st);
  std::printf("wrote %s.s and %s.p\n", out_prefix.c_str(), out_prefix.c_str());
  return 0;
}

int run_generate(const std::string& run_dir, std::uint64_t n,
                 std::uint64_t seed, const std::string& out_path) {
  RunHandle run;
  if (auto st = prsp_run_open(run_dir.c_str(), &run.p)) return fail(st);
  DatasetHandle data;
  if (auto st = prsp_generate(run.p, n, seed, &data.p)) return fail(st);
  if (auto st = prsp_dataset_save(data.p, out_path.c_str())) return fail(st);
  std::printf("wrote %llu samples from %s to %s\n",
              static_cast<unsigned long long>(n), prsp_run_model(run.p),
              out_path.c_str());
  return 0;
}

int run_bars(std::uint32_t size, std::uint64_t n, double prob, double amplitude,
             double noise, const std::string& mode, std::uint64_t seed,
             const std::string& out_path, const std::string& truth_path) {
  DatasetHandle data;
  MatrixHandle truth;
  if (auto st = prsp_bars_generate(size, n, prob, amplitude, noise,
                                   mode.c_str(), seed, &data.p,
                                   truth_path.empty() ? nullptr : &truth.p))
    return fail(st);
  if (auto st = prsp_dataset_save(data.p, out_path.c_str())) return fail(st);
  if (!truth_path.empty()) {
    if (auto st = prsp_matrix_save(truth.p, truth_path.c_str()))
      return fail(st);
  }
  std::printf("wrote %llu bars images (%ux%u, %s) to %s\n",
              static_cast<unsigned long long>(n), size, size, mode.c_str(),
              out_path.c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"prsp: probabilistic sparse coding and dictionary learning"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(prsp_version()));

  // train
  TrainArgs t;
  auto* train = app.add_subcommand("train", "fit a model to a dataset");
  train->add_option("--model", t.model, "one of: bsc tsc dsc gsc mca mmca gmm pmm")
      ->required();
  train->add_option("--data", t.data, "dataset (PRSPAR01 array or CSV)")
      ->required();
  train->add_option("--latents", t.latents, "latent dimension H")->required();
  train->add_option("--hprime", t.hprime, "candidate units per data point");
  train->add_option("--gamma", t.gamma, "max active units in enumerated states");
  train->add_option("--iterations", t.iterations, "EM iteration budget")
      ->required();
  train->add_option("--seed", t.seed, "random seed")->required();
  train->add_option("--out", t.out, "output run directory")->required();
  train->add_option("--values", t.values, "dsc value alphabet (CSV list)")
      ->delimiter(',');
  auto* temp_max =
      train->add_option("--temp-max", t.temp_max, "initial posterior temperature");
  train->add_option("--temp-frac", t.temp_frac,
                    "fraction of the budget for temperature decay");
  auto* w_noise =
      train->add_option("--w-noise", t.w_noise, "initial weight-noise magnitude");
  train->add_option("--w-noise-end-frac", t.w_noise_end_frac,
                    "fraction of the budget for noise decay");
  train->add_option("--workers", t.workers, "worker threads (0 = logical CPUs)");
  train->add_option("--shards", t.shards, "reduction shards (0 = workers)");
  auto* tol = train->add_option("--tol", t.tol, "early-stop tolerance");

  // infer
  std::string i_run, i_data, i_out;
  std::uint32_t i_workers = 0;
  auto* infer = app.add_subcommand("infer", "posterior readout for a dataset");
  infer->add_option("--run", i_run, "trained run directory")->required();
  infer->add_option("--data", i_data, "dataset")->required();
  infer->add_option("--out", i_out, "output prefix (writes .s and .p)")
      ->required();
  infer->add_option("--workers", i_workers, "worker threads (0 = logical CPUs)");

  // generate
  std::string g_run, g_out;
  std::uint64_t g_n = 0, g_seed = 0;
  auto* generate = app.add_subcommand("generate", "sample from a trained model");
  generate->add_option("--run", g_run, "trained run directory")->required();
  generate->add_option("--n", g_n, "number of samples")->required();
  generate->add_option("--seed", g_seed, "random seed")->required();
  generate->add_option("--out", g_out, "output array file")->required();

  // bars
  std::uint32_t b_size = 5;
  std::uint64_t b_n = 0, b_seed = 0;
  double b_prob = 0.0, b_amplitude = 10.0, b_noise = 2.0;
  std::string b_mode = "linear", b_out, b_truth;
  auto* bars = app.add_subcommand("bars", "synthetic bars benchmark data");
  bars->add_option("--size", b_size, "grid side length R (D = R^2)");
  bars->add_option("--n", b_n, "number of images")->required();
  bars->add_option("--prob", b_prob, "per-bar activation probability");
  bars->add_option("--amplitude", b_amplitude, "bar amplitude");
  bars->add_option("--noise", b_noise, "additive noise std");
  bars->add_option("--mode", b_mode, "linear or max")
      ->check(CLI::IsMember({"linear", "max"}));
  bars->add_option("--seed", b_seed, "random seed");
  bars->add_option("--out", b_out, "output array file")->required();
  bars->add_option("--truth", b_truth, "ground-truth dictionary output");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  if (train->parsed())
    return run_train(t, tol->count() > 0, temp_max->count() > 0,
                     w_noise->count() > 0);
  if (infer->parsed()) return run_infer(i_run, i_data, i_out, i_workers);
  if (generate->parsed()) return run_generate(g_run, g_n, g_seed, g_out);
  if (bars->parsed())
    return run_bars(b_size, b_n, b_prob, b_amplitude, b_noise, b_mode, b_seed,
                    b_out, b_truth);
  return 2;
}
