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

#include "run_io.hpp"

#include <filesystem>

#include <json.hpp>

#include "array_io.hpp"
#include "sha256.hpp"

namespace prsp {

namespace fs = std::filesystem;
using ordered_json = nlohmann::ordered_json;

namespace {

ordered_json schedule_to_json(const Schedule& s) {
  ordered_json anchors = ordered_json::array();
  for (const auto& [pos, value] : s.anchors())
    anchors.push_back({pos, value});
  return anchors;
}

Schedule schedule_from_json(const ordered_json& j) {
  std::vector<std::pair<double, double>> anchors;
  for (const auto& a : j) anchors.emplace_back(a.at(0), a.at(1));
  return Schedule(std::move(anchors));
}

}  // namespace

std::unique_ptr<Model> RunConfig::make() const {
  if (model_uses_truncation(model))
    return make_model(model, dim, latents, truncation(), values);
  return make_model(model, dim, latents,
                    TruncationConfig{latents, latents, latents}, values);
}

void write_manifest(const std::string& path, const RunConfig& config,
                    const std::vector<std::string>& parameter_files) {
  ordered_json j;
  j["format"] = "prsp-manifest-1";
  j["library"] = kLibraryVersion;
  j["rng"] = RngStream::kAlgorithm;
  j["model"] = config.model;
  j["dim"] = config.dim;
  j["latents"] = config.latents;
  if (model_uses_truncation(config.model)) {
    j["hprime"] = config.hprime;
    j["gamma"] = config.gamma;
  }
  if (config.model == "dsc") j["values"] = config.values;
  j["iterations"] = config.iterations;
  j["seed"] = config.seed;
  j["workers"] = config.workers;
  j["shards"] = config.shards;
  if (config.tolerance)
    j["tolerance"] = *config.tolerance;
  else
    j["tolerance"] = nullptr;
  j["temperature"] = schedule_to_json(config.temperature);
  j["w_noise"] = schedule_to_json(config.w_noise);
  j["data"] = {{"file", config.data_file},
               {"sha256", config.data_sha256},
               {"rows", config.data_rows},
               {"cols", config.data_cols}};
  j["parameters"] = parameter_files;

  std::ofstream out(path, std::ios::trunc);
  if (!out) throw DataError("cannot write file: " + path);
  out << j.dump(2) << '\n';
  if (!out) throw DataError("write failed: " + path);
}

RunConfig read_manifest(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open manifest: " + path);
  ordered_json j;
  try {
    in >> j;
  } catch (const std::exception& e) {
    throw DataError(path + ": malformed manifest: " + e.what());
  }
  if (j.value("format", "") != std::string("prsp-manifest-1"))
    throw DataError(path + ": unknown manifest format");

  RunConfig config;
  config.model = j.at("model").get<std::string>();
  config.dim = j.at("dim").get<std::uint32_t>();
  config.latents = j.at("latents").get<std::uint32_t>();
  config.hprime = j.value("hprime", config.latents);
  config.gamma = j.value("gamma", config.hprime);
  if (j.contains("values"))
    config.values = j.at("values").get<std::vector<double>>();
  config.iterations = j.at("iterations").get<std::size_t>();
  config.seed = j.at("seed").get<std::uint64_t>();
  config.workers = j.at("workers").get<std::uint32_t>();
  config.shards = j.at("shards").get<std::uint32_t>();
  if (!j.at("tolerance").is_null())
    config.tolerance = j.at("tolerance").get<double>();
  config.temperature = schedule_from_json(j.at("temperature"));
  config.w_noise = schedule_from_json(j.at("w_noise"));
  const auto& data = j.at("data");
  config.data_file = data.at("file").get<std::string>();
  config.data_sha256 = data.at("sha256").get<std::string>();
  config.data_rows = data.at("rows").get<std::size_t>();
  config.data_cols = data.at("cols").get<std::size_t>();
  return config;
}

DirectoryLogger::DirectoryLogger(std::string dir, RunConfig config)
    : dir_(std::move(dir)), config_(std::move(config)) {
  fs::create_directories(dir_);
  trace_.open(fs::path(dir_) / "free_energy.csv", std::ios::trunc);
  if (!trace_) throw DataError("cannot write trace in " + dir_);
  trace_ << "iteration,free_energy,seconds\n";
  trace_.flush();
}

std::vector<std::string> DirectoryLogger::write_params(
    const std::string& prefix, const ModelParams& params) const {
  std::vector<std::string> files;
  for (const auto& [name, mat] : params_to_arrays(params)) {
    const std::string file = prefix + "_" + name + ".prsp";
    save_array((fs::path(dir_) / file).string(), mat);
    files.push_back(file);
  }
  return files;
}

void DirectoryLogger::on_iteration(std::size_t iteration, double free_energy,
                                   double seconds, const ModelParams& params) {
  trace_ << iteration << ',' << format_double(free_energy) << ','
         << format_double(seconds) << '\n';
  trace_.flush();
  const std::size_t cadence = param_float_count(params) < 1000000 ? 1 : 10;
  if (iteration % cadence == 0) write_params("checkpoint", params);
}

void DirectoryLogger::on_abort(std::size_t, const ModelParams& params) {
  write_params("abort", params);
}

void DirectoryLogger::on_finished(const TrainResult& result) {
  const auto files = write_params("final", result.final_params);
  write_manifest((fs::path(dir_) / "manifest.json").string(), config_, files);
}

TrainedRun load_run(const std::string& dir) {
  const std::string manifest_path = (fs::path(dir) / "manifest.json").string();
  std::ifstream in(manifest_path);
  if (!in) throw DataError("cannot open manifest: " + manifest_path);
  ordered_json j;
  try {
    in >> j;
  } catch (const std::exception& e) {
    throw DataError(manifest_path + ": malformed manifest: " + e.what());
  }
  in.close();

  TrainedRun run;
  run.config = read_manifest(manifest_path);
  run.model = run.config.make();

  // Final parameter files are named final_<array>.prsp.
  std::vector<std::pair<std::string, DenseMatrix>> arrays;
  for (const auto& file : j.at("parameters").get<std::vector<std::string>>()) {
    constexpr std::string_view prefix = "final_";
    constexpr std::string_view suffix = ".prsp";
    if (file.size() <= prefix.size() + suffix.size() ||
        file.compare(0, prefix.size(), prefix) != 0)
      throw DataError(dir + ": unexpected parameter file name " + file);
    const std::string name =
        file.substr(prefix.size(), file.size() - prefix.size() - suffix.size());
    arrays.emplace_back(name, load_array((fs::path(dir) / file).string()));
  }
  run.params = params_from_arrays(run.config.model, arrays);
  run.model->validate(run.params, nullptr);
  return run;
}

TrainResult train_run(RunConfig& config, const DataSet& data,
                      const std::string& data_file,
                      const std::string& out_dir) {
  config.dim = static_cast<std::uint32_t>(data.dim());
  config.data_rows = data.size();
  config.data_cols = data.dim();
  if (!data_file.empty()) {
    config.data_file = data_file;
    config.data_sha256 = sha256_hex_file(data_file);
  } else {
    config.data_file = "(memory)";
    config.data_sha256 = sha256_hex(
        {reinterpret_cast<const std::uint8_t*>(data.y.data()),
         data.y.size() * sizeof(double)});
  }

  auto model = config.make();
  RngStream init_rng = RngStream::derived(config.seed, 0x696e6974);
  ModelParams params = model->standard_init(data, init_rng);

  LinearAnnealing annealing(config.iterations, config.temperature,
                            config.w_noise);
  ShardPlan plan =
      ShardPlan::with_shards(data.size(), config.shards, config.workers);
  TrainOptions options;
  options.tol = config.tolerance;
  options.noise_seed = config.seed;

  if (out_dir.empty())
    return run(*model, std::move(params), data, annealing, plan, nullptr,
               options);
  DirectoryLogger logger(out_dir, config);
  return run(*model, std::move(params), data, annealing, plan, &logger,
             options);
}

}  // namespace prsp
