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

#ifndef PRSP_RUN_IO_HPP
#define PRSP_RUN_IO_HPP

#include <fstream>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "em.hpp"
#include "model.hpp"

namespace prsp {

// Everything needed to reproduce a training run bit for bit, minus the
// data file itself (identified by name and digest).
struct RunConfig {
  std::string model;
  std::uint32_t dim = 0;
  std::uint32_t latents = 0;
  std::uint32_t hprime = 0;
  std::uint32_t gamma = 0;
  std::vector<double> values;  // dsc alphabet
  std::size_t iterations = 0;
  std::uint64_t seed = 0;
  std::uint32_t workers = 1;
  std::uint32_t shards = 1;
  std::optional<double> tolerance;
  Schedule temperature = Schedule::constant(1.0);
  Schedule w_noise = Schedule::constant(0.0);
  std::string data_file;
  std::string data_sha256;
  std::size_t data_rows = 0;
  std::size_t data_cols = 0;

  std::unique_ptr<Model> make() const;
  TruncationConfig truncation() const {
    return TruncationConfig{latents, hprime, gamma};
  }
};

void write_manifest(const std::string& path, const RunConfig& config,
                    const std::vector<std::string>& parameter_files);
RunConfig read_manifest(const std::string& path);

// Streams the free-energy trace and keeps a rolling checkpoint of the
// parameters; on completion writes the final parameter arrays and the
// manifest. Checkpoints land every iteration while the parameters stay
// under a million floats, every tenth iteration beyond that.
class DirectoryLogger : public RunLogger {
 public:
  DirectoryLogger(std::string dir, RunConfig config);

  void on_iteration(std::size_t iteration, double free_energy, double seconds,
                    const ModelParams& params) override;
  void on_abort(std::size_t iteration, const ModelParams& params) override;
  void on_finished(const TrainResult& result) override;

  const std::string& dir() const { return dir_; }

 private:
  std::vector<std::string> write_params(const std::string& prefix,
                                        const ModelParams& params) const;

  std::string dir_;
  RunConfig config_;
  std::ofstream trace_;
};

struct TrainedRun {
  RunConfig config;
  std::unique_ptr<Model> model;
  ModelParams params;
};

TrainedRun load_run(const std::string& dir);

// High-level entry used by the C API and the command line: fills in the
// data identity fields, trains, and (when out_dir is non-empty) writes the
// run directory. `data_file` may be empty for in-memory data, in which
// case the payload bytes are digested instead.
TrainResult train_run(RunConfig& config, const DataSet& data,
                      const std::string& data_file, const std::string& out_dir);

}  // namespace prsp

#endif  // PRSP_RUN_IO_HPP
