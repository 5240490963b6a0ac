#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "mfg/models.hpp"

namespace mfg {

// Fully determines a CLI run; identical configs (including seed) yield
// byte-identical artifacts.
struct RunConfig {
  std::string subcommand;  // certify | fixed-point | scan | oracle | closed-form

  // model assembly
  std::string model = "ising";  // ising | rotator | coarse
  double beta = 0.0;
  int p = 2;
  int q = 2;
  double t = 1.0;
  int circle_nodes = 128;
  int sphere_polar = 16;
  int sphere_azimuth = 32;
  std::string partition_file;
  std::string kernel;  // spin-flip | heat | coarse; empty = model default

  // conditioning
  double tau = 0.0;
  std::string nu_prime_file;
  int tau_grid = 101;

  // solver
  double tol = 1e-12;
  int max_iter = 100000;
  double damping = 1.0;
  int starts = 32;
  std::uint64_t seed = 0;
  double cluster_tol = 1e-8;
  int probe_count = 4096;

  // oracle
  std::vector<int> oracle_n = {100, 200, 400, 800, 1600};

  // closed-form
  std::string form_name;
  std::map<std::string, double> form_args;

  // optional side artifacts
  std::string dump_kernel_path;
  std::string dump_f_path;

  nlohmann::json to_json() const;
  static RunConfig from_json(const nlohmann::json& j);
  std::uint64_t hash() const;
};

struct RunResult {
  int exit_code = 0;
  std::string output;       // primary artifact (JSON or CSV)
  std::string diagnostics;  // structured JSON on error, else empty
};

// Executes the configured subcommand. Exit codes: 0 success, 2 invalid
// config, 3 scan found BAD points, 4 search incompleteness flagged,
// 5 numerical failure.
RunResult run(const RunConfig& config);

ModelPreset preset_from_config(const RunConfig& config);

}  // namespace mfg
