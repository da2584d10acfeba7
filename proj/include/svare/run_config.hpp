#pragma once

#include <cstdint>
#include <string>

#include "svare/dataset.hpp"
#include "svare/simulate.hpp"

namespace svare {

// Fully resolved run settings: the structured config file with command-line
// overrides already applied. The CLI echoes the resolved form into the
// output directory so any run can be reproduced from its artifacts.
struct RunConfig {
  // [data]
  std::string data_path;
  std::string time_col = "time";
  std::string response_col = "price";
  bool log10_transform = true;

  // [coding]
  CodingPlan coding;

  // [fit]
  std::string model = "svare";  // fe | are | svare
  int n_u = 0;                  // 0 = automatic
  int n_h = 0;
  double grid_mult = 3.0;
  int ma_window = 3;
  int max_iters = 500;
  double grad_tol = 1e-5;
  double f_rel_tol = 1e-9;

  // [diagnose]
  int lags = 10;
  int permutations = 199;
  std::string index_base;  // empty = first period
  bool index_base10 = false;

  // [simulate]
  bool has_sim = false;
  SimConfig sim;

  // common
  std::string out_dir = ".";
  std::uint64_t seed = 0;
  bool seed_set = false;
  int threads = 1;
  std::string holdout;  // "", "last", or "random:N"
};

// Parse the JSON config file; unknown keys are an error so typos surface.
// Throws std::runtime_error with a one-line diagnostic on any problem.
RunConfig load_config(const std::string& path);

// Resolved-config echo, suitable for reloading with load_config.
std::string config_to_json(const RunConfig& cfg);

}  // namespace svare
