#pragma once

#include <functional>
#include <string>
#include <vector>

#include "lagan/config.hpp"
#include "lagan/oracle.hpp"
#include "lagan/training.hpp"

namespace lagan {

// Finite-space setup shared by the descent command and its tests: a random
// p_d on Z_N (seeded) and the cyclic group of order K.
struct FiniteProblem {
  FiniteDistribution pd;
  TransformationSet set;
};
FiniteProblem make_finite_problem(const RunConfig& cfg);
oracle::DescentOptions descent_options(const RunConfig& cfg, const FiniteProblem& problem);

// Runs exact descent and writes trajectory.csv (step,tv,tv_mixture,objective,
// grad_norm), summary.txt and config.txt into cfg.out_dir.
oracle::DescentResult cmd_descent(const RunConfig& cfg);
std::string trajectory_csv(const oracle::DescentResult& result);

struct SweepCell {
  std::string value;
  std::uint64_t seed = 0;
  std::string out_dir;
  bool ok = false;
  std::string error;
  double final_mmd = 0.0;
  std::optional<double> leaked_mass;
  double wall_seconds = 0.0;
};

struct SweepResult {
  std::string key;
  std::vector<SweepCell> cells;  // value-major, seed-minor
};

using CellRunner = std::function<RunReport(const RunConfig&)>;

// Runs base x {key = value} x seeds with up to `workers` cells in parallel.
// Each cell writes into base.out_dir/<key>=<value>/seed=<s>. A failing cell is
// recorded and the sweep continues. Writes runs.csv and sweep.csv into
// base.out_dir.
SweepResult cmd_sweep(const RunConfig& base, const std::string& key,
                      const std::vector<std::string>& values, const std::vector<std::uint64_t>& seeds,
                      std::size_t workers, const CellRunner& runner = cmd_train);

// One row per value: n, failures, MMD mean/sd/min/max, leaked-mass mean/sd.
std::string sweep_summary_csv(const SweepResult& result);
std::string sweep_runs_csv(const SweepResult& result);

}  // namespace lagan
