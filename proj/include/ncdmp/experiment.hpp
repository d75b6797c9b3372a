#pragma once

#include <string>
#include <vector>

#include "ncdmp/costmodel.hpp"
#include "ncdmp/ncd.hpp"
#include "ncdmp/solvers.hpp"

namespace ncdmp {

enum class SweepVariable { none, m, block_size, epsilon };

const char* name_of(SweepVariable v);
SweepVariable sweep_variable_by_name(const std::string& name);

struct ExperimentConfig {
  SweepVariable sweep_variable = SweepVariable::none;
  std::vector<double> sweep_values;
  // Fixed instance shape; the swept field is overridden per sweep value.
  int m = 2;
  int block_size = 20;
  double epsilon = 0.1;
  int trials = 10;
  uint64_t seed_base = 1;
  std::vector<Algorithm> algorithms = {Algorithm::kms, Algorithm::alg1, Algorithm::alg2};
  GpuSpec gpu = h100_spec();
  // When nonempty the diagonal blocks are read from these Matrix Market
  // files instead of being generated.
  std::vector<std::string> block_files;
  std::string output;  // CSV path; empty keeps results in memory only
  SolverOptions solver;
};

struct RowResult {
  double sweep_value = 0.0;
  int trial = 0;
  Algorithm algorithm = Algorithm::kms;
  int outer_iters = 0;
  bool converged = false;
  double residual_1norm = 0.0;
  SimulatedTime time;
  std::string precision_step5;
  long long inner_iters_total = 0;
  std::string status = "ok";
};

struct ExperimentResult {
  std::vector<RowResult> rows;
  bool all_ok = true;
  std::string csv;          // full data table, one row per (value, trial, algorithm)
  std::string summary_csv;  // per-sweep-value means and speedups
};

/// Runs the configured sweep deterministically and, when an output path
/// is set, writes both the data CSV and a companion summary CSV.
ExperimentResult run_experiment(const ExperimentConfig& config);

/// Re-derives the summary table from a data CSV written by run_experiment.
std::string report(const std::string& csv_path);

std::string summary_path_for(const std::string& csv_path);

void save_chain(const NcdChain& chain, const std::string& path);
NcdChain load_chain(const std::string& path);

/// "h100" or a path to a spec file with keys name, fp64, fp32, fp16,
/// bf16, bandwidth, memory.
GpuSpec load_gpu_spec(const std::string& name_or_path);

/// Shortest-round-trip decimal rendering used for every CSV number.
std::string format_double(double v);

}  // namespace ncdmp
