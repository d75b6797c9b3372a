#pragma once

#include <optional>
#include <vector>

#include "ncdmp/costmodel.hpp"
#include "ncdmp/ncd.hpp"

namespace ncdmp {

enum class Algorithm { kms, alg1, alg2 };

const char* name_of(Algorithm a);
Algorithm algorithm_by_name(const std::string& name);

struct BlockVector {
  BlockPartition partition;
  std::vector<double> values;

  BlockVector() = default;
  explicit BlockVector(const BlockPartition& p) : partition(p), values(p.n, 0.0) {}

  double* block(int i) { return values.data() + partition.offsets[i]; }
  const double* block(int i) const { return values.data() + partition.offsets[i]; }
  int block_size(int i) const { return partition.sizes[i]; }
  double block_norm_1(int i) const;
};

enum class Step3Mode { full_precision, mixed };

struct SolverOptions {
  double outer_tol = 1e-10;
  int max_outer = 100;
  double ir_theta = 1e-2;   // precision-selection threshold
  int ir_max_steps = 50;
  int ri_k0 = 10;
  double ri_growth = 2.0;
  Precision ri_precision = Precision::fp32;
  // Defaults to mixed for alg1 and full precision otherwise.
  std::optional<Step3Mode> step3_mode;
  // Starting point; uniform when absent.
  std::optional<std::vector<double>> initial;
  // Optional ground truth; when present each iteration records its
  // 1-norm error against it (diagnostic only, never used by the solver).
  std::optional<std::vector<double>> reference;
};

struct IterationRecord {
  double residual_1 = 0.0;     // ||pi - pi P||_1 after the iteration
  double step_change_1 = 0.0;  // ||pi_t - pi_{t-1}||_1
  std::vector<int> inner_steps;      // per block (alg1) or single entry (alg2)
  std::vector<Precision> levels;     // Step-5 solve level per block
  size_t ledger_begin = 0;           // slice of the ledger spent this iteration
  size_t ledger_end = 0;
  double error_1 = -1.0;  // vs. reference, when provided
};

struct SolveResult {
  BlockVector pi;
  int outer_iterations = 0;
  bool converged = false;
  std::vector<IterationRecord> trace;
  std::vector<Precision> step5_levels;  // final per-block levels
  long long inner_steps_total = 0;
};

// --- outer-loop building blocks ---

BlockVector normalize_blocks(const BlockVector& pi);

/// R_ij = pihat_i * (P_ij 1) per the Step-2 definition; row-stochastic.
DenseMatrix build_aggregation_matrix(const BlockVector& pi_hat, const NcdChain& chain);

/// Stationary vector of the aggregated chain via the row-replacement
/// system; mixed mode solves it with select_precision + refinement.
std::vector<double> solve_aggregated(const DenseMatrix& R, Step3Mode mode,
                                     const SolverOptions& opts);

BlockVector hadamard_coupling(const std::vector<double>& s, const BlockVector& pi_hat);

/// Full-precision Step 5: the m coupled systems solved in the order
/// i = m..1 with fp64 LU of (I - P_ii)'.
BlockVector kms_step5_full(const NcdChain& chain, const BlockVector& z,
                           const BlockVector& pi_prev);

/// Cheapest level whose unit roundoff keeps u * kappa * ||A||_1 below
/// theta, probing with an fp32 factorization; fp64 as fallback.
Precision select_precision(const DenseMatrix& A, double theta);

struct IrResult {
  std::vector<double> x;
  int steps = 0;
  bool converged = false;
};

IrResult iterative_refinement(const DenseMatrix& A, const LuFactors& f_reduced,
                              const std::vector<double>& b, double tol, int max_steps);

struct RiResult {
  std::vector<double> x;
  int steps = 0;
};

/// Preconditioned Richardson on the transposed global Step-5 system,
/// from x0 = 0, with blockwise reduced-precision back-solves as M^{-1}.
RiResult richardson_precond(const NcdChain& chain, const std::vector<double>& rhs,
                            int k_max, double inner_tol,
                            const std::vector<LuFactors>& precond);

int kt_schedule(int t, const SolverOptions& opts);
double inner_tolerance(int t, double chain_epsilon);

SolveResult solve(const NcdChain& chain, Algorithm algorithm, const SolverOptions& opts,
                  CostLedger& ledger);

}  // namespace ncdmp
