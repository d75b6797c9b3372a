#pragma once

#include <utility>
#include <vector>

#include "ncdmp/precision.hpp"

namespace ncdmp {

/// Row-major dense matrix of native doubles. Reduced-precision matrices
/// are doubles whose values happen to be representable at the level.
struct DenseMatrix {
  int rows = 0;
  int cols = 0;
  std::vector<double> a;

  DenseMatrix() = default;
  DenseMatrix(int r, int c) : rows(r), cols(c), a(static_cast<size_t>(r) * c, 0.0) {}

  double& operator()(int i, int j) { return a[static_cast<size_t>(i) * cols + j]; }
  double operator()(int i, int j) const { return a[static_cast<size_t>(i) * cols + j]; }

  static DenseMatrix identity(int n);
};

DenseMatrix transpose(const DenseMatrix& A);

/// Entrywise round_to; throws PrecisionOverflowError if any entry
/// overflows the target format.
DenseMatrix cast_matrix(const DenseMatrix& M, const PrecisionLevel& lv);

double vec_norm_1(const std::vector<double>& v);
double vec_norm_inf(const std::vector<double>& v);
double mat_norm_1(const DenseMatrix& A);
double mat_norm_inf(const DenseMatrix& A);

/// y = A x
std::vector<double> matvec(const DenseMatrix& A, const std::vector<double>& x);
/// y = x A (row vector times matrix)
std::vector<double> vecmat(const std::vector<double>& x, const DenseMatrix& A);

/// Partial-pivoting LU with L (unit diagonal) and U overlaid in `lu`.
/// pivots[k] is the row swapped into position k at elimination step k.
struct LuFactors {
  int n = 0;
  DenseMatrix lu;
  std::vector<int> pivots;
  Precision level = Precision::fp64;
};

LuFactors lu_factor(const DenseMatrix& A, const PrecisionLevel& lv);
std::vector<double> lu_solve(const LuFactors& f, const std::vector<double>& b,
                             const PrecisionLevel& lv);
inline std::vector<double> lu_solve(const LuFactors& f, const std::vector<double>& b) {
  return lu_solve(f, b, level(f.level));
}

/// Solve A'x = b (transpose of the factored matrix), used by the
/// condition estimator. Always evaluated at the factor level.
std::vector<double> lu_solve_transposed(const LuFactors& f, const std::vector<double>& b);

/// Hager-style 1-norm condition estimate kappa_1(A) using the given
/// factors; at most 5 refinement sweeps; clamped to >= 1.
double condest_1(const DenseMatrix& A, const LuFactors& f);

/// Largest singular value via power iteration on A'A, deterministic
/// all-ones start, relative tolerance 1e-8, cap 500 iterations.
double spectral_norm_est(const DenseMatrix& A);

/// (I - P)' with the last row replaced by all ones; the stationary
/// vector of P solves replacement_matrix(P) * pi = e_last.
DenseMatrix replacement_matrix(const DenseMatrix& P);

/// Full-precision ground-truth stationary vector of a row-stochastic P:
/// row-replacement fp64 solve plus one step of iterative refinement.
std::vector<double> stationary_oracle(const DenseMatrix& P);

/// Left power iteration for the dominant eigenpair of a nonnegative
/// matrix; returns (lambda, v) with ||v||_1 = 1, v >= 0.
std::pair<double, std::vector<double>> dominant_left_eigenpair(const DenseMatrix& A);

}  // namespace ncdmp
