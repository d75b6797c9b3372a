#include "ncdmp/dense.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "ncdmp/errors.hpp"

namespace ncdmp {

DenseMatrix DenseMatrix::identity(int n) {
  DenseMatrix I(n, n);
  for (int i = 0; i < n; ++i) I(i, i) = 1.0;
  return I;
}

DenseMatrix transpose(const DenseMatrix& A) {
  DenseMatrix T(A.cols, A.rows);
  for (int i = 0; i < A.rows; ++i)
    for (int j = 0; j < A.cols; ++j) T(j, i) = A(i, j);
  return T;
}

DenseMatrix cast_matrix(const DenseMatrix& M, const PrecisionLevel& lv) {
  DenseMatrix out(M.rows, M.cols);
  for (size_t k = 0; k < M.a.size(); ++k) {
    const double v = round_to(M.a[k], lv);
    if (std::isinf(v) && std::isfinite(M.a[k]))
      throw PrecisionOverflowError("cast_matrix: entry overflows " +
                                   std::string(name_of(lv.name)));
    out.a[k] = v;
  }
  return out;
}

double vec_norm_1(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += std::fabs(x);
  return s;
}

double vec_norm_inf(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s = std::max(s, std::fabs(x));
  return s;
}

double mat_norm_1(const DenseMatrix& A) {
  std::vector<double> col(A.cols, 0.0);
  for (int i = 0; i < A.rows; ++i)
    for (int j = 0; j < A.cols; ++j) col[j] += std::fabs(A(i, j));
  return vec_norm_inf(col);
}

double mat_norm_inf(const DenseMatrix& A) {
  double best = 0.0;
  for (int i = 0; i < A.rows; ++i) {
    double s = 0.0;
    for (int j = 0; j < A.cols; ++j) s += std::fabs(A(i, j));
    best = std::max(best, s);
  }
  return best;
}

std::vector<double> matvec(const DenseMatrix& A, const std::vector<double>& x) {
  std::vector<double> y(A.rows, 0.0);
  for (int i = 0; i < A.rows; ++i) {
    double s = 0.0;
    for (int j = 0; j < A.cols; ++j) s += A(i, j) * x[j];
    y[i] = s;
  }
  return y;
}

std::vector<double> vecmat(const std::vector<double>& x, const DenseMatrix& A) {
  std::vector<double> y(A.cols, 0.0);
  for (int i = 0; i < A.rows; ++i) {
    const double xi = x[i];
    for (int j = 0; j < A.cols; ++j) y[j] += xi * A(i, j);
  }
  return y;
}

namespace {

struct RoundIdentity {
  double operator()(double x) const { return x; }
};
struct RoundFloat {
  double operator()(double x) const { return static_cast<double>(static_cast<float>(x)); }
};
struct RoundGeneric {
  const PrecisionLevel* lv;
  double operator()(double x) const { return round_to(x, *lv); }
};

template <class Round>
void factor_in_place(DenseMatrix& M, std::vector<int>& piv, Round rnd) {
  const int n = M.rows;
  for (int k = 0; k < n; ++k) {
    // First index of maximal absolute value (deterministic tie-break).
    int p = k;
    double best = std::fabs(M(k, k));
    for (int i = k + 1; i < n; ++i) {
      const double v = std::fabs(M(i, k));
      if (v > best) {
        best = v;
        p = i;
      }
    }
    if (best == 0.0)
      throw SingularMatrixError("lu_factor: zero pivot at column " + std::to_string(k));
    piv[k] = p;
    if (p != k)
      for (int j = 0; j < n; ++j) std::swap(M(k, j), M(p, j));
    const double pivot = M(k, k);
    for (int i = k + 1; i < n; ++i) {
      const double l = rnd(M(i, k) / pivot);
      M(i, k) = l;
      if (l == 0.0) continue;
      double* mi = &M(i, k + 1);
      const double* mk = &M(k, k + 1);
      for (int j = 0; j < n - k - 1; ++j) mi[j] = rnd(mi[j] - rnd(l * mk[j]));
    }
  }
}

template <class Round>
void solve_in_place(const LuFactors& f, std::vector<double>& x, Round rnd) {
  const int n = f.n;
  const DenseMatrix& M = f.lu;
  for (int k = 0; k < n; ++k) std::swap(x[k], x[f.pivots[k]]);
  for (int i = 1; i < n; ++i) {
    double s = x[i];
    for (int j = 0; j < i; ++j) s = rnd(s - rnd(M(i, j) * x[j]));
    x[i] = s;
  }
  for (int i = n - 1; i >= 0; --i) {
    double s = x[i];
    for (int j = i + 1; j < n; ++j) s = rnd(s - rnd(M(i, j) * x[j]));
    x[i] = rnd(s / M(i, i));
  }
}

template <class Round>
void solve_transposed_in_place(const LuFactors& f, std::vector<double>& x, Round rnd) {
  const int n = f.n;
  const DenseMatrix& M = f.lu;
  // U' is lower triangular: forward substitution.
  for (int i = 0; i < n; ++i) {
    double s = x[i];
    for (int j = 0; j < i; ++j) s = rnd(s - rnd(M(j, i) * x[j]));
    x[i] = rnd(s / M(i, i));
  }
  // L' is unit upper triangular: back substitution.
  for (int i = n - 2; i >= 0; --i) {
    double s = x[i];
    for (int j = i + 1; j < n; ++j) s = rnd(s - rnd(M(j, i) * x[j]));
    x[i] = s;
  }
  for (int k = n - 1; k >= 0; --k) std::swap(x[k], x[f.pivots[k]]);
}

template <class F>
auto dispatch_round(const PrecisionLevel& lv, F&& body) {
  switch (lv.name) {
    case Precision::fp64: return body(RoundIdentity{});
    case Precision::fp32: return body(RoundFloat{});
    default: return body(RoundGeneric{&lv});
  }
}

}  // namespace

LuFactors lu_factor(const DenseMatrix& A, const PrecisionLevel& lv) {
  if (A.rows != A.cols) throw Error("lu_factor: matrix not square");
  LuFactors f;
  f.n = A.rows;
  f.lu = cast_matrix(A, lv);
  f.pivots.assign(f.n, 0);
  f.level = lv.name;
  dispatch_round(lv, [&](auto rnd) { factor_in_place(f.lu, f.pivots, rnd); });
  return f;
}

std::vector<double> lu_solve(const LuFactors& f, const std::vector<double>& b,
                             const PrecisionLevel& lv) {
  if (static_cast<int>(b.size()) != f.n) throw Error("lu_solve: size mismatch");
  std::vector<double> x(f.n);
  for (int i = 0; i < f.n; ++i) x[i] = round_to(b[i], lv);
  dispatch_round(lv, [&](auto rnd) { solve_in_place(f, x, rnd); });
  return x;
}

std::vector<double> lu_solve_transposed(const LuFactors& f, const std::vector<double>& b) {
  if (static_cast<int>(b.size()) != f.n) throw Error("lu_solve_transposed: size mismatch");
  const PrecisionLevel& lv = level(f.level);
  std::vector<double> x(f.n);
  for (int i = 0; i < f.n; ++i) x[i] = round_to(b[i], lv);
  dispatch_round(lv, [&](auto rnd) { solve_transposed_in_place(f, x, rnd); });
  return x;
}

double condest_1(const DenseMatrix& A, const LuFactors& f) {
  const int n = f.n;
  std::vector<double> x(n, 1.0 / n);
  double inv_norm = 0.0;
  for (int sweep = 0; sweep < 5; ++sweep) {
    std::vector<double> y = lu_solve(f, x);
    inv_norm = std::max(inv_norm, vec_norm_1(y));
    std::vector<double> xi(n);
    for (int i = 0; i < n; ++i) xi[i] = y[i] >= 0.0 ? 1.0 : -1.0;
    std::vector<double> z = lu_solve_transposed(f, xi);
    int j = 0;
    for (int i = 1; i < n; ++i)
      if (std::fabs(z[i]) > std::fabs(z[j])) j = i;
    double zx = 0.0;
    for (int i = 0; i < n; ++i) zx += z[i] * x[i];
    if (std::fabs(z[j]) <= zx) break;
    x.assign(n, 0.0);
    x[j] = 1.0;
  }
  const double est = mat_norm_1(A) * inv_norm;
  return est < 1.0 ? 1.0 : est;
}

double spectral_norm_est(const DenseMatrix& A) {
  if (A.rows == 0 || A.cols == 0) return 0.0;
  std::vector<double> v(A.cols, 1.0 / std::sqrt(static_cast<double>(A.cols)));
  double sigma = 0.0, prev = -1.0;
  for (int it = 0; it < 500; ++it) {
    std::vector<double> w = matvec(A, v);
    double nw = 0.0;
    for (double x : w) nw += x * x;
    sigma = std::sqrt(nw);
    if (sigma == 0.0) return 0.0;
    if (prev >= 0.0 && std::fabs(sigma - prev) < 1e-8 * sigma) break;
    prev = sigma;
    std::vector<double> u = vecmat(w, A);  // A'A v direction
    double nu = 0.0;
    for (double x : u) nu += x * x;
    nu = std::sqrt(nu);
    for (size_t i = 0; i < u.size(); ++i) v[i] = u[i] / nu;
  }
  return sigma;
}

DenseMatrix replacement_matrix(const DenseMatrix& P) {
  const int n = P.rows;
  DenseMatrix M(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) M(i, j) = (i == j ? 1.0 : 0.0) - P(j, i);
  for (int j = 0; j < n; ++j) M(n - 1, j) = 1.0;
  return M;
}

std::vector<double> stationary_oracle(const DenseMatrix& P) {
  if (P.rows != P.cols) throw Error("stationary_oracle: matrix not square");
  const int n = P.rows;
  if (n == 1) return {1.0};
  const DenseMatrix M = replacement_matrix(P);
  std::vector<double> b(n, 0.0);
  b[n - 1] = 1.0;
  const LuFactors f = lu_factor(M, level(Precision::fp64));
  std::vector<double> x = lu_solve(f, b);
  // One step of fp64 iterative refinement.
  std::vector<double> r = matvec(M, x);
  for (int i = 0; i < n; ++i) r[i] = b[i] - r[i];
  std::vector<double> d = lu_solve(f, r);
  for (int i = 0; i < n; ++i) x[i] += d[i];
  for (int i = 0; i < n; ++i)
    if (std::fabs(x[i]) < 1e-15 || x[i] < 0.0) x[i] = 0.0;
  const double s = vec_norm_1(x);
  if (s == 0.0) throw SingularMatrixError("stationary_oracle: zero solution");
  for (int i = 0; i < n; ++i) x[i] /= s;
  return x;
}

std::pair<double, std::vector<double>> dominant_left_eigenpair(const DenseMatrix& A) {
  if (A.rows != A.cols) throw Error("dominant_left_eigenpair: matrix not square");
  const int n = A.rows;
  std::vector<double> v(n, 1.0 / n);
  double prev = std::numeric_limits<double>::infinity();
  for (int it = 0; it < 100000; ++it) {
    std::vector<double> u = vecmat(v, A);
    const double lambda = vec_norm_1(u);
    if (lambda == 0.0)
      throw NoConvergenceError("dominant_left_eigenpair: iterate vanished");
    for (int i = 0; i < n; ++i) v[i] = u[i] / lambda;
    if (std::fabs(lambda - prev) <= 1e-12) return {lambda, v};
    prev = lambda;
  }
  throw NoConvergenceError("dominant_left_eigenpair: no convergence after 1e5 iterations");
}

}  // namespace ncdmp
