#include <doctest.h>

#include <cmath>

#include "ncdmp/errors.hpp"
#include "ncdmp/solvers.hpp"
#include "oracles.hpp"

using namespace ncdmp;

namespace {

NcdChain manual_chain(const DenseMatrix& P, const std::vector<int>& sizes, double eps) {
  NcdChain c;
  c.P = P;
  c.partition = BlockPartition::from_sizes(sizes);
  c.epsilon = eps;
  return c;
}

BlockVector as_block_vector(const std::vector<double>& v, const BlockPartition& p) {
  BlockVector b(p);
  b.values = v;
  return b;
}

double dist_1(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (size_t i = 0; i < a.size(); ++i) s += std::fabs(a[i] - b[i]);
  return s;
}

// Exact coupling inputs at the oracle stationary vector.
struct ExactInputs {
  std::vector<double> pi;
  BlockVector pi_hat;
  DenseMatrix R;
  std::vector<double> s;
  BlockVector z;
};

ExactInputs exact_inputs(const NcdChain& c) {
  ExactInputs e;
  e.pi = stationary_oracle(c.P);
  e.pi_hat = normalize_blocks(as_block_vector(e.pi, c.partition));
  e.R = build_aggregation_matrix(e.pi_hat, c);
  e.s = solve_aggregated(e.R, Step3Mode::full_precision, SolverOptions{});
  e.z = hadamard_coupling(e.s, e.pi_hat);
  return e;
}

// Dense matrix of the transposed Step-5 system (D' - U'): I minus the
// transposes of the diagonal and strictly upper blocks of P.
DenseMatrix transposed_system_dense(const NcdChain& c) {
  const BlockPartition& p = c.partition;
  DenseMatrix A = DenseMatrix::identity(p.n);
  for (int b = 0; b < p.m; ++b) {
    const int gend = p.offsets[b] + p.sizes[b];
    for (int g = p.offsets[b]; g < gend; ++g)
      for (int col = p.offsets[b]; col < p.n; ++col) A(col, g) -= c.P(g, col);
  }
  return A;
}

// Block-diagonal part (I - P_ii)' of the transposed system.
DenseMatrix transposed_block_diag_dense(const NcdChain& c) {
  const BlockPartition& p = c.partition;
  DenseMatrix D = DenseMatrix::identity(p.n);
  for (int b = 0; b < p.m; ++b) {
    const int o = p.offsets[b];
    for (int r = 0; r < p.sizes[b]; ++r)
      for (int col = 0; col < p.sizes[b]; ++col) D(o + col, o + r) -= c.P(o + r, o + col);
  }
  return D;
}

DenseMatrix dense_product(const DenseMatrix& A, const DenseMatrix& B) {
  DenseMatrix C(A.rows, B.cols);
  for (int i = 0; i < A.rows; ++i)
    for (int k = 0; k < A.cols; ++k) {
      const double v = A(i, k);
      if (v == 0.0) continue;
      for (int j = 0; j < B.cols; ++j) C(i, j) += v * B(k, j);
    }
  return C;
}

DenseMatrix dense_inverse(const DenseMatrix& A) {
  const LuFactors f = lu_factor(A, level(Precision::fp64));
  DenseMatrix inv(A.rows, A.rows);
  for (int j = 0; j < A.rows; ++j) {
    std::vector<double> e(A.rows, 0.0);
    e[j] = 1.0;
    const std::vector<double> col = lu_solve(f, e);
    for (int i = 0; i < A.rows; ++i) inv(i, j) = col[i];
  }
  return inv;
}

std::vector<LuFactors> block_precond(const NcdChain& c, Precision lvl) {
  const BlockPartition& p = c.partition;
  std::vector<LuFactors> f;
  for (int i = 0; i < p.m; ++i) {
    const int o = p.offsets[i], ni = p.sizes[i];
    DenseMatrix A(ni, ni);
    for (int r = 0; r < ni; ++r)
      for (int col = 0; col < ni; ++col)
        A(col, r) = (r == col ? 1.0 : 0.0) - c.P(o + r, o + col);
    f.push_back(lu_factor(A, level(lvl)));
  }
  return f;
}

}  // namespace

TEST_CASE("normalize_blocks") {
  const BlockPartition p = BlockPartition::from_sizes({2, 2});
  const BlockVector out = normalize_blocks(as_block_vector({2, 2, 1, 3}, p));
  CHECK(out.values == std::vector<double>{0.5, 0.5, 0.25, 0.75});
  // idempotence
  CHECK(normalize_blocks(out).values == out.values);

  CHECK_THROWS_AS(normalize_blocks(as_block_vector({1, 1, 0, 0}, p)), ZeroBlockError);
}

TEST_CASE("build_aggregation_matrix") {
  // m = 1: the only entry is the full row sum.
  const NcdChain single = generate_random_ncd({4}, 0.1, 3);
  const BlockVector h1 = normalize_blocks(as_block_vector({1, 1, 1, 1}, single.partition));
  const DenseMatrix R1 = build_aggregation_matrix(h1, single);
  CHECK(R1.rows == 1);
  CHECK(R1(0, 0) == doctest::Approx(1.0).epsilon(1e-14));

  // Decoupled synthetic chain: R is the identity.
  oracles::TestRng rng(11);
  DenseMatrix P(4, 4);
  const DenseMatrix B1 = oracles::random_stochastic(2, rng);
  const DenseMatrix B2 = oracles::random_stochastic(2, rng);
  for (int r = 0; r < 2; ++r)
    for (int c = 0; c < 2; ++c) {
      P(r, c) = B1(r, c);
      P(2 + r, 2 + c) = B2(r, c);
    }
  const NcdChain dec = manual_chain(P, {2, 2}, 0.1);
  const BlockVector h2 =
      normalize_blocks(as_block_vector({1, 2, 3, 4}, dec.partition));
  const DenseMatrix R2 = build_aggregation_matrix(h2, dec);
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j)
      CHECK(R2(i, j) == doctest::Approx(i == j ? 1.0 : 0.0).epsilon(1e-14));

  // At the exact pi-hat the aggregated stationary vector is the vector
  // of block masses.
  const NcdChain c = generate_random_ncd({6, 5, 7}, 0.05, 21);
  const ExactInputs e = exact_inputs(c);
  for (int i = 0; i < 3; ++i) {
    double mass = 0.0;
    for (int k = 0; k < c.partition.sizes[i]; ++k)
      mass += e.pi[c.partition.offsets[i] + k];
    CHECK(std::fabs(e.s[i] - mass) <= 1e-10);
  }
}

TEST_CASE("solve_aggregated") {
  DenseMatrix R1(1, 1);
  R1(0, 0) = 1.0;
  CHECK(solve_aggregated(R1, Step3Mode::full_precision, SolverOptions{}) ==
        std::vector<double>{1.0});

  DenseMatrix R(2, 2);
  R(0, 0) = 0.9;
  R(0, 1) = 0.1;
  R(1, 0) = 0.2;
  R(1, 1) = 0.8;
  const std::vector<double> s = solve_aggregated(R, Step3Mode::full_precision, {});
  CHECK(s[0] == doctest::Approx(2.0 / 3.0).epsilon(1e-14));
  CHECK(s[1] == doctest::Approx(1.0 / 3.0).epsilon(1e-14));

  oracles::TestRng rng(5);
  const DenseMatrix S = oracles::random_stochastic(20, rng);
  const std::vector<double> full = solve_aggregated(S, Step3Mode::full_precision, {});
  const std::vector<double> mixed = solve_aggregated(S, Step3Mode::mixed, {});
  CHECK(dist_1(full, mixed) <= 1e-10);
  for (double v : mixed) CHECK(v > 0.0);
  CHECK(vec_norm_1(mixed) == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("hadamard_coupling") {
  const BlockPartition p = BlockPartition::from_sizes({2, 2});
  const BlockVector h = normalize_blocks(as_block_vector({1, 3, 2, 2}, p));
  const BlockVector z1 = hadamard_coupling({1.0, 0.0}, h);
  CHECK(z1.values == std::vector<double>{0.25, 0.75, 0.0, 0.0});
  const BlockVector z2 = hadamard_coupling({0.5, 0.5}, h);
  CHECK(z2.values == std::vector<double>{0.125, 0.375, 0.25, 0.25});
  CHECK(vec_norm_1(z2.values) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK_THROWS_AS(hadamard_coupling({1.0}, h), Error);

  // Exact s and pi-hat recover the exact pi.
  const NcdChain c = generate_random_ncd({5, 6}, 0.05, 9);
  const ExactInputs e = exact_inputs(c);
  CHECK(dist_1(e.z.values, e.pi) <= 1e-10);
}

TEST_CASE("kms_step5_full: fixed point and convergence") {
  const NcdChain c = generate_random_ncd({6, 5, 4}, 0.05, 17);
  const ExactInputs e = exact_inputs(c);
  const BlockVector out =
      kms_step5_full(c, e.z, as_block_vector(e.pi, c.partition));
  CHECK(dist_1(out.values, e.pi) <= 1e-10);

  // 2-block 4-state chain, uniform start, full KMS loop.
  const NcdChain small = generate_random_ncd({2, 2}, 0.1, 4);
  const std::vector<double> oracle = stationary_oracle(small.P);
  CostLedger ledger;
  const SolveResult r = solve(small, Algorithm::kms, SolverOptions{}, ledger);
  CHECK(r.converged);
  CHECK(r.outer_iterations <= 25);
  CHECK(dist_1(r.pi.values, oracle) <= 1e-10);
}

TEST_CASE("select_precision") {
  CHECK(select_precision(DenseMatrix::identity(4), 1e-2) == Precision::bf16);

  // kappa * norm around 1e5: only fp32's roundoff clears theta = 1e-2.
  DenseMatrix A(2, 2);
  A(0, 0) = 1.0;
  A(1, 1) = 1e-5;
  CHECK(select_precision(A, 1e-2) == Precision::fp32);

  DenseMatrix B(2, 2);
  B(0, 0) = 1.0;
  B(1, 1) = 1e-9;
  CHECK(select_precision(B, 1e-2) == Precision::fp64);

  // Tightening theta never selects a coarser level.
  oracles::TestRng rng(31);
  for (int trial = 0; trial < 5; ++trial) {
    const DenseMatrix M = oracles::random_well_conditioned(12, rng);
    const Precision loose = select_precision(M, 1e-1);
    const Precision tight = select_precision(M, 1e-6);
    CHECK(level(tight).unit_roundoff <= level(loose).unit_roundoff);
  }

  // Diagonal blocks of generated chains are mild enough for fp32.
  int ok = 0;
  for (uint64_t seed = 1; seed <= 10; ++seed) {
    const NcdChain c = generate_random_ncd({50, 50}, 0.1, seed);
    bool all_cheap = true;
    for (int i = 0; i < 2; ++i) {
      const int o = c.partition.offsets[i];
      DenseMatrix Ai(50, 50);
      for (int r = 0; r < 50; ++r)
        for (int col = 0; col < 50; ++col)
          Ai(col, r) = (r == col ? 1.0 : 0.0) - c.P(o + r, o + col);
      if (select_precision(Ai, 1e-2) == Precision::fp64) all_cheap = false;
    }
    if (all_cheap) ++ok;
  }
  CHECK(ok >= 9);
}

TEST_CASE("iterative_refinement") {
  // Identity: first correction already lands on b.
  const DenseMatrix I = DenseMatrix::identity(3);
  for (Precision p : {Precision::bf16, Precision::fp16, Precision::fp32}) {
    const LuFactors f = lu_factor(I, level(p));
    const IrResult r = iterative_refinement(I, f, {0.25, 0.5, 1.0}, 0x1p-53, 10);
    CHECK(r.converged);
    CHECK(r.steps <= 1);
    CHECK(r.x == std::vector<double>{0.25, 0.5, 1.0});
  }

  // Exactly representable at fp16: zero residual immediately.
  DenseMatrix D(2, 2);
  D(0, 0) = 2.0;
  D(1, 1) = 4.0;
  const LuFactors f16 = lu_factor(D, level(Precision::fp16));
  const IrResult r = iterative_refinement(D, f16, {2.0, 4.0}, 0x1p-53, 10);
  CHECK(r.converged);
  CHECK(r.steps <= 1);
  CHECK(r.x == std::vector<double>{1.0, 1.0});

  // Moderately conditioned 30x30 corpus: per-step error contraction is
  // bounded by c * u(fp16) * kappa_1 with c <= 10.
  oracles::TestRng rng(77);
  for (int trial = 0; trial < 3; ++trial) {
    DenseMatrix A = oracles::random_well_conditioned(30, rng);
    for (int i = 0; i < 30; ++i) {  // stretch the spectrum toward kappa ~ 1e2
      const double sc = std::pow(10.0, -2.0 * i / 29.0);
      for (int j = 0; j < 30; ++j) A(i, j) *= sc;
    }
    const double kappa = oracles::kappa1_explicit(A);
    CHECK(kappa >= 30.0);
    CHECK(kappa <= 1e3);
    std::vector<double> b(30);
    for (auto& v : b) v = rng.symmetric();
    const LuFactors ffull = lu_factor(A, level(Precision::fp64));
    const std::vector<double> xref = lu_solve(ffull, b);
    const LuFactors fred = lu_factor(A, level(Precision::fp16));
    const double bound = 10.0 * level(Precision::fp16).unit_roundoff * kappa;
    CHECK(bound < 1.0);

    // Replay the refinement loop with library primitives and track the
    // error against the fp64 direct solve.
    std::vector<double> x = lu_solve(fred, b);
    double prev = dist_1(x, xref);
    for (int k = 0; k < 6 && prev > 1e-13 * vec_norm_1(xref); ++k) {
      std::vector<double> resid = matvec(A, x);
      for (int i = 0; i < 30; ++i) resid[i] = b[i] - resid[i];
      const double nr = vec_norm_inf(resid);
      for (double& v : resid) v /= nr;  // normalized correction solve
      const std::vector<double> y = lu_solve(fred, resid);
      for (int i = 0; i < 30; ++i) x[i] += nr * y[i];
      const double cur = dist_1(x, xref);
      if (cur > 1e-13 * vec_norm_1(xref)) CHECK(cur <= bound * prev);
      prev = cur;
    }
    // And the library loop converges to the same answer.
    const IrResult ir = iterative_refinement(A, fred, b, 0x1p-53, 50);
    CHECK(ir.converged);
    CHECK(dist_1(ir.x, xref) <= 1e-10 * vec_norm_1(xref) + 1e-13);
  }
}

TEST_CASE("richardson_precond") {
  // Block-diagonal synthetic chain: the preconditioner is the exact
  // operator, so one step suffices.
  oracles::TestRng rng(13);
  DenseMatrix P(4, 4);
  const DenseMatrix B1 = oracles::random_stochastic(2, rng);
  const DenseMatrix B2 = oracles::random_stochastic(2, rng);
  for (int r = 0; r < 2; ++r)
    for (int c = 0; c < 2; ++c) {
      P(r, c) = 0.9 * B1(r, c);  // sub-stochastic keeps I - P_ii nonsingular
      P(2 + r, 2 + c) = 0.9 * B2(r, c);
    }
  const NcdChain dec = manual_chain(P, {2, 2}, 0.05);
  const std::vector<LuFactors> pc64 = block_precond(dec, Precision::fp64);
  const RiResult one = richardson_precond(dec, {1.0, 2.0, 3.0, 4.0}, 50, 1e-12, pc64);
  CHECK(one.steps == 1);

  const RiResult zero = richardson_precond(dec, {0.0, 0.0, 0.0, 0.0}, 50, 1e-12, pc64);
  CHECK(zero.steps == 0);
  CHECK(zero.x == std::vector<double>(4, 0.0));

  // Generated 2-block chain: solution matches the dense fp64 solve and
  // the per-step residual reduction respects the dense spectral bound.
  const NcdChain c = generate_random_ncd({8, 9}, 0.05, 23);
  const ExactInputs e = exact_inputs(c);
  std::vector<double> rhs(c.partition.n, 0.0);
  {  // rhs of the transposed coupled system at the exact z
    const BlockPartition& p = c.partition;
    for (int b = 0; b < p.m; ++b) {
      const int gend = p.offsets[b] + p.sizes[b];
      for (int g = p.offsets[b]; g < gend; ++g)
        for (int col = 0; col < p.offsets[b]; ++col)
          rhs[col] += e.z.values[g] * c.P(g, col);
    }
  }
  const std::vector<LuFactors> pc = block_precond(c, Precision::fp32);
  const RiResult ri = richardson_precond(c, rhs, 500, 1e-13, pc);
  const DenseMatrix At = transposed_system_dense(c);
  const std::vector<double> xref = lu_solve(lu_factor(At, level(Precision::fp64)), rhs);
  CHECK(dist_1(ri.x, xref) <= 1e-9);

  // Dense oracle for the iteration matrix G = I - M^{-1} A.
  DenseMatrix Minv(c.partition.n, c.partition.n);
  for (int j = 0; j < c.partition.n; ++j) {
    std::vector<double> ej(c.partition.n, 0.0);
    ej[j] = 1.0;
    const BlockPartition& p = c.partition;
    for (int i = 0; i < p.m; ++i) {
      const std::vector<double> blk(ej.begin() + p.offsets[i],
                                    ej.begin() + p.offsets[i] + p.sizes[i]);
      const std::vector<double> sol = lu_solve(pc[i], blk);
      for (int k = 0; k < p.sizes[i]; ++k) Minv(p.offsets[i] + k, j) = sol[k];
    }
  }
  DenseMatrix G = dense_product(Minv, At);
  for (int i = 0; i < G.rows; ++i)
    for (int j = 0; j < G.cols; ++j) G(i, j) = (i == j ? 1.0 : 0.0) - G(i, j);
  // Spectral radius estimate: asymptotic growth rate of G^k v.
  std::vector<double> v(G.rows, 1.0);
  double rho = 0.0;
  for (int k = 0; k < 400; ++k) {
    const std::vector<double> w = matvec(G, v);
    const double nw = vec_norm_1(w), nv = vec_norm_1(v);
    if (nw == 0.0) break;
    rho = nw / nv;
    v = w;
    for (auto& t : v) t /= nw;
  }

  // Replay the iteration, checking reductions after a short burn-in.
  std::vector<double> x(c.partition.n, 0.0), y;
  double prev = -1.0;
  for (int step = 0; step < 60; ++step) {
    std::vector<double> resid = matvec(At, x);
    for (int i = 0; i < c.partition.n; ++i) resid[i] = rhs[i] - resid[i];
    const double nr = vec_norm_1(resid);
    if (nr <= 1e-12 * vec_norm_1(rhs)) break;
    if (step >= 3 && prev > 0.0) CHECK(nr / prev <= rho + 0.05);
    prev = nr;
    const BlockPartition& p = c.partition;
    for (int i = 0; i < p.m; ++i) {
      const std::vector<double> blk(resid.begin() + p.offsets[i],
                                    resid.begin() + p.offsets[i] + p.sizes[i]);
      const std::vector<double> dx = lu_solve(pc[i], blk);
      for (int k = 0; k < p.sizes[i]; ++k) x[p.offsets[i] + k] += dx[k];
    }
  }
}

TEST_CASE("kt_schedule and inner_tolerance") {
  SolverOptions opts;
  CHECK(kt_schedule(1, opts) == 10);
  CHECK(kt_schedule(2, opts) == 20);
  CHECK(kt_schedule(3, opts) == 40);
  CHECK(kt_schedule(30, opts) == 10000);
  opts.ri_growth = 1.0;
  for (int t : {1, 5, 20}) CHECK(kt_schedule(t, opts) == 10);

  CHECK(inner_tolerance(1, 0.1) == doctest::Approx(0.1).epsilon(1e-15));
  CHECK(inner_tolerance(3, 0.1) == doctest::Approx(1e-3).epsilon(1e-12));
  CHECK(inner_tolerance(40, 0.1) == 1e-14);
}

TEST_CASE("solve: oracle short-circuit for one block") {
  DenseMatrix P(2, 2);
  P(0, 0) = 0.9;
  P(0, 1) = 0.1;
  P(1, 0) = 0.2;
  P(1, 1) = 0.8;
  const NcdChain c = manual_chain(P, {2}, 0.1);
  CostLedger ledger;
  const SolveResult r = solve(c, Algorithm::kms, SolverOptions{}, ledger);
  CHECK(r.converged);
  CHECK(r.pi.values[0] == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
  CHECK(r.pi.values[1] == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
}

TEST_CASE("solve: algorithm agreement and trace invariants") {
  const NcdChain c = generate_random_ncd({8, 6, 7}, 0.05, 41);
  const std::vector<double> oracle = stationary_oracle(c.P);
  std::vector<SolveResult> results;
  for (Algorithm a : {Algorithm::kms, Algorithm::alg1, Algorithm::alg2}) {
    CostLedger ledger;
    SolverOptions opts;
    opts.reference = oracle;
    const SolveResult r = solve(c, a, opts, ledger);
    CHECK(r.converged);
    CHECK(dist_1(r.pi.values, oracle) <= 1e-8);
    CHECK(vec_norm_1(r.pi.values) == doctest::Approx(1.0).epsilon(1e-12));
    for (double v : r.pi.values) CHECK(v >= 0.0);
    REQUIRE(r.trace.size() == static_cast<size_t>(r.outer_iterations));
    // Ledger slices tile the iteration range in order.
    for (size_t t = 0; t < r.trace.size(); ++t) {
      CHECK(r.trace[t].ledger_end > r.trace[t].ledger_begin);
      if (t > 0) CHECK(r.trace[t].ledger_begin == r.trace[t - 1].ledger_end);
      CHECK(r.trace[t].error_1 >= 0.0);
    }
    CHECK(r.trace.back().residual_1 <= 1e-9);
    for (int step = 1; step <= 6; ++step) CHECK(ledger.step_flops[step] > 0);
    CHECK(r.step5_levels.size() == 3);
    results.push_back(r);
  }
  for (size_t i = 0; i < results.size(); ++i)
    for (size_t j = i + 1; j < results.size(); ++j)
      CHECK(dist_1(results[i].pi.values, results[j].pi.values) <= 1e-7);
  // alg2 records one inner count per iteration.
  CHECK(results[2].trace[0].inner_steps.size() == 1);
  CHECK(results[2].inner_steps_total >= 1);
}

TEST_CASE("solve: fixed point at the oracle") {
  const NcdChain c = generate_random_ncd({7, 5, 6}, 0.05, 55);
  const std::vector<double> oracle = stationary_oracle(c.P);
  for (Algorithm a : {Algorithm::kms, Algorithm::alg1, Algorithm::alg2}) {
    CostLedger ledger;
    SolverOptions opts;
    opts.initial = oracle;
    opts.max_outer = 1;
    const SolveResult r = solve(c, a, opts, ledger);
    CHECK(r.trace[0].step_change_1 <= 10 * opts.outer_tol);
  }
}

TEST_CASE("solve: iteration parity across algorithms") {
  for (uint64_t seed : {101u, 102u, 103u}) {
    const NcdChain c = generate_random_ncd({50, 50, 50}, 0.1, seed);
    int iters[3];
    int idx = 0;
    for (Algorithm a : {Algorithm::kms, Algorithm::alg1, Algorithm::alg2}) {
      CostLedger ledger;
      const SolveResult r = solve(c, a, SolverOptions{}, ledger);
      CHECK(r.converged);
      iters[idx++] = r.outer_iterations;
    }
    CHECK(std::abs(iters[1] - iters[0]) <= 1);
    CHECK(iters[2] <= iters[0] + 6);
  }
}

TEST_CASE("lemma 2: truncated Neumann error bound") {
  oracles::TestRng rng(67);
  for (uint64_t seed = 1; seed <= 5; ++seed) {
    // Decreasing block sizes keep the coupling ratios, and with them the
    // norm of the Neumann term, below one.
    const NcdChain c = generate_random_ncd({25, 18, 12}, 0.02, seed);
    const int n = c.partition.n;
    const DenseMatrix At = transposed_system_dense(c);
    const DenseMatrix D = transposed_block_diag_dense(c);
    const DenseMatrix Dinv = dense_inverse(D);
    // N = D - At holds the transposed coupling blocks.
    DenseMatrix N(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) N(i, j) = D(i, j) - At(i, j);
    const DenseMatrix G = dense_product(Dinv, N);
    const double q = mat_norm_1(G);
    REQUIRE(q < 1.0);  // contractive regime where the bound applies
    const double dinv_norm = mat_norm_1(Dinv);

    std::vector<double> b(n);
    for (auto& v : b) v = rng.uniform();
    const std::vector<double> x = lu_solve(lu_factor(At, level(Precision::fp64)), b);
    std::vector<double> term = matvec(Dinv, b);
    std::vector<double> xk(term);
    for (int k = 0; k <= 5; ++k) {
      if (k > 0) {
        term = matvec(G, term);
        for (int i = 0; i < n; ++i) xk[i] += term[i];
      }
      const double err = dist_1(x, xk);
      const double bound =
          dinv_norm * std::pow(q, k + 1) / (1.0 - q) * vec_norm_1(b);
      CHECK(err <= bound * (1.0 + 1e-10));
    }
  }
}

TEST_CASE("lemma 3: inexact inner solves reach the exact-solve limit") {
  const NcdChain c = generate_random_ncd({9, 8}, 0.05, 71);
  CostLedger l1, l2;
  const SolveResult exact = solve(c, Algorithm::kms, SolverOptions{}, l1);
  const SolveResult inexact = solve(c, Algorithm::alg2, SolverOptions{}, l2);
  CHECK(exact.converged);
  CHECK(inexact.converged);
  CHECK(dist_1(exact.pi.values, inexact.pi.values) <= 1e-8);
}
