#include "ncdmp/ncd.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "ncdmp/errors.hpp"

namespace ncdmp {

BlockPartition BlockPartition::from_sizes(const std::vector<int>& sizes) {
  if (sizes.empty()) throw ConfigError("block partition: no sizes given");
  BlockPartition p;
  p.sizes = sizes;
  p.m = static_cast<int>(sizes.size());
  p.offsets.reserve(sizes.size());
  int off = 0;
  for (int s : sizes) {
    if (s < 1) throw ConfigError("block partition: block size must be >= 1");
    p.offsets.push_back(off);
    off += s;
  }
  p.n = off;
  return p;
}

uint64_t mix64(uint64_t z) {
  z += 0x9E3779B97F4A7C15ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

uint64_t block_stream_seed(uint64_t seed, int i, int j) {
  const uint64_t ij = (static_cast<uint64_t>(i) << 32) + static_cast<uint64_t>(j) + 1;
  return mix64(mix64(seed) ^ mix64(ij));
}

namespace {

DenseMatrix extract_block(const DenseMatrix& P, const BlockPartition& part, int i, int j) {
  DenseMatrix B(part.sizes[i], part.sizes[j]);
  for (int r = 0; r < B.rows; ++r)
    for (int c = 0; c < B.cols; ++c)
      B(r, c) = P(part.offsets[i] + r, part.offsets[j] + c);
  return B;
}

/// Steps (b)-(d) of the construction pipeline, shared between the
/// random generator and real-world assembly: scale every off-diagonal
/// block to spectral norm epsilon, guard rows whose off-diagonal mass
/// approaches 1, then scale diagonal-block rows so each row sums to 1.
void scale_and_normalize(DenseMatrix& P, const BlockPartition& part, double epsilon) {
  const int m = part.m;
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < m; ++j) {
      if (i == j) continue;
      const DenseMatrix B = extract_block(P, part, i, j);
      const double sigma = spectral_norm_est(B);
      if (sigma == 0.0)
        throw DegenerateRowError("off-diagonal block (" + std::to_string(i) + "," +
                                 std::to_string(j) + ") is zero");
      const double f = epsilon / sigma;
      for (int r = 0; r < B.rows; ++r)
        for (int c = 0; c < B.cols; ++c)
          P(part.offsets[i] + r, part.offsets[j] + c) *= f;
    }
  }
  for (int i = 0; i < m; ++i) {
    const int oi = part.offsets[i], ni = part.sizes[i];
    for (int r = 0; r < ni; ++r) {
      const int row = oi + r;
      double offsum = 0.0;
      for (int c = 0; c < part.n; ++c)
        if (c < oi || c >= oi + ni) offsum += P(row, c);
      if (offsum >= 0.9) {
        const double g = 0.8 / offsum;
        for (int c = 0; c < part.n; ++c)
          if (c < oi || c >= oi + ni) P(row, c) *= g;
        offsum = 0.8;
      }
      double diagsum = 0.0;
      for (int c = oi; c < oi + ni; ++c) diagsum += P(row, c);
      if (diagsum == 0.0)
        throw DegenerateRowError("diagonal-block row " + std::to_string(row) +
                                 " is zero");
      const double d = (1.0 - offsum) / diagsum;
      for (int c = oi; c < oi + ni; ++c) P(row, c) *= d;
    }
  }
}

bool strongly_connected(const DenseMatrix& P) {
  const int n = P.rows;
  auto reach_all = [&](bool forward) {
    std::vector<char> seen(n, 0);
    std::vector<int> stack = {0};
    seen[0] = 1;
    int count = 1;
    while (!stack.empty()) {
      const int u = stack.back();
      stack.pop_back();
      for (int v = 0; v < n; ++v) {
        const double w = forward ? P(u, v) : P(v, u);
        if (w != 0.0 && !seen[v]) {
          seen[v] = 1;
          ++count;
          stack.push_back(v);
        }
      }
    }
    return count == n;
  };
  return reach_all(true) && reach_all(false);
}

}  // namespace

NcdChain generate_random_ncd(const std::vector<int>& sizes, double epsilon, uint64_t seed) {
  if (!(epsilon > 0.0 && epsilon <= 0.5))
    throw ConfigError("generate_random_ncd: epsilon must be in (0, 0.5]");
  NcdChain chain;
  chain.partition = BlockPartition::from_sizes(sizes);
  chain.epsilon = epsilon;
  chain.provenance = {Provenance::Kind::generated, seed, {}};
  const BlockPartition& part = chain.partition;
  chain.P = DenseMatrix(part.n, part.n);
  for (int i = 0; i < part.m; ++i) {
    for (int j = 0; j < part.m; ++j) {
      SplitMix64 rng(block_stream_seed(seed, i, j));
      for (int r = 0; r < part.sizes[i]; ++r)
        for (int c = 0; c < part.sizes[j]; ++c)
          chain.P(part.offsets[i] + r, part.offsets[j] + c) = rng.uniform01();
    }
  }
  if (part.m == 1) {
    // Single block: plain row normalization.
    for (int r = 0; r < part.n; ++r) {
      double s = 0.0;
      for (int c = 0; c < part.n; ++c) s += chain.P(r, c);
      if (s == 0.0) throw DegenerateRowError("row " + std::to_string(r) + " is zero");
      for (int c = 0; c < part.n; ++c) chain.P(r, c) /= s;
    }
    return chain;
  }
  scale_and_normalize(chain.P, part, epsilon);
  return chain;
}

NcdChain assemble_ncd_from_blocks(const std::vector<DenseMatrix>& blocks, double epsilon,
                                  uint64_t seed) {
  if (!(epsilon > 0.0 && epsilon <= 0.5))
    throw ConfigError("assemble_ncd_from_blocks: epsilon must be in (0, 0.5]");
  if (blocks.empty()) throw ConfigError("assemble_ncd_from_blocks: no blocks");
  std::vector<int> sizes;
  for (const DenseMatrix& B : blocks) {
    if (B.rows != B.cols) throw ConfigError("assemble_ncd_from_blocks: block not square");
    sizes.push_back(B.rows);
  }
  NcdChain chain;
  chain.partition = BlockPartition::from_sizes(sizes);
  chain.epsilon = epsilon;
  chain.provenance = {Provenance::Kind::assembled, seed, {}};
  const BlockPartition& part = chain.partition;
  chain.P = DenseMatrix(part.n, part.n);
  for (int i = 0; i < part.m; ++i) {
    const DenseMatrix& B = blocks[i];
    for (int r = 0; r < B.rows; ++r) {
      double rowsum = 0.0;
      for (int c = 0; c < B.cols; ++c) rowsum += std::fabs(B(r, c));
      for (int c = 0; c < B.cols; ++c)
        chain.P(part.offsets[i] + r, part.offsets[i] + c) =
            rowsum == 0.0 ? 1.0 / B.cols : std::fabs(B(r, c));
    }
  }
  for (int i = 0; i < part.m; ++i)
    for (int j = 0; j < part.m; ++j) {
      if (i == j) continue;
      SplitMix64 rng(block_stream_seed(seed, i, j));
      for (int r = 0; r < part.sizes[i]; ++r)
        for (int c = 0; c < part.sizes[j]; ++c)
          chain.P(part.offsets[i] + r, part.offsets[j] + c) = rng.uniform01();
    }
  if (part.m == 1) {
    for (int r = 0; r < part.n; ++r) {
      double s = 0.0;
      for (int c = 0; c < part.n; ++c) s += chain.P(r, c);
      for (int c = 0; c < part.n; ++c) chain.P(r, c) /= s;
    }
  } else {
    scale_and_normalize(chain.P, part, epsilon);
  }
  if (!strongly_connected(chain.P))
    throw ReducibleChainError("assembled chain is not strongly connected");
  return chain;
}

ChainDiagnostics validate_chain(const NcdChain& chain) {
  ChainDiagnostics d;
  const DenseMatrix& P = chain.P;
  const BlockPartition& part = chain.partition;
  d.min_entry = P.a.empty() ? 0.0 : *std::min_element(P.a.begin(), P.a.end());
  for (int r = 0; r < P.rows; ++r) {
    double s = 0.0;
    for (int c = 0; c < P.cols; ++c) s += P(r, c);
    d.max_row_sum_deviation = std::max(d.max_row_sum_deviation, std::fabs(s - 1.0));
  }
  d.strongly_connected = strongly_connected(P);
  for (int i = 0; i < part.m; ++i)
    for (int j = 0; j < part.m; ++j)
      if (i != j)
        d.offdiag_block_norms.push_back(spectral_norm_est(extract_block(P, part, i, j)));
  return d;
}

bool ChainDiagnostics::ok(double epsilon) const {
  if (max_row_sum_deviation > 1e-12 || min_entry < 0.0 || !strongly_connected)
    return false;
  for (double s : offdiag_block_norms)
    if (s > 1.5 * epsilon) return false;
  return true;
}

namespace {

/// Magnitude of the subdominant eigenvalue of A, given the dominant
/// pair: deflate and run a left power iteration, tracking the geometric
/// mean growth factor over a trailing window to ride out complex pairs.
double subdominant_magnitude(const DenseMatrix& A, double lambda1,
                             const std::vector<double>& left,
                             const std::vector<double>& right) {
  const int n = A.rows;
  if (n == 1) return 0.0;
  double vu = 0.0;
  for (int i = 0; i < n; ++i) vu += left[i] * right[i];
  DenseMatrix B = A;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) B(i, j) -= lambda1 * right[i] * left[j] / vu;
  std::vector<double> x(n);
  for (int i = 0; i < n; ++i) x[i] = 1.0 / (i + 1.0);
  const double nx = vec_norm_1(x);
  for (double& v : x) v /= nx;
  constexpr int kWindow = 32;
  std::vector<double> growth;
  double prev_est = -1.0;
  for (int it = 0; it < 20000; ++it) {
    std::vector<double> y = vecmat(x, B);
    const double ny = vec_norm_1(y);
    if (ny < 1e-280) return 0.0;
    for (int i = 0; i < n; ++i) x[i] = y[i] / ny;
    growth.push_back(ny);
    if (static_cast<int>(growth.size()) >= kWindow) {
      double logsum = 0.0;
      for (size_t k = growth.size() - kWindow; k < growth.size(); ++k)
        logsum += std::log(growth[k]);
      const double est = std::exp(logsum / kWindow);
      if (prev_est >= 0.0 && std::fabs(est - prev_est) <= 1e-8 * std::max(est, 1e-30))
        return est;
      prev_est = est;
    }
  }
  return prev_est < 0.0 ? 0.0 : prev_est;
}

}  // namespace

AssumptionReport ncd_assumption_report(const NcdChain& chain) {
  AssumptionReport rep;
  const BlockPartition& part = chain.partition;
  for (int i = 0; i < part.m; ++i) {
    const DenseMatrix Pii = extract_block(chain.P, part, i, i);
    const auto [lambda, left] = dominant_left_eigenpair(Pii);
    rep.block_dominant_eigenvalue.push_back(lambda);
    const auto [lambda_r, right] = dominant_left_eigenpair(transpose(Pii));
    (void)lambda_r;
    const double sub = subdominant_magnitude(Pii, lambda, left, right);
    rep.block_gap_proxy.push_back(1.0 / std::max(1.0 - sub, 1e-300));
  }
  const std::vector<double> pi = stationary_oracle(chain.P);
  for (int i = 0; i < part.m; ++i) {
    double mass = 0.0;
    for (int r = 0; r < part.sizes[i]; ++r) mass += std::fabs(pi[part.offsets[i] + r]);
    rep.block_masses.push_back(mass);
  }
  if (part.m == 1) {
    rep.aggregation_gap = 1.0;
    return rep;
  }
  // Aggregation matrix at the exact pi-hat (Step-2 definition).
  DenseMatrix R(part.m, part.m);
  for (int i = 0; i < part.m; ++i)
    for (int j = 0; j < part.m; ++j) {
      double sum = 0.0;
      for (int r = 0; r < part.sizes[i]; ++r) {
        double rowsum = 0.0;
        for (int c = 0; c < part.sizes[j]; ++c)
          rowsum += chain.P(part.offsets[i] + r, part.offsets[j] + c);
        sum += (pi[part.offsets[i] + r] / rep.block_masses[i]) * rowsum;
      }
      R(i, j) = sum;
    }
  const std::vector<double> s = stationary_oracle(R);
  const std::vector<double> ones(part.m, 1.0);
  const double sub = subdominant_magnitude(R, 1.0, s, ones);
  rep.aggregation_gap = 1.0 - sub;
  return rep;
}

}  // namespace ncdmp
