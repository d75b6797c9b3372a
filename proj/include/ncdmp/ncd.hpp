#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ncdmp/dense.hpp"

namespace ncdmp {

struct BlockPartition {
  std::vector<int> sizes;
  std::vector<int> offsets;
  int m = 0;
  int n = 0;

  static BlockPartition from_sizes(const std::vector<int>& sizes);
};

struct Provenance {
  enum class Kind { generated, assembled } kind = Kind::generated;
  uint64_t seed = 0;
  std::vector<std::string> sources;  // block file paths when assembled
};

struct NcdChain {
  DenseMatrix P;
  BlockPartition partition;
  double epsilon = 0.0;
  Provenance provenance;
};

/// SplitMix64; each block (i, j) draws from its own stream so that
/// sub-matrices are reproducible independently of fill order.
struct SplitMix64 {
  uint64_t state;

  explicit SplitMix64(uint64_t s) : state(s) {}

  uint64_t next() {
    uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  double uniform01() { return (next() >> 11) * 0x1.0p-53; }
};

uint64_t mix64(uint64_t z);

/// Stream seed for block (i, j): mix64(mix64(seed) ^ mix64(i*2^32 + j + 1)).
uint64_t block_stream_seed(uint64_t seed, int i, int j);

NcdChain generate_random_ncd(const std::vector<int>& sizes, double epsilon, uint64_t seed);

/// Matrix Market reader (coordinate and array formats, real/integer/
/// pattern fields, general or symmetric); entries are replaced by their
/// absolute values.
DenseMatrix load_block_matrix_market(const std::string& path);

NcdChain assemble_ncd_from_blocks(const std::vector<DenseMatrix>& blocks, double epsilon,
                                  uint64_t seed);

struct ChainDiagnostics {
  double max_row_sum_deviation = 0.0;
  double min_entry = 0.0;
  bool strongly_connected = false;
  // spectral norm estimate per off-diagonal block, row-major over (i, j), i != j
  std::vector<double> offdiag_block_norms;
  bool ok(double epsilon) const;
};

ChainDiagnostics validate_chain(const NcdChain& chain);

struct AssumptionReport {
  std::vector<double> block_dominant_eigenvalue;  // lambda_i1
  std::vector<double> block_gap_proxy;            // 1/(1 - |lambda_i2|)
  double aggregation_gap = 1.0;                   // 1 - |subdominant of R|
  std::vector<double> block_masses;               // ||pi_i||_1 at the exact pi
};

AssumptionReport ncd_assumption_report(const NcdChain& chain);

}  // namespace ncdmp
