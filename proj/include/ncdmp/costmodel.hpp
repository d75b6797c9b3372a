#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "ncdmp/precision.hpp"

namespace ncdmp {

/// Throughput model of one accelerator.
struct GpuSpec {
  std::string name;
  std::array<double, 4> peak_flops{};  // indexed by Precision, flops/s
  double bandwidth = 0.0;              // bytes/s
  double memory = 0.0;                 // bytes

  double peak(Precision p) const;
};

/// NVIDIA H100 figures used throughout the experiments.
GpuSpec h100_spec();

long long flops_lu(long long n);
long long flops_trisolve_pair(long long n);
long long flops_matvec(long long rows, long long cols);

struct LedgerEntry {
  std::string label;
  int step = 0;  // outer-loop step 1..6
  long long flops = 0;
  Precision level = Precision::fp64;
  long long bytes_touched = 0;  // working set of the operation
};

/// Append-only record of simulated arithmetic.
struct CostLedger {
  std::vector<LedgerEntry> entries;
  std::array<long long, 7> step_flops{};  // totals by step, [0] unused

  void charge(const std::string& label, int step, long long flops, Precision level,
              long long bytes_touched);
};

struct SimulatedTime {
  // [1..6] hold the per-iteration loop steps; [0] collects one-time
  // setup work (probe factorizations, cached LU) amortized over the
  // whole solve. The total is the loop time, the sum of steps 1-6.
  std::array<double, 7> step_seconds{};
  double total = 0.0;
  double setup() const { return step_seconds[0]; }
};

/// Map a ledger onto simulated seconds: flops/peak when the working set
/// fits in device memory, otherwise the slower of compute and streaming
/// one operand per flop at the entry's storage width.
SimulatedTime simulate_time(const CostLedger& ledger, const GpuSpec& gpu,
                            size_t begin = 0, size_t end = SIZE_MAX);

}  // namespace ncdmp
