#include "ncdmp/costmodel.hpp"

#include <algorithm>

#include "ncdmp/errors.hpp"

namespace ncdmp {

double GpuSpec::peak(Precision p) const {
  const double v = peak_flops[static_cast<int>(p)];
  if (v <= 0.0)
    throw ConfigError("gpu spec '" + name + "' has no throughput for " +
                      name_of(p));
  return v;
}

GpuSpec h100_spec() {
  GpuSpec g;
  g.name = "h100";
  g.peak_flops[static_cast<int>(Precision::fp64)] = 34e12;
  g.peak_flops[static_cast<int>(Precision::fp32)] = 67e12;
  g.peak_flops[static_cast<int>(Precision::fp16)] = 134e12;
  g.peak_flops[static_cast<int>(Precision::bf16)] = 134e12;
  g.bandwidth = 3.35e12;
  g.memory = 96e9;
  return g;
}

long long flops_lu(long long n) { return 2 * n * n * n / 3; }

long long flops_trisolve_pair(long long n) { return 2 * n * n; }

long long flops_matvec(long long rows, long long cols) { return 2 * rows * cols; }

void CostLedger::charge(const std::string& label, int step, long long flops,
                        Precision level, long long bytes_touched) {
  entries.push_back({label, step, flops, level, bytes_touched});
  if (step >= 1 && step <= 6) step_flops[step] += flops;
}

SimulatedTime simulate_time(const CostLedger& ledger, const GpuSpec& gpu,
                            size_t begin, size_t end) {
  SimulatedTime out;
  end = std::min(end, ledger.entries.size());
  for (size_t k = begin; k < end; ++k) {
    const LedgerEntry& e = ledger.entries[k];
    const double compute = static_cast<double>(e.flops) / gpu.peak(e.level);
    double t = compute;
    if (static_cast<double>(e.bytes_touched) > gpu.memory) {
      const double stream = static_cast<double>(e.flops) *
                            level(e.level).storage_bytes / gpu.bandwidth;
      t = std::max(compute, stream);
    }
    out.step_seconds[e.step >= 1 && e.step <= 6 ? e.step : 0] += t;
  }
  // The total is the sum of the six loop-step columns, so that reports
  // satisfy the sum-equals-total identity bit for bit; one-time setup
  // stays in its own bucket.
  for (int s = 1; s <= 6; ++s) out.total += out.step_seconds[s];
  return out;
}

}  // namespace ncdmp
