#include <cstdio>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "ncdmp/errors.hpp"
#include "ncdmp/experiment.hpp"

using namespace ncdmp;

namespace {

std::vector<Algorithm> parse_algorithms(const std::vector<std::string>& names) {
  std::vector<Algorithm> out;
  for (const std::string& n : names) out.push_back(algorithm_by_name(n));
  return out;
}

void add_solver_options(CLI::App* cmd, SolverOptions& opts, std::string& ri_precision) {
  cmd->add_option("--outer-tol", opts.outer_tol, "Outer convergence tolerance");
  cmd->add_option("--max-outer", opts.max_outer, "Outer iteration cap");
  cmd->add_option("--theta", opts.ir_theta, "Precision-selection threshold");
  cmd->add_option("--ir-max-steps", opts.ir_max_steps, "Refinement step cap");
  cmd->add_option("--ri-k0", opts.ri_k0, "Initial inner-iteration budget");
  cmd->add_option("--ri-growth", opts.ri_growth, "Inner budget growth factor");
  cmd->add_option("--ri-precision", ri_precision,
                  "Preconditioner level: bf16, fp16, fp32 or fp64");
}

int run_generate(const std::vector<int>& sizes, double epsilon, uint64_t seed,
                 const std::vector<std::string>& block_files, const std::string& output) {
  const NcdChain chain =
      block_files.empty()
          ? generate_random_ncd(sizes, epsilon, seed)
          : [&] {
              std::vector<DenseMatrix> blocks;
              for (const std::string& p : block_files)
                blocks.push_back(load_block_matrix_market(p));
              NcdChain c = assemble_ncd_from_blocks(blocks, epsilon, seed);
              c.provenance.sources = block_files;
              return c;
            }();
  save_chain(chain, output);
  const ChainDiagnostics d = validate_chain(chain);
  std::printf("wrote %s: n=%d m=%d epsilon=%s\n", output.c_str(), chain.partition.n,
              chain.partition.m, format_double(chain.epsilon).c_str());
  std::printf("row-sum deviation %s, min entry %s, strongly connected %s\n",
              format_double(d.max_row_sum_deviation).c_str(),
              format_double(d.min_entry).c_str(), d.strongly_connected ? "yes" : "no");
  return 0;
}

int run_solve(const std::string& chain_path, const std::string& algorithm,
              const SolverOptions& opts, const std::string& gpu_name) {
  const NcdChain chain = load_chain(chain_path);
  const GpuSpec gpu = load_gpu_spec(gpu_name);
  CostLedger ledger;
  const SolveResult r = solve(chain, algorithm_by_name(algorithm), opts, ledger);
  const SimulatedTime t = simulate_time(ledger, gpu);
  std::printf("algorithm %s on %s (n=%d, m=%d)\n", algorithm.c_str(), chain_path.c_str(),
              chain.partition.n, chain.partition.m);
  std::printf("converged %s in %d outer iterations, %lld inner steps\n",
              r.converged ? "yes" : "no", r.outer_iterations, r.inner_steps_total);
  if (!r.trace.empty())
    std::printf("final residual %s, final step change %s\n",
                format_double(r.trace.back().residual_1).c_str(),
                format_double(r.trace.back().step_change_1).c_str());
  std::printf("stationary vector (first %d entries):", std::min(chain.partition.n, 8));
  for (int i = 0; i < std::min(chain.partition.n, 8); ++i)
    std::printf(" %s", format_double(r.pi.values[i]).c_str());
  std::printf("\nsimulated seconds on %s:\n", gpu.name.c_str());
  for (int s = 1; s <= 6; ++s)
    std::printf("  step %d: %-12s (%lld flops)\n", s,
                format_double(t.step_seconds[s]).c_str(), ledger.step_flops[s]);
  std::printf("  setup:  %s\n", format_double(t.setup()).c_str());
  std::printf("  total:  %s\n", format_double(t.total).c_str());
  return r.converged ? 0 : 2;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Stationary distributions of nearly completely decomposable Markov "
               "chains by mixed-precision aggregation-disaggregation"};
  app.require_subcommand(1);

  // generate
  auto* gen = app.add_subcommand("generate", "Generate or assemble a chain");
  std::vector<int> gen_sizes{2, 2};
  double gen_eps = 0.1;
  uint64_t gen_seed = 1;
  std::vector<std::string> gen_blocks;
  std::string gen_out = "chain.ncd";
  gen->add_option("--sizes", gen_sizes, "Block sizes");
  gen->add_option("--epsilon", gen_eps, "Coupling magnitude");
  gen->add_option("--seed", gen_seed, "Generator seed");
  gen->add_option("--blocks", gen_blocks, "Matrix Market files for the diagonal blocks");
  gen->add_option("-o,--output", gen_out, "Chain container path");

  // solve
  auto* sol = app.add_subcommand("solve", "Solve one chain with one algorithm");
  std::string sol_chain, sol_alg = "kms", sol_gpu = "h100", sol_ri = "fp32";
  SolverOptions sol_opts;
  sol->add_option("--chain", sol_chain, "Chain container path")->required();
  sol->add_option("--algorithm", sol_alg, "kms, alg1 or alg2");
  sol->add_option("--gpu", sol_gpu, "GPU spec name or file");
  add_solver_options(sol, sol_opts, sol_ri);

  // sweep
  auto* swp = app.add_subcommand("sweep", "Run a parameter sweep to CSV");
  ExperimentConfig cfg;
  std::string swp_sweep = "none", swp_gpu = "h100", swp_ri = "fp32";
  std::vector<std::string> swp_algs{"kms", "alg1", "alg2"};
  swp->add_option("--sweep", swp_sweep, "none, m, block_size or epsilon");
  swp->add_option("--values", cfg.sweep_values, "Sweep values");
  swp->add_option("--m", cfg.m, "Number of blocks");
  swp->add_option("--block-size", cfg.block_size, "States per block");
  swp->add_option("--epsilon", cfg.epsilon, "Coupling magnitude");
  swp->add_option("--trials", cfg.trials, "Trials per sweep value");
  swp->add_option("--seed-base", cfg.seed_base, "Seed for trial 0");
  swp->add_option("--algorithms", swp_algs, "Subset of kms alg1 alg2");
  swp->add_option("--gpu", swp_gpu, "GPU spec name or file");
  swp->add_option("--blocks", cfg.block_files, "Matrix Market block files");
  swp->add_option("-o,--output", cfg.output, "CSV output path")->required();
  add_solver_options(swp, cfg.solver, swp_ri);

  // report
  auto* rep = app.add_subcommand("report", "Summarize a sweep CSV");
  std::string rep_input;
  rep->add_option("input", rep_input, "CSV produced by sweep")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*gen) return run_generate(gen_sizes, gen_eps, gen_seed, gen_blocks, gen_out);
    if (*sol) {
      sol_opts.ri_precision = level_by_name(sol_ri).name;
      return run_solve(sol_chain, sol_alg, sol_opts, sol_gpu);
    }
    if (*swp) {
      cfg.sweep_variable = sweep_variable_by_name(swp_sweep);
      cfg.algorithms = parse_algorithms(swp_algs);
      cfg.gpu = load_gpu_spec(swp_gpu);
      cfg.solver.ri_precision = level_by_name(swp_ri).name;
      const ExperimentResult r = run_experiment(cfg);
      int failed = 0;
      for (const RowResult& row : r.rows)
        if (row.status != "ok") ++failed;
      std::printf("wrote %s and %s: %zu rows, %d failed\n", cfg.output.c_str(),
                  summary_path_for(cfg.output).c_str(), r.rows.size(), failed);
      return r.all_ok ? 0 : 2;
    }
    if (*rep) {
      std::fputs(report(rep_input).c_str(), stdout);
      return 0;
    }
  } catch (const Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 1;
}
