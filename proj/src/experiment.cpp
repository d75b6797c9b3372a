#include "ncdmp/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

#include "ncdmp/errors.hpp"

namespace ncdmp {

const char* name_of(SweepVariable v) {
  switch (v) {
    case SweepVariable::none: return "none";
    case SweepVariable::m: return "m";
    case SweepVariable::block_size: return "block_size";
    case SweepVariable::epsilon: return "epsilon";
  }
  return "?";
}

SweepVariable sweep_variable_by_name(const std::string& name) {
  if (name == "none") return SweepVariable::none;
  if (name == "m") return SweepVariable::m;
  if (name == "block_size") return SweepVariable::block_size;
  if (name == "epsilon") return SweepVariable::epsilon;
  throw ConfigError("unknown sweep variable: " + name);
}

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

namespace {

std::string sanitize(std::string s) {
  for (char& c : s)
    if (c == ',' || c == '\n' || c == '\r') c = ';';
  return s;
}

std::string precision_summary(const std::vector<Precision>& levels) {
  std::string out;
  for (Precision p : {Precision::bf16, Precision::fp16, Precision::fp32, Precision::fp64}) {
    if (std::find(levels.begin(), levels.end(), p) == levels.end()) continue;
    if (!out.empty()) out += '+';
    out += name_of(p);
  }
  return out.empty() ? "none" : out;
}

const char* kCsvHeader =
    "sweep_value,trial,algorithm,outer_iters,converged,residual_1norm,"
    "time_step1,time_step2,time_step3,time_step4,time_step5,time_step6,"
    "time_setup,time_total,precision_step5,inner_iters_total,status";

void append_row(std::string& csv, const RowResult& r) {
  csv += format_double(r.sweep_value);
  csv += ',' + std::to_string(r.trial);
  csv += ',';
  csv += name_of(r.algorithm);
  csv += ',' + std::to_string(r.outer_iters);
  csv += ',' + std::string(r.converged ? "1" : "0");
  csv += ',' + format_double(r.residual_1norm);
  for (int s = 1; s <= 6; ++s) csv += ',' + format_double(r.time.step_seconds[s]);
  csv += ',' + format_double(r.time.setup());
  csv += ',' + format_double(r.time.total);
  csv += ',' + r.precision_step5;
  csv += ',' + std::to_string(r.inner_iters_total);
  csv += ',' + r.status;
  csv += '\n';
}

struct SummaryCell {
  int trials = 0;
  double outer_sum = 0.0;
  double time_sum = 0.0;
};

std::string render_summary(
    const std::map<double, std::map<std::string, SummaryCell>>& table) {
  std::string out = "sweep_value,algorithm,trials,mean_outer_iters,mean_time_total,"
                    "speedup_vs_kms\n";
  for (const auto& [value, by_alg] : table) {
    double kms_mean_time = -1.0;
    if (auto it = by_alg.find("kms"); it != by_alg.end() && it->second.trials > 0)
      kms_mean_time = it->second.time_sum / it->second.trials;
    for (const char* alg : {"kms", "alg1", "alg2"}) {
      auto it = by_alg.find(alg);
      if (it == by_alg.end()) continue;
      const SummaryCell& c = it->second;
      out += format_double(value);
      out += ',';
      out += alg;
      out += ',' + std::to_string(c.trials);
      if (c.trials > 0) {
        const double mean_time = c.time_sum / c.trials;
        out += ',' + format_double(c.outer_sum / c.trials);
        out += ',' + format_double(mean_time);
        out += ',';
        if (kms_mean_time > 0.0 && mean_time > 0.0)
          out += format_double(kms_mean_time / mean_time);
      } else {
        out += ",,,";
      }
      out += '\n';
    }
  }
  return out;
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write " + path);
  out << text;
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}

}  // namespace

std::string summary_path_for(const std::string& csv_path) {
  const std::string ext = ".csv";
  if (csv_path.size() > ext.size() &&
      csv_path.compare(csv_path.size() - ext.size(), ext.size(), ext) == 0)
    return csv_path.substr(0, csv_path.size() - ext.size()) + "_summary.csv";
  return csv_path + "_summary.csv";
}

ExperimentResult run_experiment(const ExperimentConfig& config) {
  if (config.trials < 1) throw ConfigError("trials must be >= 1");
  if (config.algorithms.empty()) throw ConfigError("no algorithms requested");
  if (config.sweep_variable != SweepVariable::none && config.sweep_values.empty())
    throw ConfigError("sweep_values required for a swept variable");
  if (!config.block_files.empty() && (config.sweep_variable == SweepVariable::m ||
                                      config.sweep_variable == SweepVariable::block_size))
    throw ConfigError("cannot sweep the shape of file-provided blocks");
  if (config.m < 1 || config.block_size < 1) throw ConfigError("bad instance shape");

  std::vector<double> values = config.sweep_values;
  if (config.sweep_variable == SweepVariable::none) values.assign(1, 0.0);

  ExperimentResult result;
  result.csv = std::string(kCsvHeader) + '\n';
  std::map<double, std::map<std::string, SummaryCell>> summary;

  std::vector<DenseMatrix> file_blocks;
  for (const std::string& path : config.block_files)
    file_blocks.push_back(load_block_matrix_market(path));

  for (const double value : values) {
    int m = config.m;
    int block_size = config.block_size;
    double epsilon = config.epsilon;
    switch (config.sweep_variable) {
      case SweepVariable::m: m = static_cast<int>(value); break;
      case SweepVariable::block_size: block_size = static_cast<int>(value); break;
      case SweepVariable::epsilon: epsilon = value; break;
      case SweepVariable::none: break;
    }
    if (m < 1 || block_size < 1) throw ConfigError("bad sweep value");

    for (int trial = 0; trial < config.trials; ++trial) {
      const uint64_t seed = config.seed_base + static_cast<uint64_t>(trial);
      NcdChain chain;
      std::string chain_error;
      try {
        chain = file_blocks.empty()
                    ? generate_random_ncd(std::vector<int>(m, block_size), epsilon, seed)
                    : assemble_ncd_from_blocks(file_blocks, epsilon, seed);
      } catch (const Error& e) {
        chain_error = e.what();
      }

      for (const Algorithm alg : config.algorithms) {
        RowResult row;
        row.sweep_value = value;
        row.trial = trial;
        row.algorithm = alg;
        if (!chain_error.empty()) {
          row.status = sanitize(chain_error);
          row.precision_step5 = "none";
          result.all_ok = false;
          result.rows.push_back(row);
          append_row(result.csv, row);
          continue;
        }
        try {
          CostLedger ledger;
          const SolveResult r = solve(chain, alg, config.solver, ledger);
          row.outer_iters = r.outer_iterations;
          row.converged = r.converged;
          if (!r.trace.empty()) {
            row.residual_1norm = r.trace.back().residual_1;
          } else {
            const std::vector<double> piP = vecmat(r.pi.values, chain.P);
            double res = 0.0;
            for (size_t i = 0; i < piP.size(); ++i)
              res += std::fabs(r.pi.values[i] - piP[i]);
            row.residual_1norm = res;
          }
          row.time = simulate_time(ledger, config.gpu);
          row.precision_step5 = precision_summary(r.step5_levels);
          row.inner_iters_total = r.inner_steps_total;
          SummaryCell& cell = summary[value][name_of(alg)];
          ++cell.trials;
          cell.outer_sum += row.outer_iters;
          cell.time_sum += row.time.total;
        } catch (const Error& e) {
          row.status = sanitize(e.what());
          row.precision_step5 = "none";
          result.all_ok = false;
        }
        result.rows.push_back(row);
        append_row(result.csv, row);
      }
    }
  }
  result.summary_csv = render_summary(summary);
  if (!config.output.empty()) {
    write_text(config.output, result.csv);
    write_text(summary_path_for(config.output), result.summary_csv);
  }
  return result;
}

std::string report(const std::string& csv_path) {
  std::ifstream in(csv_path);
  if (!in) throw ParseError("cannot open " + csv_path);
  std::string line;
  if (!std::getline(in, line)) throw ParseError(csv_path + ": empty file");
  const std::vector<std::string> header = split_csv_line(line);
  auto column = [&](const std::string& name) {
    for (size_t i = 0; i < header.size(); ++i)
      if (header[i] == name) return static_cast<int>(i);
    throw ParseError(csv_path + ": missing column '" + name + "'");
  };
  const int c_value = column("sweep_value");
  const int c_alg = column("algorithm");
  const int c_outer = column("outer_iters");
  const int c_time = column("time_total");
  const int c_status = column("status");

  std::map<double, std::map<std::string, SummaryCell>> summary;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const std::vector<std::string> f = split_csv_line(line);
    if (f.size() != header.size())
      throw ParseError(csv_path + ": malformed row '" + line + "'");
    if (f[c_status] != "ok") continue;
    try {
      SummaryCell& cell = summary[std::stod(f[c_value])][f[c_alg]];
      ++cell.trials;
      cell.outer_sum += std::stod(f[c_outer]);
      cell.time_sum += std::stod(f[c_time]);
    } catch (const std::exception&) {
      throw ParseError(csv_path + ": bad numeric field in '" + line + "'");
    }
  }
  return render_summary(summary);
}

void save_chain(const NcdChain& chain, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write " + path);
  out << "ncdchain 1\n";
  out << "m " << chain.partition.m << "\nsizes";
  for (int s : chain.partition.sizes) out << ' ' << s;
  char buf[40];
  std::snprintf(buf, sizeof buf, "%a", chain.epsilon);
  out << "\nepsilon " << buf << "\nkind "
      << (chain.provenance.kind == Provenance::Kind::generated ? "generated"
                                                               : "assembled")
      << "\nseed " << chain.provenance.seed << '\n';
  for (const std::string& s : chain.provenance.sources) out << "source " << s << '\n';
  out << "matrix\n";
  for (int i = 0; i < chain.P.rows; ++i) {
    for (int j = 0; j < chain.P.cols; ++j) {
      std::snprintf(buf, sizeof buf, "%a", chain.P(i, j));
      out << buf << (j + 1 == chain.P.cols ? '\n' : ' ');
    }
  }
}

NcdChain load_chain(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open " + path);
  std::string magic;
  int version = 0;
  if (!(in >> magic >> version) || magic != "ncdchain" || version != 1)
    throw ParseError(path + ": not a chain container");
  NcdChain chain;
  std::string key;
  int m = 0;
  std::vector<int> sizes;
  bool have_matrix = false;
  while (in >> key) {
    if (key == "m") {
      if (!(in >> m) || m < 1) throw ParseError(path + ": bad block count");
    } else if (key == "sizes") {
      for (int i = 0; i < m; ++i) {
        int s = 0;
        if (!(in >> s)) throw ParseError(path + ": bad sizes line");
        sizes.push_back(s);
      }
    } else if (key == "epsilon") {
      std::string tok;
      in >> tok;
      chain.epsilon = std::strtod(tok.c_str(), nullptr);
    } else if (key == "kind") {
      std::string kind;
      in >> kind;
      if (kind == "generated") chain.provenance.kind = Provenance::Kind::generated;
      else if (kind == "assembled") chain.provenance.kind = Provenance::Kind::assembled;
      else throw ParseError(path + ": bad provenance kind");
    } else if (key == "seed") {
      in >> chain.provenance.seed;
    } else if (key == "source") {
      std::string src;
      in >> src;
      chain.provenance.sources.push_back(src);
    } else if (key == "matrix") {
      chain.partition = BlockPartition::from_sizes(sizes);
      chain.P = DenseMatrix(chain.partition.n, chain.partition.n);
      for (double& v : chain.P.a) {
        std::string tok;
        if (!(in >> tok)) throw ParseError(path + ": truncated matrix data");
        v = std::strtod(tok.c_str(), nullptr);
      }
      have_matrix = true;
    } else {
      throw ParseError(path + ": unknown key '" + key + "'");
    }
  }
  if (!have_matrix) throw ParseError(path + ": missing matrix section");
  return chain;
}

GpuSpec load_gpu_spec(const std::string& name_or_path) {
  if (name_or_path == "h100") return h100_spec();
  std::ifstream in(name_or_path);
  if (!in) throw ConfigError("unknown GPU '" + name_or_path + "' and no such file");
  GpuSpec spec;
  std::string key;
  std::array<bool, 4> have_peak{};
  bool have_bw = false, have_mem = false;
  while (in >> key) {
    if (key == "name") {
      in >> spec.name;
    } else if (key == "bandwidth") {
      have_bw = static_cast<bool>(in >> spec.bandwidth);
    } else if (key == "memory") {
      have_mem = static_cast<bool>(in >> spec.memory);
    } else {
      bool matched = false;
      for (Precision p :
           {Precision::fp64, Precision::fp32, Precision::fp16, Precision::bf16}) {
        if (key == name_of(p)) {
          have_peak[static_cast<int>(p)] =
              static_cast<bool>(in >> spec.peak_flops[static_cast<int>(p)]);
          matched = true;
          break;
        }
      }
      if (!matched) throw ConfigError(name_or_path + ": unknown key '" + key + "'");
    }
  }
  for (Precision p :
       {Precision::fp64, Precision::fp32, Precision::fp16, Precision::bf16})
    if (!have_peak[static_cast<int>(p)] || spec.peak(p) <= 0.0)
      throw ConfigError(name_or_path + ": missing or bad rate for " +
                        std::string(name_of(p)));
  if (!have_bw || spec.bandwidth <= 0.0 || !have_mem || spec.memory <= 0.0)
    throw ConfigError(name_or_path + ": missing bandwidth or memory");
  return spec;
}

}  // namespace ncdmp
