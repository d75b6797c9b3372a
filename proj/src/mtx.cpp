#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <sstream>
#include <string>

#include "ncdmp/errors.hpp"
#include "ncdmp/ncd.hpp"

namespace ncdmp {

namespace {

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  return s;
}

bool next_data_line(std::istream& in, std::string& line) {
  while (std::getline(in, line)) {
    size_t i = line.find_first_not_of(" \t\r\n");
    if (i == std::string::npos) continue;  // blank
    if (line[i] == '%') continue;          // comment
    return true;
  }
  return false;
}

}  // namespace

DenseMatrix load_block_matrix_market(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open " + path);

  std::string header;
  if (!std::getline(in, header)) throw ParseError(path + ": empty file");
  std::istringstream hs(header);
  std::string banner, object, format, field, symmetry;
  hs >> banner >> object >> format >> field >> symmetry;
  if (lower(banner) != "%%matrixmarket" || lower(object) != "matrix")
    throw ParseError(path + ": not a Matrix Market matrix file");
  format = lower(format);
  field = lower(field);
  symmetry = lower(symmetry);
  if (field == "complex") throw ComplexUnsupportedError(path + ": complex field");
  if (field != "real" && field != "integer" && field != "pattern")
    throw ParseError(path + ": unsupported field '" + field + "'");
  if (format != "coordinate" && format != "array")
    throw ParseError(path + ": unsupported format '" + format + "'");
  if (field == "pattern" && format == "array")
    throw ParseError(path + ": pattern field requires coordinate format");
  const bool symmetric = symmetry == "symmetric" || symmetry == "skew-symmetric";
  if (!symmetric && symmetry != "general")
    throw ParseError(path + ": unsupported symmetry '" + symmetry + "'");

  std::string line;
  if (!next_data_line(in, line)) throw ParseError(path + ": missing size line");
  std::istringstream sz(line);
  long long rows = 0, cols = 0, nnz = 0;
  if (format == "coordinate") {
    if (!(sz >> rows >> cols >> nnz)) throw ParseError(path + ": bad size line");
  } else {
    if (!(sz >> rows >> cols)) throw ParseError(path + ": bad size line");
  }
  if (rows < 1 || cols < 1) throw ParseError(path + ": bad dimensions");
  if (rows != cols) throw NotSquareError(path + ": matrix is not square");

  DenseMatrix M(static_cast<int>(rows), static_cast<int>(cols));
  if (format == "coordinate") {
    for (long long k = 0; k < nnz; ++k) {
      if (!next_data_line(in, line))
        throw ParseError(path + ": expected " + std::to_string(nnz) + " entries");
      std::istringstream es(line);
      long long i = 0, j = 0;
      double v = 1.0;
      if (!(es >> i >> j)) throw ParseError(path + ": bad entry line '" + line + "'");
      if (field != "pattern" && !(es >> v))
        throw ParseError(path + ": missing value in '" + line + "'");
      if (i < 1 || i > rows || j < 1 || j > cols)
        throw ParseError(path + ": index out of range in '" + line + "'");
      const double av = std::fabs(v);
      M(static_cast<int>(i - 1), static_cast<int>(j - 1)) = av;
      if (symmetric) M(static_cast<int>(j - 1), static_cast<int>(i - 1)) = av;
    }
  } else {
    // Array format: column-major; symmetric files store the lower
    // triangle of each column only. Values may share lines.
    std::istringstream tokens;
    auto next_value = [&](double& v) {
      while (!(tokens >> v)) {
        if (!next_data_line(in, line)) return false;
        tokens.clear();
        tokens.str(line);
      }
      return true;
    };
    for (long long j = 0; j < cols; ++j) {
      for (long long i = symmetric ? j : 0; i < rows; ++i) {
        double v = 0.0;
        if (!next_value(v)) throw ParseError(path + ": truncated array data");
        const double av = std::fabs(v);
        M(static_cast<int>(i), static_cast<int>(j)) = av;
        if (symmetric) M(static_cast<int>(j), static_cast<int>(i)) = av;
      }
    }
  }
  return M;
}

}  // namespace ncdmp
