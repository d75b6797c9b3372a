#pragma once

#include <stdexcept>
#include <string>

namespace ncdmp {

struct Error : std::runtime_error {
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

/// A pivot rounded to zero, or the input is structurally singular.
struct SingularMatrixError : Error {
  using Error::Error;
};

/// An iterative estimator hit its iteration cap without meeting tolerance.
struct NoConvergenceError : Error {
  using Error::Error;
};

/// cast_matrix produced an infinity: the level cannot represent the operand.
struct PrecisionOverflowError : Error {
  using Error::Error;
};

/// Malformed input file (Matrix Market, chain container, GPU spec, CSV).
struct ParseError : Error {
  using Error::Error;
};

/// Matrix Market file holds a non-square matrix where a square block is needed.
struct NotSquareError : Error {
  using Error::Error;
};

/// Matrix Market file declares the complex field.
struct ComplexUnsupportedError : Error {
  using Error::Error;
};

/// A diagonal-block row was entirely zero before normalization.
struct DegenerateRowError : Error {
  using Error::Error;
};

/// The assembled chain's sparsity graph is not strongly connected.
struct ReducibleChainError : Error {
  using Error::Error;
};

/// A block of the iterate lost all mass.
struct ZeroBlockError : Error {
  using Error::Error;
};

/// Richardson residual blew past the divergence threshold.
struct DivergenceError : Error {
  using Error::Error;
};

/// Invalid experiment or CLI configuration.
struct ConfigError : Error {
  using Error::Error;
};

}  // namespace ncdmp
