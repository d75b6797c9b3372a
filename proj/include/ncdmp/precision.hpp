#pragma once

#include <cstdint>
#include <string>

namespace ncdmp {

/// Floating-point formats supported by the emulation layer.
enum class Precision { fp64, fp32, fp16, bf16 };

/// Format descriptor: significand width (counting the implicit bit),
/// exponent range, unit roundoff and storage width.
struct PrecisionLevel {
  Precision name;
  int significand_bits;
  int max_exponent;
  double unit_roundoff;
  int storage_bytes;
};

const PrecisionLevel& level(Precision p);
const PrecisionLevel& level_by_name(const std::string& name);
const char* name_of(Precision p);

/// Round a native double to the nearest value representable at `lv`
/// (round-to-nearest, ties to even). Values beyond the largest finite
/// value of the format map to +/-inf; subnormals of the target format
/// are kept; NaN and inf pass through. fp64 is the identity.
double round_to(double x, const PrecisionLevel& lv);

inline double round_to(double x, Precision p) { return round_to(x, level(p)); }

enum class ArithOp { add, sub, mul, div };

/// The single arithmetic primitive of every reduced-precision kernel:
/// compute in native double, then round the result to `lv`.
double emulated_op(double a, double b, ArithOp op, const PrecisionLevel& lv);

/// Largest finite value representable at `lv`.
double max_finite(const PrecisionLevel& lv);

}  // namespace ncdmp
