#include "ncdmp/precision.hpp"

#include <cfenv>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace ncdmp {

namespace {

constexpr PrecisionLevel kLevels[] = {
    {Precision::fp64, 53, 1023, 0x1p-53, 8},
    {Precision::fp32, 24, 127, 0x1p-24, 4},
    {Precision::fp16, 11, 15, 0x1p-11, 2},
    {Precision::bf16, 8, 127, 0x1p-8, 2},
};

}  // namespace

const PrecisionLevel& level(Precision p) { return kLevels[static_cast<int>(p)]; }

const char* name_of(Precision p) {
  switch (p) {
    case Precision::fp64: return "fp64";
    case Precision::fp32: return "fp32";
    case Precision::fp16: return "fp16";
    case Precision::bf16: return "bf16";
  }
  return "?";
}

const PrecisionLevel& level_by_name(const std::string& name) {
  for (const auto& lv : kLevels)
    if (name == name_of(lv.name)) return lv;
  throw std::invalid_argument("unknown precision level: " + name);
}

double max_finite(const PrecisionLevel& lv) {
  // (2 - 2^(1-p)) * 2^emax
  return std::ldexp(2.0 - std::ldexp(1.0, 1 - lv.significand_bits), lv.max_exponent);
}

double round_to(double x, const PrecisionLevel& lv) {
  if (lv.name == Precision::fp64) return x;
  if (!std::isfinite(x) || x == 0.0) return x;
  if (lv.name == Precision::fp32) {
    // Native float conversion has exactly the required semantics
    // (nearest-even, gradual underflow, overflow to infinity).
    return static_cast<double>(static_cast<float>(x));
  }
  const int p = lv.significand_bits;
  const int min_exp = 1 - lv.max_exponent;
  const double ax = std::fabs(x);
  int e = std::ilogb(ax);
  if (e < min_exp) e = min_exp;  // subnormal range: fixed quantum
  // Spacing of representable values at this binade.
  const double ulp = std::ldexp(1.0, e - (p - 1));
  // ax/ulp is exact (power-of-two divide) and small enough that
  // nearbyint under the default rounding mode gives nearest-even.
  const double r = std::nearbyint(ax / ulp) * ulp;
  if (r > max_finite(lv)) return std::copysign(std::numeric_limits<double>::infinity(), x);
  return std::copysign(r, x);
}

double emulated_op(double a, double b, ArithOp op, const PrecisionLevel& lv) {
  double r = 0.0;
  switch (op) {
    case ArithOp::add: r = a + b; break;
    case ArithOp::sub: r = a - b; break;
    case ArithOp::mul: r = a * b; break;
    case ArithOp::div: r = a / b; break;
  }
  return round_to(r, lv);
}

}  // namespace ncdmp
