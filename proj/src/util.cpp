#include "simsel/error.hpp"
#include "simsel/rng.hpp"

#include <cmath>
#include <numbers>

namespace simsel {

const char* to_string(ErrorKind kind)
{
  switch (kind) {
    case ErrorKind::Format: return "format error";
    case ErrorKind::Truncation: return "truncation error";
    case ErrorKind::Data: return "data error";
    case ErrorKind::Validation: return "validation error";
    case ErrorKind::Argument: return "argument error";
    case ErrorKind::Numerical: return "numerical error";
    case ErrorKind::Io: return "i/o error";
  }
  return "error";
}

// Box-Muller, one variate per call.
double standard_normal(Rng& rng)
{
  double u1;
  do {
    u1 = uniform01(rng);
  } while (u1 <= 0.0);
  const double u2 = uniform01(rng);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

} // namespace simsel
