#pragma once

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace dyadic {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

// Integrability parameters shared by all weighted estimates.
//
//   p in [1, inf)   : exponent of the source space L^p(sigma)
//   q in (0, 1)     : exponent of the target space L^q(omega)
//   gamma           : power-mean parameter; any nonzero real, or +-inf
//                     (gamma = 0 is reserved for the geometric mean and is
//                     requested explicitly by passing 0 to the power-mean
//                     routines, not stored here)
//
// Derived exponents are computed on demand and never stored.
struct Exponents {
  double p = 2.0;
  double q = 0.5;
  double gamma = 1.0;

  // p' = p/(p-1); +inf at the endpoint p = 1
  double conj_p() const {
    return p == 1.0 ? kInf : p / (p - 1.0);
  }

  // (p-1)q/(p-q): integrand power of omega-side condition integrals
  double omega_power() const { return (p - 1.0) * q / (p - q); }

  // q/(1-q): power of sup-envelope integrands
  double envelope_power() const { return q / (1.0 - q); }

  // p/(p-q): integrand power of sigma-side condition integrals
  double sigma_power() const { return p / (p - q); }
};

inline void validate_exponents(const Exponents& e) {
  if (!(e.p >= 1.0) || !std::isfinite(e.p))
    throw std::invalid_argument("exponent p must lie in [1, inf), got " + std::to_string(e.p));
  if (!(e.q > 0.0) || !(e.q < 1.0))
    throw std::invalid_argument("exponent q must lie in (0, 1), got " + std::to_string(e.q));
  if (std::isnan(e.gamma) || e.gamma == 0.0)
    throw std::invalid_argument("exponent gamma must be a nonzero real or +-inf");
}

}  // namespace dyadic
