#pragma once

#include "perpetual/volatility.hpp"

namespace perpetual {

/// Constant-volatility perpetual put: exercise below E*gamma/(1+gamma),
/// continuation value E/(1+gamma) * (S/boundary)^(-gamma) above it.
struct MertonSolution {
  double gamma = 0.0;
  double strike = 0.0;
  double boundary = 0.0;

  static MertonSolution make(double gamma, double strike);

  double price(double S) const;
  double delta(double S) const;
  /// S * d^2V/dS^2; equals 1 + gamma at the boundary (from above).
  double gamma_h(double S) const;
};

/// 2r / sigma0^2. Throws InvalidParams unless r > 0 and sigma0 > 0.
double merton_gamma(double r, double sigma0);
double merton_price(const MertonSolution& sol, double S);

/// 2r / sigma(., 0)^2: the constant volatility that bounds the price from below.
double gamma_minus(const VolatilityModel& model, double r);

/// Unique root of gamma * sigma(H = 1 + gamma)^2 = 2r in (0, gamma_minus]; the
/// constant volatility that bounds the price from above. Only defined when
/// sigma depends on H alone (NotSIndependent otherwise).
double gamma_plus(const VolatilityModel& model, double r);

struct BoundsInterval {
  double rho_plus;   // E gamma+ / (1 + gamma+), lower end
  double rho_minus;  // E gamma- / (1 + gamma-), upper end
};

BoundsInterval bounds_interval(const VolatilityModel& model, double r, double strike);

}  // namespace perpetual
