#include "perpetual/merton.hpp"

#include <cmath>
#include <sstream>

#include "perpetual/error.hpp"
#include "perpetual/numerics.hpp"

namespace perpetual {

MertonSolution MertonSolution::make(double gamma, double strike) {
  if (!(gamma > 0.0) || !std::isfinite(gamma)) throw Error(ErrorCode::InvalidParams, "gamma must be positive");
  if (!(strike > 0.0) || !std::isfinite(strike)) throw Error(ErrorCode::InvalidParams, "strike must be positive");
  return {gamma, strike, strike * gamma / (1.0 + gamma)};
}

double MertonSolution::price(double S) const {
  if (S <= boundary) return strike - S;
  return strike / (1.0 + gamma) * std::pow(S / boundary, -gamma);
}

double MertonSolution::delta(double S) const {
  if (S <= boundary) return -1.0;
  return -gamma * strike / ((1.0 + gamma) * boundary) * std::pow(S / boundary, -gamma - 1.0);
}

double MertonSolution::gamma_h(double S) const {
  if (S < boundary) return 0.0;
  return gamma * strike / boundary * std::pow(S / boundary, -gamma - 1.0);
}

double merton_gamma(double r, double sigma0) {
  if (!(r > 0.0) || !(sigma0 > 0.0)) {
    std::ostringstream os;
    os << "need r > 0 and sigma0 > 0 (r=" << r << ", sigma0=" << sigma0 << ")";
    throw Error(ErrorCode::InvalidParams, os.str());
  }
  return 2.0 * r / (sigma0 * sigma0);
}

double merton_price(const MertonSolution& sol, double S) { return sol.price(S); }

double gamma_minus(const VolatilityModel& model, double r) {
  if (!(r > 0.0)) throw Error(ErrorCode::InvalidParams, "r must be positive");
  return 2.0 * r / model.variance_sq(1.0, 0.0);
}

double gamma_plus(const VolatilityModel& model, double r) {
  if (!model.s_independent())
    throw Error(ErrorCode::NotSIndependent, "gamma+ needs a volatility depending on H only");
  const double upper = gamma_minus(model, r);
  // gamma -> gamma sigma(1+gamma)^2 increases from 0 and reaches at least 2r at gamma-.
  auto f = [&](double g) { return g * model.variance_sq(1.0, 1.0 + g) - 2.0 * r; };
  // Equality at gamma- (H-independent variance) only misses by rounding.
  if (f(upper) <= 0.0) return upper;
  try {
    return find_root(f, {1e-10, upper}, ToleranceSpec{1e-15, 0.0, 400});
  } catch (const Error& e) {
    throw Error(ErrorCode::NoRoot, std::string("gamma+ equation: ") + e.what());
  }
}

BoundsInterval bounds_interval(const VolatilityModel& model, double r, double strike) {
  if (!(strike > 0.0)) throw Error(ErrorCode::InvalidParams, "strike must be positive");
  const double gp = gamma_plus(model, r);
  const double gm = gamma_minus(model, r);
  return {strike * gp / (1.0 + gp), strike * gm / (1.0 + gm)};
}

}  // namespace perpetual
