#include "perpetual/volatility.hpp"

#include <cmath>
#include <sstream>
#include <string>

#include "perpetual/error.hpp"
#include "perpetual/numerics.hpp"

namespace perpetual {

std::string_view to_string(VolatilityKind kind) noexcept {
  switch (kind) {
    case VolatilityKind::Constant: return "constant";
    case VolatilityKind::Rapm: return "rapm";
    case VolatilityKind::BarlesSoner: return "barles-soner";
  }
  return "unknown";
}

VolatilityKind parse_volatility_kind(std::string_view name) {
  if (name == "constant") return VolatilityKind::Constant;
  if (name == "rapm" || name == "RAPM") return VolatilityKind::Rapm;
  if (name == "barles-soner" || name == "barles_soner" || name == "bs") return VolatilityKind::BarlesSoner;
  throw Error(ErrorCode::InvalidParams, "unknown volatility model '" + std::string(name) + "'");
}

VolatilityModel::VolatilityModel(VolatilityKind kind, double sigma0, double lambda, double a,
                                 std::shared_ptr<const PsiTable> psi)
    : kind_(kind), sigma0_(sigma0), lambda_(lambda), a_(a), psi_(std::move(psi)) {
  if (!(sigma0 > 0.0) || !std::isfinite(sigma0))
    throw Error(ErrorCode::InvalidParams, "sigma0 must be positive");
  if (!(lambda >= 0.0) || !std::isfinite(lambda))
    throw Error(ErrorCode::InvalidParams, "lambda must be nonnegative");
  if (!(a >= 0.0) || !std::isfinite(a)) throw Error(ErrorCode::InvalidParams, "a must be nonnegative");
  if (kind == VolatilityKind::BarlesSoner && !psi_)
    throw Error(ErrorCode::InvalidParams, "Barles-Soner model needs a Psi table");
}

VolatilityModel VolatilityModel::constant(double sigma0) {
  return {VolatilityKind::Constant, sigma0, 0.0, 0.0, nullptr};
}

VolatilityModel VolatilityModel::rapm(double sigma0, double lambda) {
  return {VolatilityKind::Rapm, sigma0, lambda, 0.0, nullptr};
}

VolatilityModel VolatilityModel::barles_soner(double sigma0, double a, std::shared_ptr<const PsiTable> table) {
  return {VolatilityKind::BarlesSoner, sigma0, 0.0, a, std::move(table)};
}

double VolatilityModel::variance_sq(double S, double H) const {
  if (!(S > 0.0)) {
    std::ostringstream os;
    os << "asset price must be positive, got " << S;
    throw Error(ErrorCode::NonPositiveAsset, os.str());
  }
  const double base = sigma0_ * sigma0_;
  const double h = H > 0.0 ? H : 0.0;
  switch (kind_) {
    case VolatilityKind::Constant: return base;
    case VolatilityKind::Rapm: return base * (1.0 + lambda_ * std::cbrt(h));
    case VolatilityKind::BarlesSoner: return base * (1.0 + (*psi_)(a_ * a_ * S * h));
  }
  return base;
}

double VolatilityModel::half_sigma_sq_h(double S, double H) const {
  return 0.5 * variance_sq(S, H) * H;
}

double VolatilityModel::d_variance_h(double S, double H) const {
  if (!(S > 0.0)) throw Error(ErrorCode::NonPositiveAsset, "asset price must be positive");
  if (!(H > 0.0)) throw Error(ErrorCode::NonPositiveGamma, "d_variance_h needs H > 0");
  const double base = sigma0_ * sigma0_;
  switch (kind_) {
    case VolatilityKind::Constant: return base;
    case VolatilityKind::Rapm: return base * (1.0 + 4.0 / 3.0 * lambda_ * std::cbrt(H));
    case VolatilityKind::BarlesSoner: {
      const double step = std::max(1e-6 * H, 1e-12);
      auto g = [&](double h) { return variance_sq(S, h) * h; };
      return (g(H + step) - g(H - step)) / (2.0 * step);
    }
  }
  return base;
}

double VolatilityModel::beta(double x, double w) const {
  const double base = sigma0_ * sigma0_;
  if (w <= 0.0) return 2.0 * w / base;  // sigma(S, 0) = sigma0 for every model here
  switch (kind_) {
    case VolatilityKind::Constant: return 2.0 * w / base;
    case VolatilityKind::Rapm: return lambda_ == 0.0 ? 2.0 * w / base : beta_rapm(w);
    case VolatilityKind::BarlesSoner: return a_ == 0.0 ? 2.0 * w / base : beta_generic(x, w);
  }
  return 2.0 * w / base;
}

// With t = H^(1/3) the RAPM relation is t^3 (1 + lambda t) = 2w / sigma0^2, a
// convex increasing quartic on t > 0. Newton started from an upper bound
// decreases monotonically onto the root.
double VolatilityModel::beta_rapm(double w) const {
  const double q = 2.0 * w / (sigma0_ * sigma0_);
  double t = std::min(std::cbrt(q), std::pow(q / lambda_, 0.25));
  for (int iter = 0; iter < 100; ++iter) {
    const double t2 = t * t;
    const double g = t2 * t * (1.0 + lambda_ * t) - q;
    const double dg = t2 * (3.0 + 4.0 * lambda_ * t);
    const double next = t - g / dg;
    if (!(next < t) || !(next > 0.0)) return t * t * t;
    if (t - next <= 4.0 * std::numeric_limits<double>::epsilon() * t) return next * next * next;
    t = next;
  }
  return beta_generic(0.0, w);
}

double VolatilityModel::beta_generic(double x, double w) const {
  const double S = std::exp(x);
  const double upper = 2.0 * w / (sigma0_ * sigma0_);
  auto f = [&](double H) { return half_sigma_sq_h(S, H) - w; };
  try {
    return find_root(f, {0.0, upper}, ToleranceSpec{2.0 * std::numeric_limits<double>::epsilon(), 0.0, 400});
  } catch (const Error& e) {
    std::ostringstream os;
    os << "cannot invert sigma^2 H / 2 = " << w << " at x=" << x << " (" << e.what() << ")";
    throw Error(ErrorCode::InversionFailed, os.str());
  }
}

}  // namespace perpetual
