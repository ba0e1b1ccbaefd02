#pragma once

#include <optional>
#include <span>
#include <vector>

#include "perpetual/solver.hpp"
#include "perpetual/volatility.hpp"

namespace perpetual {

/// V(S): E - S on the exercise region S <= rho, otherwise
/// (S/r) * integral of W over [ln S, inf).
double price(const VolatilityModel& model, const MarketParams& params, const FreeBoundarySolution& sol,
             double S, const SolverConfig& cfg);

/// The integral representation alone, for S >= rho. At S = rho this is the
/// limit from the continuation region, used to check value matching.
double continuation_value(const VolatilityModel& model, const MarketParams& params,
                          const FreeBoundarySolution& sol, double S, const SolverConfig& cfg);

/// Price from the H-variable quadratures only (no W trajectory, no inversion
/// of the volatility map beyond H0 = beta(rE/rho)). H-only models, S >= rho.
double price_h_form(const VolatilityModel& model, const MarketParams& params, double rho, double S,
                    const SolverConfig& cfg);

/// dV/dS = (int_{ln S}^inf W - W(ln S)) / r for S >= rho, -1 below.
double delta(const VolatilityModel& model, const MarketParams& params, const FreeBoundarySolution& sol,
             double S, const SolverConfig& cfg);

/// H = S d^2V/dS^2 = beta(ln S, W(ln S)) for S >= rho, 0 below.
double gamma_h(const VolatilityModel& model, const MarketParams& params, const FreeBoundarySolution& sol,
               double S, const SolverConfig& cfg);

/// sigma(S,H)^2 S^2 V''/2 + r S V' - r V from the analytic delta and gamma.
/// Inside the exercise region (S < rho) this is the obstacle value -rE.
double residual(const VolatilityModel& model, const MarketParams& params, const FreeBoundarySolution& sol,
                double S, const SolverConfig& cfg);

struct CurvePoint {
  double S;
  double V;
  double delta;
  double H;
  double residual;
  std::optional<double> v_sub;    // Merton price at gamma-
  std::optional<double> v_super;  // Merton price at gamma+
};

struct PriceCurve {
  std::vector<CurvePoint> points;
  double rho = 0.0;
  double strike = 0.0;
};

/// Evaluates every grid point from one pass over the W equation: the grid is
/// walked segment by segment and the tail integrals are summed backwards, so
/// no value is obtained as a difference of two large integrals.
/// Throws InvalidParams unless s_grid is positive and nondecreasing.
PriceCurve build_curve(const VolatilityModel& model, const MarketParams& params, const FreeBoundarySolution& sol,
                       std::span<const double> s_grid, const SolverConfig& cfg);

/// n points from s_min to s_max inclusive, linearly or geometrically spaced.
std::vector<double> make_grid(double s_min, double s_max, int n, bool log_spacing);

}  // namespace perpetual
