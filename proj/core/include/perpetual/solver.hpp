#pragma once

#include <string_view>
#include <utility>
#include <vector>

#include "perpetual/numerics.hpp"
#include "perpetual/volatility.hpp"

namespace perpetual {

struct MarketParams {
  double r = 0.1;
  double strike = 100.0;

  void validate() const;
};

struct SolverConfig {
  ToleranceSpec tol_root{1e-10, 1e-12, 200};
  ToleranceSpec tol_ode{1e-12, 1e-30, 200000};
  ToleranceSpec tol_quad{1e-12, 1e-15, 4000};
  /// W trajectories stop once W drops below tail_cutoff times their start value.
  double tail_cutoff = 1e-12;
  /// Hard cap on x - x0 for a single trajectory.
  double x_horizon = 200.0;
  /// Relative widening applied to analytic brackets before root finding.
  double bracket_margin = 1e-6;

  void validate() const;
};

enum class Method { GeneralOde, WQuadrature, HQuadrature };

std::string_view to_string(Method m) noexcept;

/// x = ln S, W(x) = (r/S)(V - S dV/dS) and the running integrals of W and
/// beta(x, W) from the trajectory start.
struct TrajectorySample {
  double x;
  double w;
  double int_w;
  double int_beta;
};

struct Trajectory {
  std::vector<TrajectorySample> samples;
  /// Estimates of the integrals of W and beta beyond the last sample together
  /// with the half-widths of the intervals they are known to lie in.
  double tail_w = 0.0;
  double tail_w_halfwidth = 0.0;
  double tail_beta = 0.0;
  double tail_beta_halfwidth = 0.0;

  const TrajectorySample& back() const { return samples.back(); }
  double total_int_w() const { return samples.back().int_w + tail_w; }
  double total_int_beta() const { return samples.back().int_beta + tail_beta; }
};

struct FreeBoundarySolution {
  double rho = 0.0;
  double x0 = 0.0;
  Trajectory trajectory;
  double phi_residual = 0.0;
  Method method = Method::GeneralOde;
};

/// Integrates dW/dx = -W - r beta(x, W) from (x_start, w_start) together with
/// the integrals of W and beta, until W falls below cfg.tail_cutoff * w_start.
/// If x_end is finite the run ends there instead and carries no tail.
Trajectory integrate_w(const VolatilityModel& model, const MarketParams& params, double x_start,
                       double w_start, const SolverConfig& cfg,
                       double x_end = std::numeric_limits<double>::infinity());

/// Trajectory started on the free-boundary condition W(x0) = r E e^(-x0).
Trajectory solve_w(const VolatilityModel& model, const MarketParams& params, double x0,
                   const SolverConfig& cfg);

/// Integral of beta(x, W_x0(x)) over [x0, inf). Decreasing in x0; the free
/// boundary is where it equals one.
double phi(const VolatilityModel& model, const MarketParams& params, double x0, const SolverConfig& cfg);

/// Root of phi(x0) = 1 by bracketed search on trajectories of the W equation.
FreeBoundarySolution solve_free_boundary_general(const VolatilityModel& model, const MarketParams& params,
                                                 const SolverConfig& cfg);

/// G(u) = int_0^u beta(w) / (w + r beta(w)) dw = 1, rho = r E / u. H-only models.
FreeBoundarySolution solve_free_boundary_w(const VolatilityModel& model, const MarketParams& params,
                                           const SolverConfig& cfg);

/// Same condition after substituting w = sigma(H)^2 H / 2; needs no inversion
/// of the volatility map. H-only models.
FreeBoundarySolution solve_free_boundary_h(const VolatilityModel& model, const MarketParams& params,
                                           const SolverConfig& cfg);

/// HQuadrature for H-only models, GeneralOde otherwise.
Method default_method(const VolatilityModel& model) noexcept;

FreeBoundarySolution solve_free_boundary(const VolatilityModel& model, const MarketParams& params,
                                         const SolverConfig& cfg, Method method);

/// Wraps a trajectory started at an arbitrary x0 as a solution object. Used to
/// study perturbed boundaries; phi_residual reports how far x0 is from the root.
FreeBoundarySolution solution_at(const VolatilityModel& model, const MarketParams& params, double x0,
                                 const SolverConfig& cfg, Method method = Method::GeneralOde);

/// W value at x along the trajectory of `sol` (re-integrated, not interpolated).
double w_at(const VolatilityModel& model, const MarketParams& params, double x0, double x,
            const SolverConfig& cfg);

struct MonotonicityWitness {
  double w_a;  // W_{x0_a}(x_eval)
  double w_b;  // W_{x0_b}(x_eval)
  bool increasing() const { return w_b > w_a; }
};

/// Evaluates W_{x0}(x_eval) for two starting points x0_a < x0_b <= x_eval.
/// Throws InvalidParams when the ordering preconditions fail.
MonotonicityWitness w_monotonicity_probe(const VolatilityModel& model, const MarketParams& params,
                                         double x0_a, double x0_b, double x_eval, const SolverConfig& cfg);

}  // namespace perpetual
