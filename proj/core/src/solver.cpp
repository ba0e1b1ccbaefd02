#include "perpetual/solver.hpp"

#include <cmath>
#include <sstream>

#include "perpetual/error.hpp"
#include "perpetual/merton.hpp"

namespace perpetual {

std::string_view to_string(Method m) noexcept {
  switch (m) {
    case Method::GeneralOde: return "general";
    case Method::WQuadrature: return "w-quad";
    case Method::HQuadrature: return "h-quad";
  }
  return "unknown";
}

void MarketParams::validate() const {
  if (!(r > 0.0) || !std::isfinite(r)) throw Error(ErrorCode::InvalidParams, "r must be positive");
  if (!(strike > 0.0) || !std::isfinite(strike)) throw Error(ErrorCode::InvalidParams, "strike must be positive");
}

void SolverConfig::validate() const {
  tol_root.validate();
  tol_ode.validate();
  tol_quad.validate();
  if (!(tail_cutoff > 0.0 && tail_cutoff < 1.0))
    throw Error(ErrorCode::InvalidParams, "tail_cutoff must lie in (0, 1)");
  if (!(x_horizon > 0.0)) throw Error(ErrorCode::InvalidParams, "x_horizon must be positive");
  if (!(bracket_margin > 0.0)) throw Error(ErrorCode::InvalidParams, "bracket_margin must be positive");
}

Trajectory integrate_w(const VolatilityModel& model, const MarketParams& params, double x_start,
                       double w_start, const SolverConfig& cfg, double x_end) {
  params.validate();
  cfg.validate();
  if (!(w_start > 0.0) || !std::isfinite(x_start))
    throw Error(ErrorCode::InvalidParams, "W trajectory needs a finite start and W > 0");

  const double r = params.r;
  // Work with W / w_start and beta / beta(start) so the absolute tolerance
  // means the same thing for every starting point.
  const double w_scale = w_start;
  const double b_scale = std::max(model.beta(x_start, w_start), std::numeric_limits<double>::min());

  auto rhs = [&](double x, const OdeState<3>& y) {
    const double w = y[0] * w_scale;
    const double b = model.beta(x, w);
    return OdeState<3>{-(w + r * b) / w_scale, y[0], b / b_scale};
  };
  const bool to_tail = !std::isfinite(x_end);
  auto stop = [&](double, const OdeState<3>& y) { return to_tail && y[0] < cfg.tail_cutoff; };

  OdeOptions opts;
  opts.x_end = x_end;
  opts.horizon = cfg.x_horizon;
  opts.initial_step = 1e-2;
  if (!to_tail && x_end - x_start > cfg.x_horizon) {
    std::ostringstream os;
    os << "requested x range " << x_end - x_start << " exceeds horizon " << cfg.x_horizon;
    throw Error(ErrorCode::HorizonExceeded, os.str());
  }

  std::vector<OdeSample<3>> raw;
  try {
    raw = integrate_ode<3>(rhs, x_start, OdeState<3>{1.0, 0.0, 0.0}, stop, cfg.tol_ode, opts);
  } catch (const Error& e) {
    if (e.code() == ErrorCode::StopNeverReached) throw Error(ErrorCode::HorizonExceeded, e.what());
    throw;
  }

  Trajectory traj;
  traj.samples.reserve(raw.size());
  for (const auto& s : raw) traj.samples.push_back({s.x, s.y[0] * w_scale, s.y[1] * w_scale, s.y[2] * b_scale});

  if (to_tail) {
    // Beyond the last sample W' = -(1 + r beta/W) W with r beta/W in (0, gamma-],
    // so its remaining integral lies in [W/(1+gamma-), W]. Integrating the
    // equation itself gives int (W + r beta) = W exactly, which fixes the beta tail.
    const TrajectorySample& last = traj.samples.back();
    const double gm = gamma_minus(model, r);
    const double lo = last.w / (1.0 + gm);
    const double hi = last.w;
    const double local_rate = last.w > 0.0 ? r * model.beta(last.x, last.w) / last.w : gm;
    traj.tail_w = std::clamp(last.w / (1.0 + local_rate), lo, hi);
    traj.tail_w_halfwidth = 0.5 * (hi - lo);
    traj.tail_beta = (last.w - traj.tail_w) / r;
    traj.tail_beta_halfwidth = traj.tail_w_halfwidth / r;
  }
  return traj;
}

Trajectory solve_w(const VolatilityModel& model, const MarketParams& params, double x0, const SolverConfig& cfg) {
  params.validate();
  return integrate_w(model, params, x0, params.r * params.strike * std::exp(-x0), cfg);
}

double phi(const VolatilityModel& model, const MarketParams& params, double x0, const SolverConfig& cfg) {
  return solve_w(model, params, x0, cfg).total_int_beta();
}

namespace {

double log_bound(double rho) { return std::log(rho); }

/// Grows [lo, hi] until g(lo) > 0 > g(hi) for a decreasing g.
Bracket expand_decreasing(const ScalarFunction& g, Bracket b, int max_steps, const char* what) {
  double width = b.hi - b.lo;
  int steps = 0;
  while (!(g(b.lo) > 0.0)) {
    if (++steps > max_steps) throw Error(ErrorCode::BracketExpansionFailed, std::string(what) + ": lower end");
    width *= 2.0;
    b.lo -= width;
  }
  steps = 0;
  width = b.hi - b.lo;
  while (!(g(b.hi) < 0.0)) {
    if (++steps > max_steps) throw Error(ErrorCode::BracketExpansionFailed, std::string(what) + ": upper end");
    b.hi += width;
    width *= 2.0;
  }
  return b;
}

/// Same for an increasing g on the positive half-line, expanding multiplicatively.
Bracket expand_increasing_positive(const ScalarFunction& g, Bracket b, int max_steps, const char* what) {
  int steps = 0;
  while (!(g(b.lo) < 0.0)) {
    if (++steps > max_steps) throw Error(ErrorCode::BracketExpansionFailed, std::string(what) + ": lower end");
    b.lo *= 0.5;
  }
  steps = 0;
  while (!(g(b.hi) > 0.0)) {
    if (++steps > max_steps) throw Error(ErrorCode::BracketExpansionFailed, std::string(what) + ": upper end");
    b.hi *= 2.0;
  }
  return b;
}

void require_s_independent(const VolatilityModel& model, const char* method) {
  if (!model.s_independent())
    throw Error(ErrorCode::NotSIndependent,
                std::string(method) + " needs a volatility depending on H only, got " +
                    std::string(to_string(model.kind())));
}

FreeBoundarySolution finish(const VolatilityModel& model, const MarketParams& params, double x0,
                            const SolverConfig& cfg, Method method) {
  FreeBoundarySolution sol;
  sol.x0 = x0;
  sol.rho = std::exp(x0);
  sol.trajectory = solve_w(model, params, x0, cfg);
  sol.phi_residual = std::abs(sol.trajectory.total_int_beta() - 1.0);
  sol.method = method;
  return sol;
}

}  // namespace

FreeBoundarySolution solve_free_boundary_general(const VolatilityModel& model, const MarketParams& params,
                                                 const SolverConfig& cfg) {
  params.validate();
  cfg.validate();
  auto g = [&](double x0) { return phi(model, params, x0, cfg) - 1.0; };

  const double gm = gamma_minus(model, params.r);
  const double x_minus = log_bound(params.strike * gm / (1.0 + gm));
  Bracket b;
  if (model.s_independent()) {
    const auto bounds = bounds_interval(model, params.r, params.strike);
    b = {log_bound(bounds.rho_plus) - cfg.bracket_margin, x_minus + cfg.bracket_margin};
  } else {
    b = {x_minus - 1.0, x_minus};
  }
  b = expand_decreasing(g, b, 60, "phi(x0) = 1 bracket");
  const double x0 = find_root(g, b, cfg.tol_root);
  return finish(model, params, x0, cfg, Method::GeneralOde);
}

FreeBoundarySolution solve_free_boundary_w(const VolatilityModel& model, const MarketParams& params,
                                           const SolverConfig& cfg) {
  require_s_independent(model, "w-quadrature");
  params.validate();
  cfg.validate();
  const double r = params.r;
  auto integrand = [&](double w) {
    const double b = model.beta(0.0, w);
    return b / (w + r * b);
  };
  auto g = [&](double u) { return integrate_adaptive(integrand, 0.0, u, cfg.tol_quad) - 1.0; };

  // rho in [rho+, rho-] means u = rE/rho in [rE/rho-, rE/rho+].
  const auto bounds = bounds_interval(model, r, params.strike);
  Bracket b{r * params.strike / bounds.rho_minus * (1.0 - cfg.bracket_margin),
            r * params.strike / bounds.rho_plus * (1.0 + cfg.bracket_margin)};
  b = expand_increasing_positive(g, b, 60, "G(u) = 1 bracket");
  double u;
  try {
    u = find_root(g, b, cfg.tol_root);
  } catch (const Error& e) {
    throw Error(ErrorCode::NoRoot, std::string("w-quadrature: ") + e.what());
  }
  return finish(model, params, std::log(r * params.strike / u), cfg, Method::WQuadrature);
}

FreeBoundarySolution solve_free_boundary_h(const VolatilityModel& model, const MarketParams& params,
                                           const SolverConfig& cfg) {
  require_s_independent(model, "H-quadrature");
  params.validate();
  cfg.validate();
  const double r = params.r;
  // S is irrelevant for H-only models.
  auto integrand = [&](double H) {
    return 0.5 * model.d_variance_h(1.0, H) / (0.5 * model.variance_sq(1.0, H) + r);
  };
  auto g = [&](double H) { return integrate_adaptive(integrand, 0.0, H, cfg.tol_quad) - 1.0; };

  // The integrand is at least 1/(1 + gamma-), so the root is below 1 + gamma-.
  const double gm = gamma_minus(model, r);
  Bracket b{0.0, (1.0 + gm) * (1.0 + cfg.bracket_margin)};
  if (!(g(b.hi) > 0.0)) b = expand_increasing_positive(g, {b.hi * 0.5, b.hi}, 60, "H-quadrature bracket");
  double h_star;
  try {
    h_star = find_root(g, b, cfg.tol_root);
  } catch (const Error& e) {
    throw Error(ErrorCode::NoRoot, std::string("H-quadrature: ") + e.what());
  }
  const double rho = r * params.strike / model.half_sigma_sq_h(1.0, h_star);
  return finish(model, params, std::log(rho), cfg, Method::HQuadrature);
}

Method default_method(const VolatilityModel& model) noexcept {
  return model.s_independent() ? Method::HQuadrature : Method::GeneralOde;
}

FreeBoundarySolution solve_free_boundary(const VolatilityModel& model, const MarketParams& params,
                                         const SolverConfig& cfg, Method method) {
  switch (method) {
    case Method::GeneralOde: return solve_free_boundary_general(model, params, cfg);
    case Method::WQuadrature: return solve_free_boundary_w(model, params, cfg);
    case Method::HQuadrature: return solve_free_boundary_h(model, params, cfg);
  }
  return solve_free_boundary_general(model, params, cfg);
}

FreeBoundarySolution solution_at(const VolatilityModel& model, const MarketParams& params, double x0,
                                 const SolverConfig& cfg, Method method) {
  return finish(model, params, x0, cfg, method);
}

double w_at(const VolatilityModel& model, const MarketParams& params, double x0, double x,
            const SolverConfig& cfg) {
  params.validate();
  const double w0 = params.r * params.strike * std::exp(-x0);
  if (x == x0) return w0;
  if (x < x0) throw Error(ErrorCode::InvalidParams, "W is only evaluated at x >= x0");
  return integrate_w(model, params, x0, w0, cfg, x).back().w;
}

MonotonicityWitness w_monotonicity_probe(const VolatilityModel& model, const MarketParams& params,
                                         double x0_a, double x0_b, double x_eval, const SolverConfig& cfg) {
  if (!(x0_a < x0_b) || !(x_eval >= x0_b))
    throw Error(ErrorCode::InvalidParams, "probe needs x0_a < x0_b <= x_eval");
  return {w_at(model, params, x0_a, x_eval, cfg), w_at(model, params, x0_b, x_eval, cfg)};
}

}  // namespace perpetual
