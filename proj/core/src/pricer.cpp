#include "perpetual/pricer.hpp"

#include <cmath>
#include <sstream>

#include "perpetual/error.hpp"
#include "perpetual/merton.hpp"

namespace perpetual {

namespace {

struct LocalState {
  double w;       // W(ln S)
  double tail_w;  // integral of W over [ln S, inf)
};

LocalState state_at(const VolatilityModel& model, const MarketParams& params, const FreeBoundarySolution& sol,
                    double S, const SolverConfig& cfg) {
  if (!(S > 0.0)) throw Error(ErrorCode::NonPositiveAsset, "asset price must be positive");
  const double x = std::log(S);
  const double w0 = params.r * params.strike * std::exp(-sol.x0);
  if (x <= sol.x0) return {w0, sol.trajectory.total_int_w()};
  const double w = integrate_w(model, params, sol.x0, w0, cfg, x).back().w;
  return {w, integrate_w(model, params, x, w, cfg).total_int_w()};
}

CurvePoint evaluate(const VolatilityModel& model, const MarketParams& params, const FreeBoundarySolution& sol,
                    double S, const LocalState& st) {
  const double r = params.r;
  const double E = params.strike;
  CurvePoint p{};
  p.S = S;
  if (S < sol.rho) {
    p.V = E - S;
    p.delta = -1.0;
    p.H = 0.0;
    p.residual = r * S * p.delta - r * p.V;
    return p;
  }
  p.V = S <= sol.rho ? E - S : S / r * st.tail_w;
  p.delta = (st.tail_w - st.w) / r;
  p.H = model.beta(std::log(S), st.w);
  p.residual = 0.5 * model.variance_sq(S, p.H) * S * p.H + r * S * p.delta - r * p.V;
  return p;
}

}  // namespace

double price(const VolatilityModel& model, const MarketParams& params, const FreeBoundarySolution& sol,
             double S, const SolverConfig& cfg) {
  if (!(S > 0.0)) throw Error(ErrorCode::NonPositiveAsset, "asset price must be positive");
  if (S <= sol.rho) return params.strike - S;
  return S / params.r * state_at(model, params, sol, S, cfg).tail_w;
}

double continuation_value(const VolatilityModel& model, const MarketParams& params,
                          const FreeBoundarySolution& sol, double S, const SolverConfig& cfg) {
  return S / params.r * state_at(model, params, sol, S, cfg).tail_w;
}

double delta(const VolatilityModel& model, const MarketParams& params, const FreeBoundarySolution& sol,
             double S, const SolverConfig& cfg) {
  if (S < sol.rho) return -1.0;
  const auto st = state_at(model, params, sol, S, cfg);
  return (st.tail_w - st.w) / params.r;
}

double gamma_h(const VolatilityModel& model, const MarketParams& params, const FreeBoundarySolution& sol,
               double S, const SolverConfig& cfg) {
  if (S < sol.rho) return 0.0;
  return model.beta(std::log(S), state_at(model, params, sol, S, cfg).w);
}

double residual(const VolatilityModel& model, const MarketParams& params, const FreeBoundarySolution& sol,
                double S, const SolverConfig& cfg) {
  if (!(S > 0.0)) throw Error(ErrorCode::NonPositiveAsset, "asset price must be positive");
  const LocalState st = S < sol.rho ? LocalState{0.0, 0.0} : state_at(model, params, sol, S, cfg);
  return evaluate(model, params, sol, S, st).residual;
}

double price_h_form(const VolatilityModel& model, const MarketParams& params, double rho, double S,
                    const SolverConfig& cfg) {
  if (!model.s_independent())
    throw Error(ErrorCode::NotSIndependent, "H-form price needs a volatility depending on H only");
  params.validate();
  cfg.validate();
  if (!(rho > 0.0) || !(S >= rho)) {
    std::ostringstream os;
    os << "H-form price needs S >= rho > 0 (S=" << S << ", rho=" << rho << ")";
    throw Error(ErrorCode::InvalidParams, os.str());
  }
  const double r = params.r;
  const double h0 = model.beta(0.0, r * params.strike / rho);

  // dx = -dW / (W + r beta(W)) written in H.
  auto distance_density = [&](double h) {
    return 0.5 * model.d_variance_h(1.0, h) / (h * (0.5 * model.variance_sq(1.0, h) + r));
  };
  double h_at_s = h0;
  const double log_dist = std::log(S / rho);
  if (log_dist > 0.0) {
    auto g = [&](double h) { return integrate_adaptive(distance_density, h, h0, cfg.tol_quad) - log_dist; };
    // beta(w)/w is nonincreasing and W decays no faster than exp(-(1+gamma-) x).
    const double gm = 2.0 * r / model.variance_sq(1.0, 0.0);
    const double lo = h0 * std::pow(rho / S, 1.0 + gm) * (1.0 - cfg.bracket_margin);
    try {
      h_at_s = find_root(g, {lo, h0}, cfg.tol_root);
    } catch (const Error& e) {
      throw Error(ErrorCode::NoRoot, std::string("H(S) for the H-form price: ") + e.what());
    }
  }

  auto value_density = [&](double h) {
    const double half_var = 0.5 * model.variance_sq(1.0, h);
    return half_var / (half_var + r) * 0.5 * model.d_variance_h(1.0, h);
  };
  return S / r * integrate_adaptive(value_density, 0.0, h_at_s, cfg.tol_quad);
}

PriceCurve build_curve(const VolatilityModel& model, const MarketParams& params, const FreeBoundarySolution& sol,
                       std::span<const double> s_grid, const SolverConfig& cfg) {
  params.validate();
  for (std::size_t i = 0; i < s_grid.size(); ++i) {
    if (!(s_grid[i] > 0.0)) throw Error(ErrorCode::InvalidParams, "price grid must be positive");
    if (i > 0 && s_grid[i] < s_grid[i - 1]) throw Error(ErrorCode::InvalidParams, "price grid must be sorted");
  }

  PriceCurve curve;
  curve.rho = sol.rho;
  curve.strike = params.strike;
  curve.points.reserve(s_grid.size());

  // Continuation points: W at each node from consecutive segments, then
  // tails accumulated from the far end.
  std::size_t first = 0;
  while (first < s_grid.size() && s_grid[first] < sol.rho) ++first;
  const std::size_t m = s_grid.size() - first;
  std::vector<LocalState> states(m);
  if (m > 0) {
    std::vector<double> segment(m, 0.0);  // integral of W from node k to node k+1
    double x_cur = sol.x0;
    double w_cur = params.r * params.strike * std::exp(-sol.x0);
    for (std::size_t k = 0; k < m; ++k) {
      const double x = std::max(std::log(s_grid[first + k]), sol.x0);
      if (x > x_cur) {
        const auto seg = integrate_w(model, params, x_cur, w_cur, cfg, x);
        w_cur = seg.back().w;
        if (k > 0) segment[k - 1] = seg.back().int_w;
        x_cur = x;
      }
      states[k].w = w_cur;
    }
    states[m - 1].tail_w = x_cur <= sol.x0 ? sol.trajectory.total_int_w()
                                           : integrate_w(model, params, x_cur, w_cur, cfg).total_int_w();
    for (std::size_t k = m - 1; k-- > 0;) states[k].tail_w = segment[k] + states[k + 1].tail_w;
  }

  std::optional<MertonSolution> sub, super;
  if (model.s_independent()) {
    sub = MertonSolution::make(gamma_minus(model, params.r), params.strike);
    super = MertonSolution::make(gamma_plus(model, params.r), params.strike);
  }
  for (std::size_t i = 0; i < s_grid.size(); ++i) {
    const LocalState st = i < first ? LocalState{0.0, 0.0} : states[i - first];
    CurvePoint p = evaluate(model, params, sol, s_grid[i], st);
    if (sub) {
      p.v_sub = sub->price(p.S);
      p.v_super = super->price(p.S);
    }
    curve.points.push_back(p);
  }
  return curve;
}

std::vector<double> make_grid(double s_min, double s_max, int n, bool log_spacing) {
  if (!(s_min > 0.0) || !(s_max >= s_min) || n < 1) {
    std::ostringstream os;
    os << "invalid grid: s_min=" << s_min << ", s_max=" << s_max << ", n=" << n;
    throw Error(ErrorCode::InvalidParams, os.str());
  }
  if (n == 1) return {s_min};
  std::vector<double> grid(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    const double t = static_cast<double>(i) / (n - 1);
    grid[static_cast<std::size_t>(i)] =
        log_spacing ? s_min * std::pow(s_max / s_min, t) : s_min + (s_max - s_min) * t;
  }
  grid.front() = s_min;
  grid.back() = s_max;
  return grid;
}

}  // namespace perpetual
