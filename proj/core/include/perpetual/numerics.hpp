#pragma once

// Scalar root finding, adaptive quadrature and an embedded Runge-Kutta
// integrator. Everything here is a pure function of its arguments.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <string>
#include <vector>

#include "perpetual/error.hpp"

namespace perpetual {

struct Bracket {
  double lo;
  double hi;
};

struct ToleranceSpec {
  double rel_tol = 1e-10;
  double abs_tol = 1e-12;
  int max_iter = 200;

  /// Throws Error(InvalidParams) unless rel_tol > 0, abs_tol >= 0, max_iter >= 1.
  void validate() const;
};

using ScalarFunction = std::function<double(double)>;

/// Brent's method on a sign-changing bracket. Interpolation steps fall back to
/// bisection whenever they stall, so the iteration count is bounded.
/// Throws NoSignChange or MaxIterExceeded.
double find_root(const ScalarFunction& f, Bracket bracket, const ToleranceSpec& tol);

struct QuadratureResult {
  double value = 0.0;
  double error = 0.0;
  int intervals = 0;
};

/// Globally adaptive 7/15-point Gauss-Kronrod quadrature. The interval with the
/// largest error estimate is bisected until the summed estimate drops below
/// max(abs_tol, rel_tol*|I|). tol.max_iter caps the number of bisections.
/// Integrable endpoint singularities such as x^(1/3) at 0 are resolved by
/// repeated bisection towards the endpoint.
QuadratureResult integrate_adaptive_detailed(const ScalarFunction& f, double a, double b,
                                             const ToleranceSpec& tol);

inline double integrate_adaptive(const ScalarFunction& f, double a, double b,
                                 const ToleranceSpec& tol) {
  return integrate_adaptive_detailed(f, a, b, tol).value;
}

// ---------------------------------------------------------------------------
// Dormand-Prince 5(4)
// ---------------------------------------------------------------------------

template <std::size_t N>
using OdeState = std::array<double, N>;

template <std::size_t N>
struct OdeSample {
  double x;
  OdeState<N> y;
};

struct OdeOptions {
  /// Integration ends exactly at x_end if the stop predicate has not fired.
  double x_end = std::numeric_limits<double>::infinity();
  /// StopNeverReached is raised once x - x_start exceeds this.
  double horizon = 200.0;
  double initial_step = 1e-2;
};

namespace detail {

[[noreturn]] void throw_ode_error(ErrorCode code, double x, const std::string& msg);

template <std::size_t N>
OdeState<N> axpy(const OdeState<N>& y, double h, std::initializer_list<std::pair<double, const OdeState<N>*>> terms) {
  OdeState<N> out = y;
  for (const auto& [c, k] : terms) {
    if (c == 0.0) continue;
    for (std::size_t i = 0; i < N; ++i) out[i] += h * c * (*k)[i];
  }
  return out;
}

}  // namespace detail

/// Adaptive explicit integration of y' = rhs(x, y) from x_start.
///
/// The step size is controlled on every component of the state with the
/// mixed weight abs_tol + rel_tol*|y_i|, so integral quantities carried as
/// extra components share the error control of the primary unknown.
/// Local errors are held to half that weight so that the error accumulated
/// over long decaying runs stays within a small multiple of the tolerance.
/// After each accepted step `stop(x, y)` is consulted; the trajectory ends on
/// the first step for which it returns true, or exactly at opts.x_end.
/// Every accepted step is recorded. tol.max_iter caps the number of steps.
template <std::size_t N, class Rhs, class Stop>
std::vector<OdeSample<N>> integrate_ode(Rhs&& rhs, double x_start, const OdeState<N>& y0, Stop&& stop,
                                        const ToleranceSpec& tol, const OdeOptions& opts = {}) {
  tol.validate();
  using State = OdeState<N>;
  constexpr double kLocalFraction = 0.5;

  constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
  constexpr double a21 = 1.0 / 5;
  constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
  constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
  constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                   a54 = -212.0 / 729;
  constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                   a65 = -5103.0 / 18656;
  constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784,
                   b6 = 11.0 / 84;
  constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                   e6 = 22.0 / 525, e7 = -1.0 / 40;

  std::vector<OdeSample<N>> out;
  out.push_back({x_start, y0});
  if (stop(x_start, y0) || x_start >= opts.x_end) return out;

  double x = x_start;
  State y = y0;
  State k1 = rhs(x, y);
  double h = std::min(opts.initial_step, opts.x_end - x);
  int steps = 0;

  while (true) {
    const double min_h = 16.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(x));
    if (h < min_h) detail::throw_ode_error(ErrorCode::StepUnderflow, x, "step size underflow");
    if (++steps > tol.max_iter) detail::throw_ode_error(ErrorCode::MaxIterExceeded, x, "too many steps");

    bool clamped = false;
    if (x + h >= opts.x_end) {
      h = opts.x_end - x;
      clamped = true;
    }

    const State k2 = rhs(x + c2 * h, detail::axpy<N>(y, h, {{a21, &k1}}));
    const State k3 = rhs(x + c3 * h, detail::axpy<N>(y, h, {{a31, &k1}, {a32, &k2}}));
    const State k4 = rhs(x + c4 * h, detail::axpy<N>(y, h, {{a41, &k1}, {a42, &k2}, {a43, &k3}}));
    const State k5 =
        rhs(x + c5 * h, detail::axpy<N>(y, h, {{a51, &k1}, {a52, &k2}, {a53, &k3}, {a54, &k4}}));
    const State k6 = rhs(x + h, detail::axpy<N>(y, h, {{a61, &k1}, {a62, &k2}, {a63, &k3}, {a64, &k4}, {a65, &k5}}));
    const State y_new = detail::axpy<N>(y, h, {{b1, &k1}, {b3, &k3}, {b4, &k4}, {b5, &k5}, {b6, &k6}});
    const State k7 = rhs(x + h, y_new);

    double err = 0.0;
    for (std::size_t i = 0; i < N; ++i) {
      const double e = h * (e1 * k1[i] + e3 * k3[i] + e4 * k4[i] + e5 * k5[i] + e6 * k6[i] + e7 * k7[i]);
      const double scale =
          kLocalFraction * (tol.abs_tol + tol.rel_tol * std::max(std::abs(y[i]), std::abs(y_new[i])));
      err = std::max(err, std::abs(e) / scale);
    }
    if (!std::isfinite(err)) {
      h *= 0.25;
      continue;
    }

    if (err <= 1.0) {
      x = clamped ? opts.x_end : x + h;
      y = y_new;
      k1 = k7;
      out.push_back({x, y});
      if (stop(x, y) || x >= opts.x_end) return out;
      if (x - x_start > opts.horizon)
        detail::throw_ode_error(ErrorCode::StopNeverReached, x, "stop condition not reached within horizon");
      const double grow = err == 0.0 ? 5.0 : std::clamp(0.9 * std::pow(err, -0.2), 0.2, 5.0);
      h *= grow;
    } else {
      h *= std::clamp(0.9 * std::pow(err, -0.2), 0.1, 0.9);
    }
  }
}

}  // namespace perpetual
