#include <cmath>
#include <sstream>

#include "perpetual/error.hpp"
#include "perpetual/numerics.hpp"
#include "perpetual/volatility.hpp"

namespace perpetual {

namespace {

// Psi(x) = sum_k kSeries[k] * s^(k+1), s = x^(1/3). Obtained by substituting
// the series into the ODE and matching powers of s (tests/oracles/psi_series.py).
constexpr std::array<double, 7> kSeries = {
    1.3103706971044483036,    0.91577139404266549425,  0.41142857142857142857,
    0.11448063995020449941,   0.011577494960595462674, -0.0045902440416726131012,
    -0.0016622454383139219944,
};

}  // namespace

double psi_ode_rhs(double x, double psi) {
  return (psi + 1.0) / (2.0 * std::sqrt(x * psi) - x);
}

double PsiTable::small_x_coefficient() { return std::cbrt(1.5 * 1.5); }

double PsiTable::series(double x) {
  const double s = std::cbrt(x);
  double acc = 0.0;
  for (auto it = kSeries.rbegin(); it != kSeries.rend(); ++it) acc = acc * s + *it;
  return acc * s;
}

PsiTable PsiTable::build(const Options& opts) {
  if (!(opts.x_min > 0.0) || !(opts.x_max > opts.x_min) || opts.nodes < 2)
    throw Error(ErrorCode::InvalidParams, "invalid Psi table options");

  PsiTable t;
  t.x_min_ = opts.x_min;
  t.x_max_ = opts.x_max;
  t.log_x_min_ = std::log(opts.x_min);
  t.log_step_ = (std::log(opts.x_max) - t.log_x_min_) / (opts.nodes - 1);

  const std::size_t n = static_cast<std::size_t>(opts.nodes);
  std::vector<double> psi(n);
  psi[0] = series(opts.x_min);

  // Integrate in u = ln x, where dPsi/du = x Psi'(x) stays O(Psi).
  auto rhs = [](double u, const OdeState<1>& y) {
    const double x = std::exp(u);
    return OdeState<1>{x * psi_ode_rhs(x, y[0])};
  };
  auto never = [](double, const OdeState<1>&) { return false; };
  const ToleranceSpec tol{opts.rel_tol, 0.0, 100000};
  for (std::size_t i = 0; i + 1 < n; ++i) {
    OdeOptions o;
    o.x_end = t.log_x_min_ + static_cast<double>(i + 1) * t.log_step_;
    o.initial_step = t.log_step_;
    o.horizon = 2.0 * t.log_step_;
    const auto traj = integrate_ode<1>(rhs, t.log_x_min_ + static_cast<double>(i) * t.log_step_,
                                       OdeState<1>{psi[i]}, never, tol, o);
    psi[i + 1] = traj.back().y[0];
  }

  t.log_psi_.resize(n);
  t.log_slope_.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double x = t.node_x(i);
    t.log_psi_[i] = std::log(psi[i]);
    t.log_slope_[i] = x * psi_ode_rhs(x, psi[i]) / psi[i];
  }

  // Fritsch-Carlson limiter keeps the Hermite interpolant monotone.
  for (std::size_t i = 0; i + 1 < n; ++i) {
    const double secant = (t.log_psi_[i + 1] - t.log_psi_[i]) / t.log_step_;
    if (!(secant > 0.0)) {
      std::ostringstream os;
      os << "Psi not increasing between nodes " << i << " and " << i + 1;
      throw Error(ErrorCode::InvalidParams, os.str());
    }
    const double alpha = t.log_slope_[i] / secant;
    const double beta = t.log_slope_[i + 1] / secant;
    const double norm = alpha * alpha + beta * beta;
    if (norm > 9.0) {
      const double tau = 3.0 / std::sqrt(norm);
      t.log_slope_[i] = tau * alpha * secant;
      t.log_slope_[i + 1] = tau * beta * secant;
    }
  }

  const double psi_max = psi.back();
  t.tail_slope_ = psi_ode_rhs(opts.x_max, psi_max);
  t.tail_intercept_ = psi_max - t.tail_slope_ * opts.x_max;
  return t;
}

std::shared_ptr<const PsiTable> PsiTable::standard() {
  static const std::shared_ptr<const PsiTable> table =
      std::make_shared<const PsiTable>(PsiTable::build(Options{}));
  return table;
}

double PsiTable::node_x(std::size_t i) const {
  return std::exp(log_x_min_ + static_cast<double>(i) * log_step_);
}

double PsiTable::node_value(std::size_t i) const { return std::exp(log_psi_[i]); }

double PsiTable::operator()(double x) const {
  if (x < 0.0 || std::isnan(x)) throw Error(ErrorCode::NegativeArgument, "Psi argument must be >= 0");
  if (x == 0.0) return 0.0;
  if (x < x_min_) return series(x);
  if (x > x_max_) return tail_intercept_ + tail_slope_ * x;

  const double u = (std::log(x) - log_x_min_) / log_step_;
  const std::size_t last = log_psi_.size() - 2;
  const std::size_t i = std::min(static_cast<std::size_t>(std::max(u, 0.0)), last);
  const double tau = u - static_cast<double>(i);
  const double tau2 = tau * tau;
  const double tau3 = tau2 * tau;
  const double h00 = 2.0 * tau3 - 3.0 * tau2 + 1.0;
  const double h10 = tau3 - 2.0 * tau2 + tau;
  const double h01 = -2.0 * tau3 + 3.0 * tau2;
  const double h11 = tau3 - tau2;
  const double v = h00 * log_psi_[i] + h10 * log_step_ * log_slope_[i] + h01 * log_psi_[i + 1] +
                   h11 * log_step_ * log_slope_[i + 1];
  return std::exp(v);
}

double PsiTable::derivative(double x) const {
  if (x < 0.0) throw Error(ErrorCode::NegativeArgument, "Psi argument must be >= 0");
  if (x > x_max_) return tail_slope_;
  if (x == 0.0) return std::numeric_limits<double>::infinity();
  return psi_ode_rhs(x, (*this)(x));
}

}  // namespace perpetual
