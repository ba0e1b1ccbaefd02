#pragma once

#include <memory>
#include <string_view>
#include <vector>

namespace perpetual {

/// Tabulated solution of Psi'(x) = (Psi + 1) / (2 sqrt(x Psi) - x), Psi(0) = 0,
/// the utility-indifference function of the Barles-Soner volatility.
///
/// Nodes are logarithmically spaced on [x_min, x_max] and interpolated with a
/// monotone cubic Hermite scheme in (ln x, ln Psi). Below x_min the power series
/// in x^(1/3) is used, beyond x_max the tangent line at x_max.
class PsiTable {
 public:
  struct Options {
    double x_min = 1e-8;
    double x_max = 1e6;
    int nodes = 2000;
    double rel_tol = 1e-13;
  };

  /// Leading coefficient of Psi(x) ~ c x^(1/3) as x -> 0, c = (3/2)^(2/3).
  static double small_x_coefficient();
  /// Truncated power series of Psi in x^(1/3), valid for small x.
  static double series(double x);

  static PsiTable build(const Options& opts);
  /// Process-wide table with default options, built on first use.
  static std::shared_ptr<const PsiTable> standard();

  /// Throws Error(NegativeArgument) for x < 0.
  double operator()(double x) const;
  /// Psi'(x) from the defining ODE evaluated on the interpolated value.
  double derivative(double x) const;

  double x_min() const { return x_min_; }
  double x_max() const { return x_max_; }
  std::size_t size() const { return log_psi_.size(); }
  double node_x(std::size_t i) const;
  double node_value(std::size_t i) const;
  double tail_slope() const { return tail_slope_; }
  double tail_intercept() const { return tail_intercept_; }

 private:
  PsiTable() = default;

  double x_min_ = 0.0;
  double x_max_ = 0.0;
  double log_x_min_ = 0.0;
  double log_step_ = 0.0;
  std::vector<double> log_psi_;
  std::vector<double> log_slope_;  // d ln Psi / d ln x at nodes (after limiting)
  double tail_slope_ = 0.0;
  double tail_intercept_ = 0.0;
};

/// Right-hand side of the Psi ODE, Psi'(x). Requires x > 0 and Psi > 0.
double psi_ode_rhs(double x, double psi);

enum class VolatilityKind { Constant, Rapm, BarlesSoner };

std::string_view to_string(VolatilityKind kind) noexcept;
/// Accepts "constant", "rapm", "barles-soner" (also "barles_soner", "bs").
VolatilityKind parse_volatility_kind(std::string_view name);

/// Volatility sigma(S, H) with H = S * d^2V/dS^2.
///
/// sigma(S, H)^2 is nondecreasing in H >= 0 and bounded below by sigma0^2;
/// for H <= 0 it is frozen at its H = 0 value, which makes the map
/// H -> sigma^2 H / 2 strictly increasing on the whole line.
class VolatilityModel {
 public:
  static VolatilityModel constant(double sigma0);
  static VolatilityModel rapm(double sigma0, double lambda);
  static VolatilityModel barles_soner(double sigma0, double a,
                                      std::shared_ptr<const PsiTable> table = PsiTable::standard());

  VolatilityKind kind() const { return kind_; }
  double sigma0() const { return sigma0_; }
  double lambda() const { return lambda_; }
  double a() const { return a_; }
  const PsiTable* psi_table() const { return psi_.get(); }

  /// True when sigma depends on H only.
  bool s_independent() const { return kind_ != VolatilityKind::BarlesSoner; }

  /// sigma(S, H)^2. Throws NonPositiveAsset for S <= 0.
  double variance_sq(double S, double H) const;
  /// w = sigma(S, H)^2 H / 2.
  double half_sigma_sq_h(double S, double H) const;
  /// d/dH (sigma(S, H)^2 H) for H > 0. Throws NonPositiveGamma for H <= 0.
  double d_variance_h(double S, double H) const;
  /// Inverse of H -> half_sigma_sq_h(e^x, H). Linear (2w / sigma(S,0)^2) for w <= 0.
  /// Throws InversionFailed if the bracket [0, 2w/sigma0^2] carries no root.
  double beta(double x, double w) const;

 private:
  VolatilityModel(VolatilityKind kind, double sigma0, double lambda, double a,
                  std::shared_ptr<const PsiTable> psi);

  double beta_rapm(double w) const;
  double beta_generic(double x, double w) const;

  VolatilityKind kind_;
  double sigma0_;
  double lambda_;
  double a_;
  std::shared_ptr<const PsiTable> psi_;
};

}  // namespace perpetual
