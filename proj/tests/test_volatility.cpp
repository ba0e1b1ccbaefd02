#include <cmath>
#include <vector>

#include "doctest.h"
#include "test_support.hpp"
#include "perpetual/volatility.hpp"

using namespace perpetual;

namespace {

std::vector<double> log_grid(double lo, double hi, int n) {
  std::vector<double> g(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) g[static_cast<std::size_t>(i)] = lo * std::pow(hi / lo, double(i) / (n - 1));
  return g;
}

std::vector<VolatilityModel> all_models() {
  return {VolatilityModel::constant(0.3),           VolatilityModel::rapm(0.3, 1.0),
          VolatilityModel::rapm(0.2, 2.0),          VolatilityModel::barles_soner(0.3, 0.05),
          VolatilityModel::barles_soner(0.25, 0.5)};
}

}  // namespace

TEST_CASE("variance_sq for the three models") {
  const auto c = VolatilityModel::constant(0.3);
  CHECK(c.variance_sq(50.0, 3.0) == doctest::Approx(0.09).epsilon(1e-15));
  CHECK(c.variance_sq(1e-3, -4.0) == doctest::Approx(0.09).epsilon(1e-15));
  CHECK(VolatilityModel::rapm(0.3, 1.0).variance_sq(80.0, 1.0) == doctest::Approx(0.18).epsilon(1e-15));
  for (double a : {0.0, 0.1, 2.0}) CHECK(VolatilityModel::barles_soner(0.3, a).variance_sq(70.0, 0.0) == 0.09);
  // H <= 0 freezes the volatility at its H = 0 value.
  CHECK(VolatilityModel::rapm(0.3, 1.0).variance_sq(1.0, -8.0) == doctest::Approx(0.09));
  CHECK(VolatilityModel::barles_soner(0.3, 0.1).variance_sq(60.0, -2.0) == doctest::Approx(0.09));
  CHECK(code_of([&] { c.variance_sq(0.0, 1.0); }) == ErrorCode::NonPositiveAsset);
  CHECK(code_of([&] { VolatilityModel::rapm(0.3, 1.0).variance_sq(-1.0, 1.0); }) == ErrorCode::NonPositiveAsset);
}

TEST_CASE("Barles-Soner variance evaluates Psi at a^2 S H") {
  const auto m = VolatilityModel::barles_soner(0.3, 0.1);
  const auto& psi = *PsiTable::standard();
  CHECK(m.variance_sq(50.0, 2.0) == doctest::Approx(0.09 * (1.0 + psi(0.01 * 50.0 * 2.0))).epsilon(1e-15));
}

TEST_CASE("model construction rejects invalid parameters") {
  CHECK(code_of([] { VolatilityModel::constant(0.0); }) == ErrorCode::InvalidParams);
  CHECK(code_of([] { VolatilityModel::rapm(0.3, -1.0); }) == ErrorCode::InvalidParams);
  CHECK(code_of([] { VolatilityModel::barles_soner(0.3, -0.1); }) == ErrorCode::InvalidParams);
  CHECK(parse_volatility_kind("barles-soner") == VolatilityKind::BarlesSoner);
  CHECK(code_of([] { parse_volatility_kind("heston"); }) == ErrorCode::InvalidParams);
  CHECK(VolatilityModel::rapm(0.3, 1.0).s_independent());
  CHECK(VolatilityModel::constant(0.3).s_independent());
  CHECK_FALSE(VolatilityModel::barles_soner(0.3, 0.1).s_independent());
}

TEST_CASE("half_sigma_sq_h examples") {
  CHECK(VolatilityModel::constant(0.3).half_sigma_sq_h(1.0, 2.0) == doctest::Approx(0.09).epsilon(1e-15));
  CHECK(VolatilityModel::rapm(0.3, 1.0).half_sigma_sq_h(1.0, 1.0) == doctest::Approx(0.09).epsilon(1e-15));
  for (const auto& m : all_models()) CHECK(m.half_sigma_sq_h(42.0, 0.0) == 0.0);
}

TEST_CASE("d_variance_h: analytic RAPM derivative against hand value and finite differences") {
  CHECK(VolatilityModel::constant(0.3).d_variance_h(1.0, 5.0) == doctest::Approx(0.09).epsilon(1e-15));
  // sigma0^2 (1 + 4/3 lambda H^(1/3)) at H = 1, lambda = 1: 0.09 * 7/3 = 0.21.
  // Central difference oracle (tests/oracles): 0.21000000000048755.
  const auto rapm = VolatilityModel::rapm(0.3, 1.0);
  CHECK(std::abs(rapm.d_variance_h(1.0, 1.0) - 0.21) < 1e-15);
  for (double H : {1e-6, 0.3, 2.0, 50.0}) {
    const double h = 1e-6 * H;
    const double fd = (rapm.variance_sq(1.0, H + h) * (H + h) - rapm.variance_sq(1.0, H - h) * (H - h)) / (2 * h);
    CHECK(rapm.d_variance_h(1.0, H) == doctest::Approx(fd).epsilon(1e-7));
    CHECK(VolatilityModel::rapm(0.3, 0.0).d_variance_h(1.0, H) == 0.09);
  }
  CHECK(code_of([&] { rapm.d_variance_h(1.0, 0.0); }) == ErrorCode::NonPositiveGamma);
}

TEST_CASE("d_variance_h: Barles-Soner difference quotient matches the chain rule") {
  const auto m = VolatilityModel::barles_soner(0.3, 0.1);
  const auto& psi = *PsiTable::standard();
  for (double S : {40.0, 100.0}) {
    for (double H : {1e-3, 0.5, 3.0}) {
      const double k = 0.01 * S;
      const double exact = 0.09 * (1.0 + psi(k * H) + k * H * psi.derivative(k * H));
      CHECK(m.d_variance_h(S, H) == doctest::Approx(exact).epsilon(1e-6));
    }
  }
}

TEST_CASE("beta examples") {
  CHECK(VolatilityModel::constant(0.3).beta(0.0, 0.1) == doctest::Approx(0.2 / 0.09).epsilon(1e-15));
  for (const auto& m : all_models()) CHECK(m.beta(3.0, 0.0) == 0.0);
  // Bisection oracle on 0.045 (1 + H^(1/3)) H = 0.1 over (0, 2.2222].
  CHECK(std::abs(VolatilityModel::rapm(0.3, 1.0).beta(0.0, 0.1) - 1.0944064192288172) < 1e-13);
  // Linear branch for w <= 0.
  CHECK(VolatilityModel::rapm(0.3, 1.0).beta(0.0, -0.1) == doctest::Approx(-0.2 / 0.09));
  CHECK(VolatilityModel::barles_soner(0.3, 0.1).beta(4.0, -0.05) == doctest::Approx(-0.1 / 0.09));
}

TEST_CASE("beta: monotone, ratio bound and round trip on a 50x50 (x, w) grid") {
  const auto ws = log_grid(1e-6, 1e3, 50);
  std::vector<double> xs(50);
  for (int i = 0; i < 50; ++i) xs[static_cast<std::size_t>(i)] = -5.0 + 15.0 * i / 49.0;
  for (const auto& m : all_models()) {
    const double bound = 2.0 / (m.sigma0() * m.sigma0());
    for (double x : xs) {
      double prev = 0.0;
      for (double w : ws) {
        const double b = m.beta(x, w);
        CHECK(b >= prev);
        CHECK(b / w <= bound * (1.0 + 1e-14));
        CHECK(m.half_sigma_sq_h(std::exp(x), b) == doctest::Approx(w).epsilon(1e-9));
        const double h = 1e-6 * w;
        const double slope = (m.beta(x, w + h) - m.beta(x, w - h)) / (2.0 * h);
        CHECK(slope <= bound + 1e-6);
        prev = b;
      }
    }
  }
}

TEST_CASE("RAPM with lambda = 0 and Barles-Soner with a = 0 coincide with Constant") {
  const auto c = VolatilityModel::constant(0.3);
  const auto r0 = VolatilityModel::rapm(0.3, 0.0);
  const auto b0 = VolatilityModel::barles_soner(0.3, 0.0);
  for (double H : {1e-4, 0.7, 12.0}) {
    CHECK(r0.variance_sq(5.0, H) == c.variance_sq(5.0, H));
    CHECK(b0.variance_sq(5.0, H) == c.variance_sq(5.0, H));
    CHECK(r0.d_variance_h(5.0, H) == c.d_variance_h(5.0, H));
  }
  for (double w : {1e-5, 0.15, 40.0}) {
    CHECK(r0.beta(1.0, w) == c.beta(1.0, w));
    CHECK(b0.beta(1.0, w) == c.beta(1.0, w));
  }
}

TEST_CASE("Psi: boundary value, domain and high-precision references") {
  const auto& psi = *PsiTable::standard();
  CHECK(psi(0.0) == 0.0);
  CHECK(code_of([&] { psi(-1e-3); }) == ErrorCode::NegativeArgument);
  // mpmath ODE solution at 25 digits (tests/oracles/compute_oracles.py --psi).
  const std::vector<std::pair<double, double>> ref = {
      {1e-8, 0.002827362837672477744}, {1e-6, 0.01319569668497972031}, {1e-3, 0.14061777130720402168},
      {1.0, 2.7578085847640828544},    {10.0, 13.614491137088537257},  {100.0, 105.93981963732509037},
  };
  for (const auto& [x, v] : ref) CHECK(psi(x) == doctest::Approx(v).epsilon(1e-10));
}

TEST_CASE("Psi: small-x behaviour follows c x^(1/3) + d x^(2/3)") {
  const double c = PsiTable::small_x_coefficient();
  CHECK(c == doctest::Approx(1.3103706971044483).epsilon(1e-15));
  // d = 4 sqrt(c) / 5 from the next order of the series.
  const double d = 0.8 * std::sqrt(c);
  const auto& psi = *PsiTable::standard();
  for (double x : log_grid(1e-14, 1e-6, 30)) {
    const double s = std::cbrt(x);
    CHECK(std::abs(psi(x) / s - c - d * s) < 0.5 * s * s);
  }
  // The ratio itself approaches c only as fast as d x^(1/3).
  CHECK(std::abs(psi(1e-16) / std::cbrt(1e-16) - c) < 1e-4);
}

TEST_CASE("Psi table: seed, monotonicity and doubling") {
  const auto& t = *PsiTable::standard();
  CHECK(t.size() == 2000);
  CHECK(t.node_value(0) == doctest::Approx(PsiTable::series(t.x_min())).epsilon(1e-8));
  for (std::size_t i = 1; i < t.size(); ++i) CHECK(t.node_value(i) > t.node_value(i - 1));
  for (double x : log_grid(1e-12, 1e8, 200)) {
    CHECK(t(2.0 * x) > t(x));
    CHECK(t(x) > 0.0);
  }
  // Beyond x_max Psi grows linearly (Psi(x) ~ x).
  CHECK(t.tail_slope() == doctest::Approx(1.0).epsilon(1e-2));
}
