#include <cmath>
#include <vector>

#include "doctest.h"
#include "test_support.hpp"
#include "perpetual/merton.hpp"
#include "perpetual/pricer.hpp"

using namespace perpetual;

namespace {

const MarketParams kMarket{0.1, 100.0};
const SolverConfig kCfg{};
const double kGamma = 2.0 / 0.9;

// V(E) for RAPM (sigma0 = 0.3, r = 0.1, E = 100), 30-digit H-form oracle (tests/oracles).
const std::vector<std::pair<double, double>> kRapmValue = {
    {0.2, 15.492696630604826}, {0.4, 17.166835622490701}, {0.6, 18.677369990855879},
    {1.0, 21.343364871483471}, {1.2, 22.540001242672665}, {1.6, 24.72468698524469},
    {2.0, 26.68574308120443},
};

FreeBoundarySolution solve(const VolatilityModel& m) { return solve_free_boundary(m, kMarket, kCfg, default_method(m)); }

}  // namespace

TEST_CASE("price: constant volatility and exercise region") {
  const auto m = VolatilityModel::constant(0.3);
  const auto sol = solve(m);
  CHECK(std::abs(price(m, kMarket, sol, 100.0, kCfg) - 13.5909) < 1e-3);  // published value, lambda = 0
  CHECK(price(m, kMarket, sol, sol.rho, kCfg) == 100.0 - sol.rho);
  CHECK(price(m, kMarket, sol, 20.0, kCfg) == 80.0);
  const auto merton = MertonSolution::make(kGamma, 100.0);
  for (double S : {70.0, 100.0, 150.0, 400.0}) {
    CHECK(price(m, kMarket, sol, S, kCfg) == doctest::Approx(merton.price(S)).epsilon(1e-8));
  }
  CHECK(code_of([&] { price(m, kMarket, sol, 0.0, kCfg); }) == ErrorCode::NonPositiveAsset);
}

TEST_CASE("price: RAPM at the strike") {
  for (const auto& [lam, v] : kRapmValue) {
    const auto m = VolatilityModel::rapm(0.3, lam);
    CHECK(price(m, kMarket, solve(m), 100.0, kCfg) == doctest::Approx(v).epsilon(1e-8));
  }
  const auto m12 = VolatilityModel::rapm(0.3, 1.2);
  CHECK(std::abs(price(m12, kMarket, solve(m12), 100.0, kCfg) - 22.5461) < 0.05);  // published value
}

TEST_CASE("price_h_form") {
  const auto c = VolatilityModel::constant(0.3);
  const auto merton = MertonSolution::make(kGamma, 100.0);
  for (double S : {80.0, 100.0, 150.0}) {
    CHECK(price_h_form(c, kMarket, merton.boundary, S, kCfg) == doctest::Approx(merton.price(S)).epsilon(1e-8));
  }
  const auto m2 = VolatilityModel::rapm(0.3, 2.0);
  const auto s2 = solve(m2);
  CHECK(price_h_form(m2, kMarket, s2.rho, s2.rho, kCfg) == doctest::Approx(100.0 - s2.rho).epsilon(1e-12));
  CHECK(std::abs(price_h_form(m2, kMarket, s2.rho, 100.0, kCfg) - 26.6804) < 0.05);  // published value
  for (double lam : {0.2, 1.0, 2.0}) {
    const auto m = VolatilityModel::rapm(0.3, lam);
    const auto sol = solve(m);
    for (double k : {1.1, 2.0, 5.0}) {
      const double S = k * sol.rho;
      CHECK(price_h_form(m, kMarket, sol.rho, S, kCfg) == doctest::Approx(price(m, kMarket, sol, S, kCfg)).epsilon(1e-9));
    }
  }
  CHECK(code_of([] { price_h_form(VolatilityModel::barles_soner(0.3, 0.1), kMarket, 50.0, 100.0, kCfg); }) ==
        ErrorCode::NotSIndependent);
}

TEST_CASE("delta: smooth pasting, decay and the Merton derivative") {
  const auto c = VolatilityModel::constant(0.3);
  const auto sc = solve(c);
  const auto merton = MertonSolution::make(kGamma, 100.0);
  CHECK(delta(c, kMarket, sc, 100.0, kCfg) == doctest::Approx(merton.delta(100.0)).epsilon(1e-8));
  CHECK(delta(c, kMarket, sc, 30.0, kCfg) == -1.0);
  for (double lam : {0.0, 1.0, 2.0}) {
    const auto m = VolatilityModel::rapm(0.3, lam);
    const auto sol = solve(m);
    CHECK(std::abs(delta(m, kMarket, sol, sol.rho, kCfg) + 1.0) < 1e-6);
    CHECK(std::abs(delta(m, kMarket, sol, 1e6, kCfg)) < 1e-6);
    for (double k : {1.0, 1.3, 3.0, 20.0}) {
      const double d = delta(m, kMarket, sol, k * sol.rho, kCfg);
      CHECK(d >= -1.0 - 1e-9);
      CHECK(d <= 0.0);
    }
  }
}

TEST_CASE("gamma_h") {
  const auto c = VolatilityModel::constant(0.3);
  const auto sc = solve(c);
  CHECK(gamma_h(c, kMarket, sc, sc.rho, kCfg) == doctest::Approx(1.0 + kGamma).epsilon(1e-8));
  CHECK(gamma_h(c, kMarket, sc, 10.0, kCfg) == 0.0);
  for (const auto& m : {VolatilityModel::rapm(0.3, 1.0), VolatilityModel::barles_soner(0.3, 0.05)}) {
    const auto sol = solve(m);
    CHECK(gamma_h(m, kMarket, sol, 1e8, kCfg) < 1e-6);
    const double S = 1.2 * sol.rho, h = 1e-3 * S;
    const double fd =
        (price(m, kMarket, sol, S + h, kCfg) - 2.0 * price(m, kMarket, sol, S, kCfg) + price(m, kMarket, sol, S - h, kCfg)) *
        S / (h * h);
    CHECK(gamma_h(m, kMarket, sol, S, kCfg) == doctest::Approx(fd).epsilon(1e-4));
    CHECK(gamma_h(m, kMarket, sol, S, kCfg) > 0.0);
  }
}

TEST_CASE("residual: solved models and a perturbed negative control") {
  const double rE = kMarket.r * kMarket.strike;
  const auto c = VolatilityModel::constant(0.3);
  CHECK(std::abs(residual(c, kMarket, solve(c), 150.0, kCfg)) < 1e-8 * rE);
  const auto m = VolatilityModel::rapm(0.3, 1.0);
  const auto sol = solve(m);
  for (double k : {1.1, 2.0, 5.0}) CHECK(std::abs(residual(m, kMarket, sol, k * sol.rho, kCfg)) < 1e-6 * rE);
  CHECK(residual(m, kMarket, sol, 0.5 * sol.rho, kCfg) == -rE);

  // Boundary moved to rho + 1: points just above the true boundary now sit in
  // the perturbed exercise region where the obstacle residual is -rE.
  const auto bad = solution_at(m, kMarket, std::log(sol.rho + 1.0), kCfg);
  CHECK(bad.phi_residual > 1e-3);
  CHECK(std::abs(residual(m, kMarket, bad, sol.rho + 0.5, kCfg)) > 0.5 * rE);
  // The start condition still gives V - S V' = E there, but value matching and
  // smooth pasting both break.
  const double v = continuation_value(m, kMarket, bad, bad.rho, kCfg);
  const double d = delta(m, kMarket, bad, bad.rho, kCfg);
  CHECK(std::abs(v - bad.rho * d - 100.0) < 1e-6 * 100.0);
  CHECK(std::abs(v - (100.0 - bad.rho)) > 1e-2);
  CHECK(std::abs(d + 1.0) > 1e-3);
}

TEST_CASE("pasting identities at the boundary") {
  for (const auto& m : {VolatilityModel::constant(0.3), VolatilityModel::rapm(0.3, 0.6), VolatilityModel::rapm(0.3, 2.0),
                        VolatilityModel::barles_soner(0.3, 0.01), VolatilityModel::barles_soner(0.3, 0.05)}) {
    const auto sol = solve(m);
    const double v = continuation_value(m, kMarket, sol, sol.rho, kCfg);
    const double d = delta(m, kMarket, sol, sol.rho, kCfg);
    CHECK(std::abs(v - (100.0 - sol.rho)) < 1e-6 * 100.0);
    CHECK(std::abs(d + 1.0) < 1e-5);
    CHECK(std::abs(v - sol.rho * d - 100.0) < 1e-6 * 100.0);
  }
}

TEST_CASE("build_curve: sandwich, exercise rows and Merton reduction") {
  const auto m = VolatilityModel::rapm(0.3, 1.0);
  const auto sol = solve(m);
  auto grid = make_grid(20.0, 300.0, 120, true);
  const auto curve = build_curve(m, kMarket, sol, grid, kCfg);
  REQUIRE(curve.points.size() == grid.size());
  CHECK(curve.rho == sol.rho);
  CHECK(curve.strike == 100.0);
  for (const auto& p : curve.points) {
    REQUIRE(p.v_sub.has_value());
    REQUIRE(p.v_super.has_value());
    CHECK(*p.v_sub - p.V <= 1e-8 * 100.0);
    CHECK(p.V - *p.v_super <= 1e-8 * 100.0);
    if (p.S < sol.rho) {
      CHECK(p.V == 100.0 - p.S);
      CHECK(p.delta == -1.0);
      CHECK(p.H == 0.0);
    } else {
      CHECK(p.V == doctest::Approx(price(m, kMarket, sol, p.S, kCfg)).epsilon(1e-9));
      CHECK(p.delta == doctest::Approx(delta(m, kMarket, sol, p.S, kCfg)).epsilon(1e-8));
      CHECK(std::abs(p.residual) < 1e-6 * 10.0);
    }
  }
  for (std::size_t i = 1; i < curve.points.size(); ++i) {
    CHECK(curve.points[i].V < curve.points[i - 1].V);
    CHECK(curve.points[i].delta >= curve.points[i - 1].delta - 1e-9);
  }
  for (std::size_t i = 1; i + 1 < curve.points.size(); ++i) {
    const auto& a = curve.points[i - 1];
    const auto& b = curve.points[i];
    const auto& c = curve.points[i + 1];
    const double second = (c.V - b.V) / (c.S - b.S) - (b.V - a.V) / (b.S - a.S);
    CHECK(second >= -1e-8 * 100.0);
  }

  const auto c0 = VolatilityModel::rapm(0.3, 0.0);
  const auto s0 = solve(c0);
  const auto merton = MertonSolution::make(kGamma, 100.0);
  const auto lin = make_grid(s0.rho, 1000.0, 60, false);
  for (const auto& p : build_curve(c0, kMarket, s0, lin, kCfg).points) {
    CHECK(p.V == doctest::Approx(merton.price(p.S)).epsilon(1e-8));
    CHECK(*p.v_sub == doctest::Approx(*p.v_super).epsilon(1e-15));
  }

  const auto bs = VolatilityModel::barles_soner(0.3, 0.05);
  const auto bcurve = build_curve(bs, kMarket, solve(bs), grid, kCfg);
  CHECK_FALSE(bcurve.points.front().v_sub.has_value());

  const std::vector<double> unsorted = {50.0, 40.0};
  CHECK(code_of([&] { build_curve(m, kMarket, sol, unsorted, kCfg); }) == ErrorCode::InvalidParams);
  const std::vector<double> negative = {-1.0, 40.0};
  CHECK(code_of([&] { build_curve(m, kMarket, sol, negative, kCfg); }) == ErrorCode::InvalidParams);
}

TEST_CASE("make_grid") {
  const auto lin = make_grid(10.0, 20.0, 3, false);
  REQUIRE(lin.size() == 3);
  CHECK(lin[1] == 15.0);
  const auto lg = make_grid(1.0, 100.0, 3, true);
  CHECK(lg.front() == 1.0);
  CHECK(lg[1] == doctest::Approx(10.0).epsilon(1e-14));
  CHECK(lg.back() == 100.0);
  CHECK(make_grid(5.0, 5.0, 1, true).size() == 1);
  CHECK(code_of([] { make_grid(20.0, 10.0, 5, false); }) == ErrorCode::InvalidParams);
  CHECK(code_of([] { make_grid(-1.0, 10.0, 5, true); }) == ErrorCode::InvalidParams);
}

TEST_CASE("price decays at large S for every reference parameter set") {
  for (double lam : {0.0, 0.2, 0.4, 0.6, 1.2, 1.6, 2.0}) {
    const auto m = VolatilityModel::rapm(0.3, lam);
    const auto sol = solve(m);
    CHECK(price(m, kMarket, sol, 1000.0, kCfg) < price(m, kMarket, sol, 200.0, kCfg) / 10.0);
  }
}
