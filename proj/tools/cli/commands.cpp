#include "cli/commands.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <future>
#include <string>
#include <thread>

#include "cli/output.hpp"
#include "perpetual/merton.hpp"
#include "perpetual/pricer.hpp"

namespace perpetual::cli {

const std::vector<ReferenceRow>& reference_table() {
  // Four-decimal published values; lambda = 0 is the constant-volatility case.
  static const std::vector<ReferenceRow> rows = {
      {0.0, 68.9655, 13.5909}, {0.2, 64.7181, 15.4853}, {0.4, 61.2252, 17.1580}, {0.6, 58.2647, 18.6669},
      {1.2, 51.1474, 22.5461}, {1.6, 47.2975, 24.7444}, {2.0, 44.5433, 26.6804},
  };
  return rows;
}

namespace {

constexpr double kClosedFormTol = 1e-3;
constexpr double kSandwichSlack = 1e-8;  // times E
constexpr double kResidualTol = 1e-6;    // times rE

template <class F>
auto stage(const char* name, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const Error& e) {
    throw CliError(kSolverFailure, std::string(name) + ": " + e.what());
  }
}

FreeBoundarySolution solve(const RunConfig& cfg, const VolatilityModel& model, const SolverConfig& sc) {
  return stage("free boundary", [&] { return solve_free_boundary(model, cfg.market, sc, resolve_method(cfg, model)); });
}

void write_record(std::ostream& out, Format format, const Table& t) {
  if (format == Format::Csv) {
    write_csv(out, t);
    return;
  }
  JsonWriter w(out);
  w.begin_object();
  for (std::size_t i = 0; i < t.columns.size(); ++i) w.field(t.columns[i], t.rows.front()[i]);
  w.end_object();
  out << '\n';
}

void write_table(std::ostream& out, Format format, const Table& t) {
  if (format == Format::Csv)
    write_csv(out, t);
  else
    write_json(out, t);
}

Cell opt(const std::optional<double>& v) { return v ? Cell{*v} : Cell{}; }

double value_at_strike(const RunConfig& cfg, const VolatilityModel& model, const FreeBoundarySolution& sol,
                       const SolverConfig& sc) {
  return stage("pricing", [&] { return price(model, cfg.market, sol, cfg.market.strike, sc); });
}

bool reference_parameters(const RunConfig& cfg) {
  return cfg.market.r == 0.1 && cfg.market.strike == 100.0 && cfg.model.sigma0 == 0.3;
}

const char* trend(double prev, double cur) {
  if (cur < prev) return "down";
  if (cur > prev) return "up";
  return "flat";
}

}  // namespace

int cmd_boundary(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  const auto model = make_model(cfg.model);
  const auto sc = solver_config(cfg);
  const auto sol = solve(cfg, model, sc);

  std::optional<double> rho_plus;
  const double gm = stage("bounds", [&] { return gamma_minus(model, cfg.market.r); });
  const double rho_minus = cfg.market.strike * gm / (1.0 + gm);
  if (model.s_independent())
    rho_plus = stage("bounds", [&] { return bounds_interval(model, cfg.market.r, cfg.market.strike).rho_plus; });

  if (cfg.format == Format::Json) {
    JsonWriter w(out);
    w.begin_object();
    w.field("rho", sol.rho).field("x0", sol.x0);
    w.field("method", std::string(to_string(sol.method))).field("phi_residual", sol.phi_residual);
    w.key("bounds").begin_object().field("rho_plus", opt(rho_plus)).field("rho_minus", rho_minus).end_object();
    if (cfg.verbose) {
      w.key("trajectory").begin_array();
      for (const auto& s : sol.trajectory.samples)
        w.begin_object().field("x", s.x).field("W", s.w).field("int_W", s.int_w).field("int_beta", s.int_beta).end_object();
      w.end_array();
    }
    w.end_object();
    out << '\n';
  } else {
    Table t{{"rho", "x0", "method", "phi_residual", "rho_plus", "rho_minus"}, {}};
    t.rows.push_back({sol.rho, sol.x0, std::string(to_string(sol.method)), sol.phi_residual, opt(rho_plus), rho_minus});
    write_csv(out, t);
    if (cfg.verbose) {
      Table traj{{"x", "W", "int_W", "int_beta"}, {}};
      for (const auto& s : sol.trajectory.samples) traj.rows.push_back({s.x, s.w, s.int_w, s.int_beta});
      out << '\n';
      write_csv(out, traj);
    }
  }

  if (!cfg.check) return kOk;
  bool ok = true;
  if (!(sol.phi_residual <= 10.0 * sc.tol_root.rel_tol)) {
    err << "check: phi residual " << format_number(sol.phi_residual) << " above " << format_number(10.0 * sc.tol_root.rel_tol)
        << '\n';
    ok = false;
  }
  const double slack = kSandwichSlack * cfg.market.strike;
  if (sol.rho > rho_minus + slack || (rho_plus && sol.rho < *rho_plus - slack)) {
    err << "check: rho " << format_number(sol.rho) << " outside the bounds interval\n";
    ok = false;
  }
  return ok ? kOk : kCheckFailed;
}

int cmd_price(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  const auto model = make_model(cfg.model);
  const auto sc = solver_config(cfg);
  const auto sol = solve(cfg, model, sc);
  const double s_min = cfg.grid.s_min.value_or(sol.rho);
  const double s_max = cfg.grid.s_max.value_or(3.0 * cfg.market.strike);
  if (s_min > s_max)
    throw CliError(kUsage, "grid start " + format_number(s_min) + " exceeds grid end " + format_number(s_max));
  if (cfg.grid.n == 1 && s_min != s_max) throw CliError(kUsage, "--n 1 needs --s-min equal to --s-max");
  const auto grid = make_grid(s_min, s_max, cfg.grid.n, cfg.grid.log_spacing);
  const auto curve = stage("pricing", [&] { return build_curve(model, cfg.market, sol, grid, sc); });
  if (cfg.verbose)
    err << "rho " << format_number(sol.rho) << " method " << to_string(sol.method) << " points " << grid.size() << '\n';

  Table t{{"S", "V", "delta", "H", "residual", "V_sub", "V_super"}, {}};
  for (const auto& p : curve.points) t.rows.push_back({p.S, p.V, p.delta, p.H, p.residual, opt(p.v_sub), opt(p.v_super)});
  write_table(out, cfg.format, t);

  if (!cfg.check) return kOk;
  const double slack = kSandwichSlack * cfg.market.strike;
  const double res_tol = kResidualTol * cfg.market.r * cfg.market.strike;
  int bad = 0;
  for (const auto& p : curve.points) {
    const bool sandwich = !p.v_sub || (p.V - *p.v_sub >= -slack && *p.v_super - p.V >= -slack);
    const bool residual_ok = p.S <= sol.rho || std::abs(p.residual) < res_tol;
    if (!sandwich || !residual_ok) {
      if (++bad <= 10)
        err << "check: S=" << format_number(p.S) << (sandwich ? "" : " outside the Merton envelope")
            << (residual_ok ? "" : " residual " + format_number(p.residual)) << '\n';
    }
  }
  if (bad) err << "check: " << bad << " of " << curve.points.size() << " rows failed\n";
  return bad ? kCheckFailed : kOk;
}

int cmd_table(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  if (cfg.check && !reference_parameters(cfg))
    throw CliError(kUsage, "reference values apply to r=0.1, strike=100, sigma0=0.3 only");
  const auto sc = solver_config(cfg);
  Table t{{"lambda", "rho", "V_E", "rho_ref", "V_ref", "rho_dev", "V_dev"}, {}};
  double max_rho_dev = 0.0, max_v_dev = 0.0;
  std::vector<std::string> failures;

  for (double lambda : cfg.lambdas) {
    ModelSpec spec = cfg.model;
    spec.lambda = lambda;
    const auto model = make_model(spec);
    const auto sol = solve(cfg, model, sc);
    const double v = value_at_strike(cfg, model, sol, sc);

    const auto& ref = reference_table();
    const auto it = std::find_if(ref.begin(), ref.end(), [&](const ReferenceRow& r) { return r.lambda == lambda; });
    std::vector<Cell> row{lambda, sol.rho, v, Cell{}, Cell{}, Cell{}, Cell{}};
    if (it != ref.end() && reference_parameters(cfg)) {
      const double dr = sol.rho - it->rho, dv = v - it->value;
      row[3] = it->rho;
      row[4] = it->value;
      row[5] = dr;
      row[6] = dv;
      max_rho_dev = std::max(max_rho_dev, std::abs(dr));
      max_v_dev = std::max(max_v_dev, std::abs(dv));
      if (std::abs(dr) > cfg.tol_rho)
        failures.push_back("lambda=" + format_number(lambda) + " rho deviation " + format_number(dr));
      if (std::abs(dv) > cfg.tol_v)
        failures.push_back("lambda=" + format_number(lambda) + " V(E) deviation " + format_number(dv));
    }
    if (lambda == 0.0) {
      const auto merton = MertonSolution::make(merton_gamma(cfg.market.r, cfg.model.sigma0), cfg.market.strike);
      if (std::abs(sol.rho - merton.boundary) > kClosedFormTol)
        failures.push_back("lambda=0 rho differs from the closed form by " + format_number(sol.rho - merton.boundary));
      if (std::abs(v - merton.price(cfg.market.strike)) > kClosedFormTol)
        failures.push_back("lambda=0 V(E) differs from the closed form by " +
                           format_number(v - merton.price(cfg.market.strike)));
    }
    t.rows.push_back(std::move(row));
  }
  write_table(out, cfg.format, t);

  if (!cfg.check) return kOk;
  err << "check: max |rho - ref| " << format_number(max_rho_dev) << " (tol " << format_number(cfg.tol_rho)
      << "), max |V(E) - ref| " << format_number(max_v_dev) << " (tol " << format_number(cfg.tol_v) << ")\n";
  for (const auto& f : failures) err << "check: " << f << '\n';
  return failures.empty() ? kOk : kCheckFailed;
}

int cmd_sweep(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  struct Row {
    double rho = 0.0;
    double value = 0.0;
    std::string error;
  };
  const auto sc = solver_config(cfg);
  const auto& values = cfg.sweep_values;
  std::vector<Row> rows(values.size());

  auto solve_row = [&](std::size_t i) {
    RunConfig c = cfg;
    const double x = values[i];
    if (cfg.sweep_param == "lambda") c.model.lambda = x;
    else if (cfg.sweep_param == "a") c.model.a = x;
    else if (cfg.sweep_param == "sigma0") c.model.sigma0 = x;
    else c.market.r = x;
    try {
      const auto model = make_model(c.model);
      c.market.validate();
      const auto sol = solve(c, model, sc);
      rows[i].rho = sol.rho;
      rows[i].value = value_at_strike(c, model, sol, sc);
    } catch (const std::exception& e) {
      rows[i].error = e.what();
    }
  };

  // Rows are independent; results land in their own slot so output order is fixed.
  std::atomic<std::size_t> next{0};
  const std::size_t workers =
      std::min<std::size_t>(values.size(), std::max(1u, std::thread::hardware_concurrency()));
  std::vector<std::future<void>> pool;
  for (std::size_t w = 0; w < workers; ++w) {
    pool.push_back(std::async(std::launch::async, [&] {
      for (std::size_t i = next++; i < values.size(); i = next++) solve_row(i);
    }));
  }
  for (auto& f : pool) f.get();

  Table t{{cfg.sweep_param, "rho", "V_E", "rho_trend", "status"}, {}};
  std::optional<double> prev;
  int failed = 0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    const auto& r = rows[i];
    if (!r.error.empty()) {
      ++failed;
      err << "row " << cfg.sweep_param << "=" << format_number(values[i]) << " failed: " << r.error << '\n';
      t.rows.push_back({values[i], Cell{}, Cell{}, Cell{}, std::string("error")});
      continue;
    }
    t.rows.push_back({values[i], r.rho, r.value, prev ? Cell{std::string(trend(*prev, r.rho))} : Cell{}, std::string("ok")});
    prev = r.rho;
  }
  write_table(out, cfg.format, t);
  return failed ? kRowFailure : kOk;
}

int cmd_bounds(const RunConfig& cfg, std::ostream& out, std::ostream&) {
  const auto model = make_model(cfg.model);
  const double E = cfg.market.strike;
  const double gm = stage("bounds", [&] { return gamma_minus(model, cfg.market.r); });
  const auto sub = MertonSolution::make(gm, E);
  std::optional<double> gp, rho_plus, v_super;
  if (model.s_independent()) {
    gp = stage("bounds", [&] { return gamma_plus(model, cfg.market.r); });
    const auto super = MertonSolution::make(*gp, E);
    rho_plus = super.boundary;
    v_super = super.price(E);
  }
  Table t{{"gamma_minus", "gamma_plus", "rho_plus", "rho_minus", "V_sub_E", "V_super_E"}, {}};
  t.rows.push_back({gm, opt(gp), opt(rho_plus), sub.boundary, sub.price(E), opt(v_super)});
  write_record(out, cfg.format, t);
  return kOk;
}

int dispatch(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  switch (cfg.command) {
    case Command::Boundary: return cmd_boundary(cfg, out, err);
    case Command::Price: return cmd_price(cfg, out, err);
    case Command::Table: return cmd_table(cfg, out, err);
    case Command::Sweep: return cmd_sweep(cfg, out, err);
    case Command::Bounds: return cmd_bounds(cfg, out, err);
  }
  return kUsage;
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  try {
    const RunConfig cfg = parse_arguments(argc, argv);
    if (!cfg.output) return dispatch(cfg, out, err);
    std::ofstream file(*cfg.output, std::ios::binary);
    if (!file) throw CliError(kUsage, "cannot open output file '" + *cfg.output + "'");
    const int code = dispatch(cfg, file, err);
    file.close();
    if (!file) throw CliError(kUsage, "failed writing '" + *cfg.output + "'");
    return code;
  } catch (const HelpRequested& h) {
    out << h.text;
    return kOk;
  } catch (const CliError& e) {
    err << "error: " << e.what() << '\n';
    return e.exit_code();
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return e.code() == ErrorCode::InvalidParams ? kUsage : kSolverFailure;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kSolverFailure;
  }
}

}  // namespace perpetual::cli
