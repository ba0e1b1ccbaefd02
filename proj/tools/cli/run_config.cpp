#include "cli/run_config.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>

#include "CLI11.hpp"

namespace perpetual::cli {

namespace {

[[noreturn]] void usage(const std::string& what) { throw CliError(kUsage, what); }

template <class T>
T get_as(const nlohmann::json& v, const std::string& key) {
  try {
    return v.get<T>();
  } catch (const nlohmann::json::exception&) {
    usage("config key '" + key + "' has the wrong type");
  }
}

double get_number(const nlohmann::json& v, const std::string& key) {
  if (!v.is_number()) usage("config key '" + key + "' must be a number");
  return v.get<double>();
}

std::vector<double> get_numbers(const nlohmann::json& v, const std::string& key) {
  if (!v.is_array()) usage("config key '" + key + "' must be an array of numbers");
  std::vector<double> out;
  for (const auto& x : v) out.push_back(get_number(x, key));
  return out;
}

// Comma-separated numbers; an empty string is an empty list.
std::vector<double> parse_list(const std::string& flag, const std::string& text) {
  std::vector<double> out;
  if (text.empty()) return out;
  std::size_t start = 0;
  while (true) {
    const std::size_t end = std::min(text.find(',', start), text.size());
    const std::string item = text.substr(start, end - start);
    double v = 0.0;
    const auto res = std::from_chars(item.data(), item.data() + item.size(), v);
    if (item.empty() || res.ec != std::errc() || res.ptr != item.data() + item.size())
      usage(flag + ": cannot read '" + item + "' as a number");
    out.push_back(v);
    if (end == text.size()) return out;
    start = end + 1;
  }
}

VolatilityKind parse_kind(const std::string& name) {
  try {
    return parse_volatility_kind(name);
  } catch (const Error&) {
    usage("unknown model '" + name + "' (expected constant, rapm or barles-soner)");
  }
}

}  // namespace

Command parse_command(const std::string& name) {
  if (name == "boundary") return Command::Boundary;
  if (name == "price") return Command::Price;
  if (name == "table") return Command::Table;
  if (name == "sweep") return Command::Sweep;
  if (name == "bounds") return Command::Bounds;
  usage("unknown command '" + name + "'");
}

std::string to_string(Command c) {
  switch (c) {
    case Command::Boundary: return "boundary";
    case Command::Price: return "price";
    case Command::Table: return "table";
    case Command::Sweep: return "sweep";
    case Command::Bounds: return "bounds";
  }
  return "?";
}

Format parse_format(const std::string& name) {
  if (name == "csv") return Format::Csv;
  if (name == "json") return Format::Json;
  usage("unknown format '" + name + "' (expected csv or json)");
}

std::optional<Method> parse_method(const std::string& name) {
  if (name == "auto") return std::nullopt;
  if (name == "general") return Method::GeneralOde;
  if (name == "w-quad") return Method::WQuadrature;
  if (name == "h-quad") return Method::HQuadrature;
  usage("unknown method '" + name + "' (expected general, w-quad, h-quad or auto)");
}

void apply_json(RunConfig& cfg, const nlohmann::json& j) {
  if (!j.is_object()) usage("config file must hold a JSON object");
  for (const auto& [raw_key, v] : j.items()) {
    std::string key = raw_key;
    std::replace(key.begin(), key.end(), '-', '_');
    if (key == "model") cfg.model.kind = parse_kind(get_as<std::string>(v, key));
    else if (key == "sigma0") cfg.model.sigma0 = get_number(v, key);
    else if (key == "lambda") cfg.model.lambda = get_number(v, key);
    else if (key == "a") cfg.model.a = get_number(v, key);
    else if (key == "r") cfg.market.r = get_number(v, key);
    else if (key == "strike") cfg.market.strike = get_number(v, key);
    else if (key == "method") cfg.method = parse_method(get_as<std::string>(v, key));
    else if (key == "tol") cfg.tol = get_number(v, key);
    else if (key == "s_min") cfg.grid.s_min = get_number(v, key);
    else if (key == "s_max") cfg.grid.s_max = get_number(v, key);
    else if (key == "n") {
      if (!v.is_number_integer()) usage("config key 'n' must be an integer");
      cfg.grid.n = v.get<int>();
    } else if (key == "log_grid") cfg.grid.log_spacing = get_as<bool>(v, key);
    else if (key == "format") cfg.format = parse_format(get_as<std::string>(v, key));
    else if (key == "output") cfg.output = get_as<std::string>(v, key);
    else if (key == "check") cfg.check = get_as<bool>(v, key);
    else if (key == "verbose") cfg.verbose = get_as<bool>(v, key);
    else if (key == "tol_rho") cfg.tol_rho = get_number(v, key);
    else if (key == "tol_v") cfg.tol_v = get_number(v, key);
    else if (key == "lambdas") cfg.lambdas = get_numbers(v, key);
    else if (key == "param") cfg.sweep_param = get_as<std::string>(v, key);
    else if (key == "values") cfg.sweep_values = get_numbers(v, key);
    else usage("unknown config key '" + raw_key + "'");
  }
}

void apply_json_file(RunConfig& cfg, const std::string& path) {
  std::ifstream in(path);
  if (!in) usage("cannot open config file '" + path + "'");
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    usage("config file '" + path + "': " + e.what());
  }
  apply_json(cfg, j);
}

void validate(const RunConfig& cfg) {
  const auto& m = cfg.model;
  if (!(m.sigma0 > 0.0)) usage("--sigma0 must be positive");
  if (!(m.lambda >= 0.0)) usage("--lambda must be nonnegative");
  if (!(m.a >= 0.0)) usage("--a must be nonnegative");
  if (!(cfg.market.r > 0.0)) usage("--r must be positive");
  if (!(cfg.market.strike > 0.0)) usage("--strike must be positive");
  if (cfg.tol && !(*cfg.tol > 0.0 && *cfg.tol < 1.0)) usage("--tol must lie in (0, 1)");
  if (cfg.method && *cfg.method != Method::GeneralOde && m.kind == VolatilityKind::BarlesSoner)
    usage("--method w-quad and h-quad need an S-independent model");

  const auto& g = cfg.grid;
  if (g.n < 1) usage("--n must be at least 1");
  if (g.s_min && !(*g.s_min > 0.0)) usage("--s-min must be positive");
  if (g.s_max && !(*g.s_max > 0.0)) usage("--s-max must be positive");
  if (g.s_min && g.s_max && *g.s_min > *g.s_max) usage("--s-min exceeds --s-max");

  if (cfg.command == Command::Table) {
    if (m.kind != VolatilityKind::Rapm) usage("table runs the rapm model only");
    if (cfg.lambdas.empty()) usage("table needs at least one lambda");
    for (double l : cfg.lambdas)
      if (!(l >= 0.0)) usage("table lambdas must be nonnegative");
  }
  if (!(cfg.tol_rho > 0.0) || !(cfg.tol_v > 0.0)) usage("--tol-rho and --tol-v must be positive");

  if (cfg.command == Command::Sweep) {
    const auto& p = cfg.sweep_param;
    if (p != "lambda" && p != "a" && p != "sigma0" && p != "r")
      usage("--param must be one of lambda, a, sigma0, r");
    if (cfg.sweep_values.empty()) usage("sweep needs at least one value");
    if (p == "lambda" && m.kind != VolatilityKind::Rapm) usage("sweeping lambda needs --model rapm");
    if (p == "a" && m.kind != VolatilityKind::BarlesSoner) usage("sweeping a needs --model barles-soner");
  }
}

VolatilityModel make_model(const ModelSpec& spec) {
  switch (spec.kind) {
    case VolatilityKind::Constant: return VolatilityModel::constant(spec.sigma0);
    case VolatilityKind::Rapm: return VolatilityModel::rapm(spec.sigma0, spec.lambda);
    case VolatilityKind::BarlesSoner: return VolatilityModel::barles_soner(spec.sigma0, spec.a);
  }
  usage("unknown model");
}

SolverConfig solver_config(const RunConfig& cfg) {
  SolverConfig sc;
  if (cfg.tol) {
    sc.tol_root.rel_tol = *cfg.tol;
    sc.tol_ode.rel_tol = *cfg.tol / 100.0;
    sc.tol_quad.rel_tol = *cfg.tol / 100.0;
  }
  return sc;
}

Method resolve_method(const RunConfig& cfg, const VolatilityModel& model) {
  return cfg.method ? *cfg.method : default_method(model);
}

RunConfig parse_arguments(int argc, const char* const* argv) {
  CLI::App app{"Perpetual American put under nonlinear Black-Scholes volatility", "perpetual"};
  app.require_subcommand(1);
  app.fallthrough();

  std::string config_path, model, method, format, output, param;
  double sigma0 = 0, lambda = 0, a = 0, r = 0, strike = 0, tol = 0, s_min = 0, s_max = 0, tol_rho = 0, tol_v = 0;
  int n = 0;
  std::string lambdas, values;

  auto* o_config = app.add_option("--config", config_path, "JSON file with settings; flags override it");
  auto* o_model = app.add_option("--model", model, "constant | rapm | barles-soner");
  auto* o_sigma0 = app.add_option("--sigma0", sigma0, "base volatility");
  auto* o_lambda = app.add_option("--lambda", lambda, "RAPM risk premium coefficient");
  auto* o_a = app.add_option("--a", a, "Barles-Soner transaction cost scale");
  auto* o_r = app.add_option("--r", r, "risk-free rate");
  auto* o_strike = app.add_option("--strike", strike, "strike price E");
  auto* o_method = app.add_option("--method", method, "general | w-quad | h-quad | auto");
  auto* o_tol = app.add_option("--tol", tol, "root tolerance (ODE and quadrature use tol/100)");
  auto* o_smin = app.add_option("--s-min", s_min, "grid start (default rho)");
  auto* o_smax = app.add_option("--s-max", s_max, "grid end (default 3E)");
  auto* o_n = app.add_option("--n", n, "number of grid points");
  auto* o_log = app.add_flag("--log-grid", "geometric grid spacing");
  auto* o_format = app.add_option("--format", format, "csv | json");
  auto* o_output = app.add_option("--output", output, "output file (default standard output)");
  auto* o_check = app.add_flag("--check", "verify results and exit 1 on failure");
  auto* o_verbose = app.add_flag("--verbose", "include trajectories and diagnostics");
  auto* o_tol_rho = app.add_option("--tol-rho", tol_rho, "table check tolerance on rho");
  auto* o_tol_v = app.add_option("--tol-v", tol_v, "table check tolerance on V(E)");
  auto* o_lambdas = app.add_option("--lambdas", lambdas, "table lambda list, comma separated");
  auto* o_param = app.add_option("--param", param, "sweep parameter: lambda | a | sigma0 | r");
  auto* o_values = app.add_option("--values", values, "sweep values, comma separated");

  app.add_subcommand("boundary", "free boundary rho and the Merton bracket");
  app.add_subcommand("price", "price curve V, delta, H and residual on a grid");
  app.add_subcommand("table", "rho and V(E) over a list of RAPM lambdas");
  app.add_subcommand("sweep", "rho and V(E) over values of one parameter");
  app.add_subcommand("bounds", "gamma-/gamma+ bounds and their Merton boundaries");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    throw HelpRequested{app.help()};
  } catch (const CLI::CallForAllHelp&) {
    throw HelpRequested{app.help("", CLI::AppFormatMode::All)};
  } catch (const CLI::ParseError& e) {
    usage(e.what());
  }

  RunConfig cfg;
  if (o_config->count()) apply_json_file(cfg, config_path);
  cfg.command = parse_command(app.get_subcommands().front()->get_name());
  if (o_model->count()) cfg.model.kind = parse_kind(model);
  if (o_sigma0->count()) cfg.model.sigma0 = sigma0;
  if (o_lambda->count()) cfg.model.lambda = lambda;
  if (o_a->count()) cfg.model.a = a;
  if (o_r->count()) cfg.market.r = r;
  if (o_strike->count()) cfg.market.strike = strike;
  if (o_method->count()) cfg.method = parse_method(method);
  if (o_tol->count()) cfg.tol = tol;
  if (o_smin->count()) cfg.grid.s_min = s_min;
  if (o_smax->count()) cfg.grid.s_max = s_max;
  if (o_n->count()) cfg.grid.n = n;
  if (o_log->count()) cfg.grid.log_spacing = true;
  if (o_format->count()) cfg.format = parse_format(format);
  if (o_output->count()) cfg.output = output;
  if (o_check->count()) cfg.check = true;
  if (o_verbose->count()) cfg.verbose = true;
  if (o_tol_rho->count()) cfg.tol_rho = tol_rho;
  if (o_tol_v->count()) cfg.tol_v = tol_v;
  if (o_lambdas->count()) cfg.lambdas = parse_list("--lambdas", lambdas);
  if (o_param->count()) cfg.sweep_param = param;
  if (o_values->count()) cfg.sweep_values = parse_list("--values", values);
  validate(cfg);
  return cfg;
}

}  // namespace perpetual::cli
