#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"
#include "perpetual/solver.hpp"
#include "perpetual/volatility.hpp"

namespace perpetual::cli {

enum ExitCode : int {
  kOk = 0,
  kCheckFailed = 1,
  kUsage = 2,
  kSolverFailure = 3,
  kRowFailure = 4,
};

/// Error carrying the process exit code it maps to.
class CliError : public std::runtime_error {
 public:
  CliError(int exit_code, const std::string& what) : std::runtime_error(what), exit_code_(exit_code) {}
  int exit_code() const { return exit_code_; }

 private:
  int exit_code_;
};

enum class Command { Boundary, Price, Table, Sweep, Bounds };
enum class Format { Csv, Json };

struct ModelSpec {
  VolatilityKind kind = VolatilityKind::Rapm;
  double sigma0 = 0.3;
  double lambda = 1.0;
  double a = 0.0;
};

struct GridSpec {
  std::optional<double> s_min;  // defaults to rho
  std::optional<double> s_max;  // defaults to 3 E
  int n = 200;
  bool log_spacing = false;
};

struct RunConfig {
  Command command = Command::Boundary;
  ModelSpec model;
  MarketParams market;
  std::optional<Method> method;  // empty means auto
  std::optional<double> tol;
  GridSpec grid;
  Format format = Format::Csv;
  std::optional<std::string> output;
  bool check = false;
  bool verbose = false;
  double tol_rho = 0.05;
  double tol_v = 0.05;
  std::vector<double> lambdas = {0.0, 0.2, 0.4, 0.6, 1.2, 1.6, 2.0};
  std::string sweep_param = "lambda";
  std::vector<double> sweep_values;
};

Command parse_command(const std::string& name);
std::string to_string(Command c);
Format parse_format(const std::string& name);
/// "auto" maps to an empty optional.
std::optional<Method> parse_method(const std::string& name);

/// Overlays the keys of a JSON object on cfg. Unknown keys and values of the
/// wrong type raise CliError(kUsage).
void apply_json(RunConfig& cfg, const nlohmann::json& j);
void apply_json_file(RunConfig& cfg, const std::string& path);

/// Throws CliError(kUsage) for any inconsistent setting.
void validate(const RunConfig& cfg);

VolatilityModel make_model(const ModelSpec& spec);
/// Default solver configuration with --tol applied: the root tolerance is set
/// to tol and the ODE and quadrature tolerances to tol / 100.
SolverConfig solver_config(const RunConfig& cfg);
Method resolve_method(const RunConfig& cfg, const VolatilityModel& model);

/// Parses argv (argv[0] is the program name). --help raises HelpRequested.
RunConfig parse_arguments(int argc, const char* const* argv);

struct HelpRequested {
  std::string text;
};

}  // namespace perpetual::cli
