#pragma once

#include <ostream>
#include <vector>

#include "cli/run_config.hpp"

namespace perpetual::cli {

/// Published RAPM boundary and at-the-money value for r = 0.1, E = 100,
/// sigma0 = 0.3.
struct ReferenceRow {
  double lambda;
  double rho;
  double value;
};
const std::vector<ReferenceRow>& reference_table();

int cmd_boundary(const RunConfig& cfg, std::ostream& out, std::ostream& err);
int cmd_price(const RunConfig& cfg, std::ostream& out, std::ostream& err);
int cmd_table(const RunConfig& cfg, std::ostream& out, std::ostream& err);
int cmd_sweep(const RunConfig& cfg, std::ostream& out, std::ostream& err);
int cmd_bounds(const RunConfig& cfg, std::ostream& out, std::ostream& err);

int dispatch(const RunConfig& cfg, std::ostream& out, std::ostream& err);

/// The whole program: parses argv, opens --output if given and runs the
/// command. Returns the process exit code.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace perpetual::cli
