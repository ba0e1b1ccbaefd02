// Runs the installed-style binary and checks the exit-code contract.

#include <sys/wait.h>

#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "doctest.h"

namespace {

struct Proc {
  int code;
  std::string out;
};

Proc run(const std::string& args) {
  const std::string cmd = std::string(PERPETUAL_CLI_PATH) + " " + args + " 2>/dev/null";
  FILE* pipe = popen(cmd.c_str(), "r");
  REQUIRE(pipe != nullptr);
  std::string out;
  std::array<char, 4096> buf{};
  std::size_t n;
  while ((n = std::fread(buf.data(), 1, buf.size(), pipe)) > 0) out.append(buf.data(), n);
  const int status = pclose(pipe);
  return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, out};
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

}  // namespace

TEST_CASE("exit 0: boundary with defaults and help") {
  const auto r = run("boundary --model constant");
  CHECK(r.code == 0);
  CHECK(r.out.find("68.96551724") != std::string::npos);
  const auto l = run("boundary --model rapm --lambda 0.2");
  CHECK(l.code == 0);
  CHECK(l.out.find("\n64.7") != std::string::npos);
  CHECK(run("--help").code == 0);
}

TEST_CASE("exit 1: failed check") { CHECK(run("table --check").code == 1); }

TEST_CASE("exit 2: usage and configuration errors") {
  CHECK(run("").code == 2);
  CHECK(run("price --s-min 200 --s-max 100").code == 2);
  CHECK(run("boundary --sigma0 -0.3").code == 2);
  CHECK(run("boundary --config /nonexistent/perpetual.json").code == 2);
  CHECK(run("table --lambdas ''").code == 2);
  CHECK(run("boundary --output /nonexistent/dir/out.csv").code == 2);
}

TEST_CASE("exit 3: solver failure") {
  // A root tolerance of 1e-20 puts the ODE tolerance far below machine precision.
  CHECK(run("boundary --method general --tol 1e-20").code == 3);
}

TEST_CASE("exit 4: a sweep row fails") {
  const auto r = run("sweep --model constant --param sigma0 --values 0.3,0,0.4");
  CHECK(r.code == 4);
  CHECK(r.out.find("0,,,,error") != std::string::npos);
}

TEST_CASE("--output writes bit-identical files for identical configurations") {
  const auto dir = std::filesystem::temp_directory_path();
  const auto a = dir / "perpetual_cli_a.csv";
  const auto b = dir / "perpetual_cli_b.csv";
  const std::string args = "price --lambda 1 --s-max 300 --n 50 --log-grid --output ";
  REQUIRE(run(args + a.string()).code == 0);
  REQUIRE(run(args + b.string()).code == 0);
  const auto content = slurp(a);
  CHECK(content.rfind("S,V,delta,H,residual,V_sub,V_super\n", 0) == 0);
  CHECK(content == slurp(b));
  CHECK(run(args + a.string()).out.empty());
  std::filesystem::remove(a);
  std::filesystem::remove(b);
}
