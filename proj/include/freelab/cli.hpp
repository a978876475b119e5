#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

namespace freelab {

enum class Command { equilibrium, verify, verify_suite, w2, rmt_sample, rmt_converge, moment_map, pressure };

enum ExitCode : int {
  kExitOk = 0,
  kExitInequalityFailed = 1,
  kExitPrecondition = 2,
  kExitSolver = 3,
  kExitIo = 4,
};

struct RunConfig {
  Command command = Command::equilibrium;
  // Descriptor strings keyed by flag name: mu, nu, f, g, h, potential.
  std::map<std::string, std::string> specs;
  std::string kind;
  double theta = 0.5;
  std::string manifest;
  std::string summary_path;

  int nodes = 4096;
  double tolerance = 1e-6;
  std::uint64_t seed = 0;
  std::string output_path;
  // "json" or "csv"; empty picks the command's default.
  std::string format;
  // Record wall-clock times in reports; off by default so reports are reproducible.
  bool timing = false;

  int n = 64;
  int sweeps = 1000;
  int chains = 4;
  int burn_in = 500;
  std::vector<int> ns{8, 16, 32, 64};
  int micro_n = 0;
  double box = 4.0;
  std::string pressure_path = "direct";
};

// Validates the config, executes the command and writes its report. Never throws.
int run(const RunConfig& config, std::ostream& out, std::ostream& err);

// Parses argv into a RunConfig and runs it.
int run_command_line(int argc, char** argv, std::ostream& out, std::ostream& err);

}  // namespace freelab
