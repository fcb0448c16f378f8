#pragma once

#include "usc/form_solver.hpp"
#include "usc/geometry.hpp"

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace usc {

inline constexpr std::string_view kToolVersion = "carpetlab 1.0.0";
inline constexpr std::uint64_t kDefaultSeed = 0x5EED;

// "sc3" or "slide:z=p/q"; throws SpecError for anything else.
CarpetSpec builtin_spec(std::string_view name);
// Builtin name, else a JSON spec file.
CarpetSpec resolve_spec(const std::string& name_or_path);

struct RunConfig {
  std::string command;  // validate, graph, constants, extension, trace, metrics, slide
  std::string spec = "sc3";
  int n_max = 4;        // constants, extension, graph
  int n = 0;            // trace
  int m = 3;            // trace, metrics, slide
  int trials = 14;      // trace: random data on top of the 6 fixed ones
  int pairs = 100;      // metrics
  double r_hat = 0.0;   // trace, metrics; 0 = estimate
  int renorm_level = 4; // n_max for the r_hat estimate
  std::string grid = "1/448";
  std::string z_lo = "1/56", z_hi = "3/56";
  double delta = 0.01;
  bool modulus = true;
  std::uint64_t seed = kDefaultSeed;
  SolverOptions solver;
};

struct Artifact {
  std::string name;     // file name, derived from command and parameters
  std::string content;
  bool failed_validation = false;  // validate: report written, exit 3
};

// Stable text form of every field that affects the output.
std::string canonical_config(const RunConfig& cfg);

// Runs one command. Throws SpecError / ValidationError / ResourceError /
// ConvergenceError, mapped to exit codes by cli_main.
std::vector<Artifact> run(const RunConfig& cfg);

// 0 ok, 2 parse, 3 validation, 4 resource guard, 5 non-convergence.
int cli_main(int argc, char** argv);

}  // namespace usc
