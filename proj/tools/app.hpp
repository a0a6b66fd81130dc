// Config handling and subcommands of the lrrap command-line tool.
#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "lrrap/models.hpp"
#include "lrrap/solver.hpp"

namespace lrrap::app {

enum ExitCode : int { kConverged = 0, kUsage = 1, kNotConverged = 2, kHardFailure = 3, kAboveThreshold = 4 };

struct Overrides {
  std::optional<std::uint64_t> seed;
  std::optional<int> threads;
  std::optional<std::string> out;
  std::optional<double> tol;
};

struct RunConfig {
  nlohmann::json model;
  SolverConfig solver;
  std::string init = "random";  // or "product"
  std::string precond_kind = "none";
  int precond_terms = 0;
  std::string out_dir;
};

// Reads the JSON file, applies flag overrides, then LRRAP_OUTPUT_DIR as the
// fallback output directory. Throws std::runtime_error with a readable message.
RunConfig load_config(const std::string& path, const Overrides& ov);
RunConfig parse_config(const nlohmann::json& j, const Overrides& ov);

struct Problem {
  TTOperator H;
  Preconditioner prec;
  std::vector<TTVector> X0;
};
Problem build_problem(const RunConfig& rc);

struct Level {
  double eigenvalue, residual;
};
void write_spectrum(const std::string& path, const std::vector<Level>& levels);
std::vector<Level> read_spectrum(const std::string& path);

int cmd_solve(const RunConfig& rc);
int cmd_oracle(const RunConfig& rc);
int cmd_compare(const std::string& a, const std::string& b, double threshold);
int cmd_schedule_study(const RunConfig& rc, const std::vector<std::string>& strategies);
int cmd_bench(const RunConfig& rc);

}  // namespace lrrap::app
