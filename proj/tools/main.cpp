#include <iostream>

#include <CLI11.hpp>

#include "app.hpp"

using namespace lrrap::app;

int main(int argc, char** argv) {
  CLI::App cli{"Low-rank TT block eigensolver"};
  cli.require_subcommand(1);

  std::string config;
  Overrides ov;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", config, "JSON experiment definition")->required()->check(CLI::ExistingFile);
    sub->add_option_function<std::uint64_t>("--seed", [&](const std::uint64_t& v) { ov.seed = v; }, "RNG seed");
    sub->add_option_function<int>("--threads", [&](const int& v) { ov.threads = v; }, "worker threads (0 = all)");
    sub->add_option_function<std::string>("--out", [&](const std::string& v) { ov.out = v; },
                                          "output directory (default: output.dir, then $LRRAP_OUTPUT_DIR)");
    sub->add_option_function<double>("--tol-override", [&](const double& v) { ov.tol = v; }, "residual tolerance");
  };

  auto* solve = cli.add_subcommand("solve", "run the eigensolver; writes spectrum.csv, trace.jsonl, checkpoint.lrrap");
  add_common(solve);
  auto* oracle = cli.add_subcommand("oracle", "dense reference spectrum (oracle.csv)");
  add_common(oracle);
  auto* study = cli.add_subcommand("schedule-study", "same problem under several tangent-space schedules");
  add_common(study);
  std::vector<std::string> strategies{"first_only", "argmax"};
  study->add_option("--strategies", strategies, "schedules to run")->delimiter(',');
  auto* bench = cli.add_subcommand("bench", "time one solve");
  add_common(bench);

  auto* compare = cli.add_subcommand("compare", "MAE between two spectrum files");
  std::string file_a, file_b;
  double threshold = 1e-7;
  compare->add_option("a", file_a)->required()->check(CLI::ExistingFile);
  compare->add_option("b", file_b)->required()->check(CLI::ExistingFile);
  compare->add_option("--threshold", threshold, "exit 0 iff MAE <= threshold");

  try {
    cli.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return cli.exit(e) == 0 ? 0 : kUsage;
  }

  try {
    if (*compare) return cmd_compare(file_a, file_b, threshold);
    const RunConfig rc = load_config(config, ov);
    if (*solve) return cmd_solve(rc);
    if (*oracle) return cmd_oracle(rc);
    if (*study) return cmd_schedule_study(rc, strategies);
    if (*bench) return cmd_bench(rc);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kHardFailure;
  }
  return kUsage;
}
