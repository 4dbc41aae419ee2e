// rvr command-line front end. Talks to the library only through rvr.h.
#include <cstdint>
#include <cstdio>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "rvr/rvr.h"

namespace {

int exit_code(rvr_status st) {
  switch (st) {
    case RVR_OK: return 0;
    case RVR_ERR_CONFIG:
    case RVR_ERR_IO: return 2;
    default: return 1;
  }
}

int report_failure(rvr_status st) {
  std::fprintf(stderr, "rvr: %s error: %s\n", rvr_status_name(st), rvr_last_error_message());
  return exit_code(st);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Riemannian variance-reduced optimization experiments", "rvr"};
  app.require_subcommand(1);

  std::uint64_t seed = 0, stride = 0;
  std::string out;
  auto* seed_opt = app.add_option("--seed", seed, "Run a single seed instead of the configured list");
  app.add_option("--out", out, "Output directory");
  auto* stride_opt = app.add_option("--stride", stride, "Metric stride")->check(CLI::PositiveNumber);

  std::string config_path;
  auto* run = app.add_subcommand("run", "Run every (algorithm, seed) pair of a config file");
  run->add_option("config", config_path, "Experiment config (INI)")->required();

  std::string suite = "all";
  auto* verify = app.add_subcommand("verify", "Run invariant checks and print a JSON report");
  verify->add_option("--suite", suite,
                     "geometry, problems, optimizers, compression, distributed, oracles or all");

  std::string preset;
  auto* bench = app.add_subcommand("bench", "Run a built-in experiment preset");
  bench->add_option("preset", preset, "eigv-compare, page-rayleigh or marina-quadratic")
      ->required();

  for (auto* sub : {run, verify, bench}) sub->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "rvr: " << e.what() << "\n\n" << app.help();
    return 2;
  }

  rvr_overrides ov{};
  if (*seed_opt) {
    ov.has_seed = 1;
    ov.seed = seed;
  }
  if (!out.empty()) ov.out = out.c_str();
  if (*stride_opt) {
    ov.has_stride = 1;
    ov.stride = stride;
  }

  if (*run) {
    std::size_t n = 0;
    const rvr_status st = rvr_experiment_run(config_path.c_str(), &ov, &n);
    if (st != RVR_OK) return report_failure(st);
    std::printf("wrote %zu traces\n", n);
    return 0;
  }

  if (*verify) {
    char* report = nullptr;
    const rvr_status st = rvr_verify(suite.c_str(), &report);
    if (report) {
      std::printf("%s\n", report);
      rvr_string_free(report);
    }
    if (st == RVR_ERR_VERIFY_FAILED) return 1;
    if (st != RVR_OK) return report_failure(st);
    return 0;
  }

  const std::string dir = out.empty() ? "rvr_bench/" + preset : out;
  char* report = nullptr;
  const rvr_status st = rvr_bench(preset.c_str(), dir.c_str(), &ov, &report);
  if (st != RVR_OK) return report_failure(st);
  std::printf("%s\n", report);
  rvr_string_free(report);
  return 0;
}
