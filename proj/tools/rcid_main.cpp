#include <cstdlib>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "rcid/harness.hpp"
#include "rcid/numerics.hpp"

using rcid::harness::json;

namespace {

int run(const std::string& pipeline, const std::string& config_path,
        long seed, bool seed_set, const std::string& out_dir, int threads,
        const std::vector<std::string>& tol_overrides) {
  json cfg;
  if (!config_path.empty()) {
    std::ifstream in(config_path);
    if (!in) {
      std::cerr << "error: cannot open config " << config_path << "\n";
      return rcid::harness::kExitValidation;
    }
    try {
      in >> cfg;
    } catch (const std::exception& e) {
      std::cerr << "error: config parse failure: " << e.what() << "\n";
      return rcid::harness::kExitValidation;
    }
  }
  cfg["pipeline"] = pipeline;
  if (seed_set) cfg["seed"] = seed;  // flags win over the config file
  if (threads > 0) cfg["threads"] = threads;
  for (const auto& kv : tol_overrides) {
    auto eq = kv.find('=');
    if (eq == std::string::npos) {
      std::cerr << "error: --tol expects name=value\n";
      return rcid::harness::kExitValidation;
    }
    cfg["tolerances"][kv.substr(0, eq)] = std::stod(kv.substr(eq + 1));
  }

  try {
    auto report = rcid::harness::run_pipeline(cfg);
    std::string path = rcid::harness::emit_report(report, out_dir);
    std::cerr << "report: " << path << "\n";
    if (report.exit_code != 0) {
      for (const auto& s : report.body["stages"])
        if (s.value("status", "") != "ok")
          std::cerr << "stage '" << s.value("name", "?")
                    << "' failed: " << s.value("message", "") << "\n";
    }
    return report.exit_code;
  } catch (const rcid::data_error& e) {
    std::cerr << "validation error: " << e.what() << "\n";
    return rcid::harness::kExitValidation;
  } catch (const rcid::precondition_error& e) {
    std::cerr << "validation error: " << e.what() << "\n";
    return rcid::harness::kExitValidation;
  } catch (const std::exception& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return rcid::harness::kExitNumerical;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"identification diagnostics for random coefficients models"};
  app.require_subcommand(1);
  app.fallthrough();  // accept global flags after the subcommand

  std::string config_path, out_dir = "out";
  long seed = 0;
  int threads = 0;
  std::vector<std::string> tol_overrides;

  if (const char* env = std::getenv("RCID_THREADS")) threads = std::atoi(env);

  static const std::vector<std::string> pipelines{
      "determinacy", "uniqueness",  "recover-linear", "counterexample",
      "kotlarski",   "panel",       "binary-invert",  "single-index",
      "riesz",       "simulate"};
  std::string chosen;
  for (const auto& name : pipelines) {
    auto* sub = app.add_subcommand(name, name + " pipeline");
    sub->callback([&chosen, name] { chosen = name; });
  }
  app.add_option("--config", config_path, "JSON config file")
      ->check(CLI::ExistingFile);
  bool seed_set = false;
  app.add_option("--seed", seed, "master seed (overrides config)")
      ->each([&seed_set](const std::string&) { seed_set = true; });
  app.add_option("--out", out_dir, "output directory");
  app.add_option("--threads", threads, "parallelism degree");
  app.add_option("--tol", tol_overrides, "tolerance override name=value")
      ->take_all();

  CLI11_PARSE(app, argc, argv);
  return run(chosen, config_path, seed, seed_set, out_dir, threads,
             tol_overrides);
}
