#pragma once

#include <string>
#include <vector>

#include "json.hpp"

namespace rcid::harness {

using json = nlohmann::json;

// exit codes of the CLI contract
inline constexpr int kExitOk = 0;
inline constexpr int kExitValidation = 2;
inline constexpr int kExitNumerical = 3;

struct RunReport {
  json body;          // deterministic given (config, seed)
  int exit_code = 0;
  // artifact name -> file content (CSV plot data); written by emit_report
  std::vector<std::pair<std::string, std::string>> files;
};

// parse + validate a config, resolve defaults; throws data_error on schema
// violations (missing keys, unreadable input files)
json resolve_config(const json& raw);

// execute the pipeline named in the config; stage timings go to stderr, the
// report stays byte-deterministic
RunReport run_pipeline(const json& config);

// write report JSON (canonical key order) and any plot-data CSVs
std::string emit_report(const RunReport& report, const std::string& out_dir);

// --- dataset loading -------------------------------------------------------

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;
};

// schema in {"moments", "points", "cf", "panel", "linear"}
CsvTable load_dataset(const std::string& path, const std::string& schema);

}  // namespace rcid::harness
