#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

namespace modent::cli {

struct RunOptions {
  std::string command;
  std::filesystem::path config_path;
  std::optional<nlohmann::json> config;  // used instead of config_path when set
  std::filesystem::path out_dir = "modent_out";
  std::optional<std::uint64_t> seed;
  int threads = 1;
  std::vector<std::string> tol_overrides;
};

struct RunResult {
  int exit_code = 0;
  std::string status;  // ok, property_failure, config_error, numerical_error, io_error
  std::string error;
  std::vector<std::string> files;  // relative to out_dir, manifest last
  nlohmann::json summary;
};

const std::vector<std::string>& command_names();

// stderr logger, level from MODENT_LOG (default warn); safe to call repeatedly
void setup_logging();

/// Runs one command and writes its bundle. Never throws for domain errors;
/// they are mapped to exit codes 2 (config), 3 (numerical), 4 (io).
RunResult run(const RunOptions& opts);

/// "%.17g", with inf/nan spelled out.
std::string format_double(double x);

}  // namespace modent::cli
