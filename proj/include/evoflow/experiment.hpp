#pragma once

#include <cstdint>
#include <optional>
#include <string>

// Experiment front end behind the CLI: load one config file, run the
// named experiment, write one trajectory file and one report file.
//
// Exit statuses: 0 success, 2 config parse error, 3 validation error,
// 4 numerical failure mid-run, 1 anything unexpected.

namespace evoflow {

inline constexpr int kStatusOk = 0;
inline constexpr int kStatusUnexpected = 1;
inline constexpr int kStatusParse = 2;
inline constexpr int kStatusValidation = 3;
inline constexpr int kStatusNumerical = 4;

/// Command-line overrides applied on top of the config file.
struct CliOverrides {
  std::optional<std::string> output_path;
  std::optional<std::string> format;
  std::optional<std::uint64_t> seed;
};

/// Runs the experiment described by the config file and writes its
/// output files. Errors are reported on stderr and mapped to the status
/// codes above.
int run_experiment_file(const std::string& config_path, const CliOverrides& overrides);

/// Runs every invariant suite and writes the verification report to
/// `report_path` (empty: report to stdout only). Returns kStatusOk when
/// all checks pass, kStatusNumerical otherwise.
int run_verify_command(const std::string& report_path);

}  // namespace evoflow
