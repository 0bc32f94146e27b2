#pragma once

#include <exception>
#include <string>
#include <vector>

#include <json.hpp>

#include "mixsde/config.hpp"

namespace mixsde {

/// "simulate", "malliavin", "hormander", "norris", "density".
const std::vector<std::string>& command_names();

/// Runs one subcommand and writes its artifacts to <run.out>/<command>/ together with the
/// canonical config and a MANIFEST. Returns the file names written (MANIFEST last).
std::vector<std::string> run_command(const std::string& command, const RunConfig& config);

/// Machine-readable description of a failure.
nlohmann::json error_json(const std::exception& err);

}  // namespace mixsde
