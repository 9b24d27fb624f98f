#pragma once

// Command-line front end: synth, estimate, nowcast, verify, analyze.

#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

namespace voxflow {

/// Bad command-line usage that the argument parser cannot detect itself.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Exit codes: 0 ok, 1 runtime or data error, 2 usage error.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace voxflow
