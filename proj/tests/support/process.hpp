#pragma once

#include <string>
#include <vector>

namespace polyg2p::testing {

struct ProcessResult {
  int exit_code = -1;
  std::string output;  // stdout and stderr interleaved
};

// Runs argv through the shell with every argument single-quoted.
ProcessResult run_process(const std::vector<std::string>& argv);

std::string read_file(const std::string& path);

}  // namespace polyg2p::testing
