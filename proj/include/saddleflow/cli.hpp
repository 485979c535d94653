#pragma once

#include <optional>
#include <string>
#include <vector>

namespace saddleflow::cli {

// Output directory precedence: explicit --out flag, then the SADDLE_FLOW_OUT
// environment variable, then ./out.
std::string resolve_out_dir(const std::optional<std::string>& explicit_out);

// Full command-line entry point. Exit codes: 0 success, 1 numerical failure
// (no saddle point, blow-up, failed validation), 2 usage error (bad flags,
// malformed problem file).
int run_main(int argc, const char* const* argv);
int run_main(const std::vector<std::string>& args);  // args exclude argv[0]

}  // namespace saddleflow::cli
