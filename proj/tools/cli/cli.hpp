#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace adeuq::cli {

// Process exit codes.
inline constexpr int exit_ok = 0;
inline constexpr int exit_failure = 1;
inline constexpr int exit_config = 2;
inline constexpr int exit_io = 3;
inline constexpr int exit_numerical = 4;
inline constexpr int exit_checksum = 5;
inline constexpr int exit_manifest = 6;

int run(int argc, char** argv);

/// args excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace adeuq::cli
