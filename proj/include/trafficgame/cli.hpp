#pragma once

// Command-line entry point: simulate, verify, probe, compare.

#include <iosfwd>
#include <string>
#include <vector>

namespace trafficgame {

inline constexpr int kExitOk = 0;
inline constexpr int kExitNotConverged = 1;
inline constexpr int kExitInputError = 2;

/// Name of the environment variable that supplies a default --out.
inline constexpr const char* kOutDirEnv = "TRAFFICGAME_OUT_DIR";

/// args excludes the program name.
int cli_main(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int cli_main(int argc, char** argv);

}  // namespace trafficgame
