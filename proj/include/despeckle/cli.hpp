#pragma once

#include <iosfwd>
#include <span>
#include <string>

namespace despeckle::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitValidation = 1;
inline constexpr int kExitIo = 2;

/// Runs the `despeckle` command line. argv[0] is the program name.
int run(std::span<const std::string> args, std::ostream& out, std::ostream& err);

}  // namespace despeckle::cli
