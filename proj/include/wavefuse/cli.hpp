#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace wavefuse {

inline constexpr const char* kVersion = "1.0.0";

/// Full command-line surface (enhance, sweep, batch, synth, metrics,
/// version). `args` excludes the program name. Returns the process exit
/// code: 0 success, 1 usage, 2 I/O, 3 numerical failure.
int run_cli(std::vector<std::string> args, std::ostream& out, std::ostream& err);

} // namespace wavefuse
