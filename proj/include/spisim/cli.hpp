#pragma once

#include <string>
#include <vector>

// Command-line front end, callable in-process so tests can drive the real
// entry point without spawning the binary.
//
//   spisim <experiment> --config <path> [--out <dir>] [--workers N] [--seed S]
//
// Exit codes: 0 success, 2 artifacts written but some cells flagged, 1 fatal
// (bad arguments, unreadable or invalid config, engine failure, or a failed
// validate run).
namespace spisim::cli {

int run(int argc, const char* const* argv);

// args[0] is the program name, as in argv.
int run(const std::vector<std::string>& args);

} // namespace spisim::cli
