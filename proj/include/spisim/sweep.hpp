#pragma once

#include <string>

#include "spisim/config.hpp"

// Experiment driver: maps a parsed RunConfig onto the library calls, writes
// CSV artifacts plus a .meta.txt sidecar into out_dir, and reports whether
// every cell completed.  All output is deterministic: cells are computed into
// index-owned slots and serialized afterwards, so the bytes do not depend on
// the worker count.
namespace spisim::sweep {

inline constexpr int kExitOk = 0;
inline constexpr int kExitPartial = 2; // some cells flagged, artifacts still written

// Runs the experiment named in the config.  Returns kExitOk or kExitPartial;
// throws (std::invalid_argument, SimulationError, std::ios_base::failure) on
// conditions that prevent producing artifacts at all.
int run_experiment(const cfg::RunConfig& c);

// Shortest round-trip decimal form, locale-independent ('.' decimal point).
std::string format_number(double v);

// Quote a CSV field when it contains a comma, quote, or newline.
std::string csv_escape(const std::string& field);

} // namespace spisim::sweep
