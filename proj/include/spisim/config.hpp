#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "spisim/slh.hpp"
#include "spisim/types.hpp"

// Run configuration: a small sectioned key = value format.  Unknown sections
// or keys are errors (with line numbers), so typos never silently fall back
// to defaults.  gamma = 1 fixes the unit system; every rate in a config is a
// ratio to it.
namespace spisim::cfg {

enum class Experiment { QBhat, Sweep, Readout, AdvantageMap, Polarization, Validate };

Experiment experiment_from(const std::string& name);
std::string to_string(Experiment e);

struct ConfigError : std::runtime_error {
    ConfigError(const std::string& msg, int line);
    int line; // 0 when not tied to a specific line
};

struct RunConfig {
    Experiment experiment = Experiment::QBhat;

    // [emitter]
    double gamma = 1.0; // unit rate, not configurable
    double gamma_dephasing = 0.0;
    double eta = 1.0;

    // [probe]
    slh::SourceSpec::Kind kind = slh::SourceSpec::Kind::Superposition;
    slh::SourceSpec::Pol pol = slh::SourceSpec::Pol::H;
    double n_bar = 1.0;
    double bandwidth = 1.0;     // Gamma / gamma
    bool bandwidth_set = false; // explicit in the config (experiments with a
                                // narrower default only honor explicit values)

    // [grid] axes; empty means the experiment's default grid
    std::vector<double> grid_n_bar;
    std::vector<double> grid_bandwidth;
    std::vector<double> grid_eta;
    std::vector<double> grid_dephasing;

    // [run]
    std::string out_dir = ".";
    unsigned workers = 0; // 0: SPISIM_WORKERS, then hardware
    std::uint64_t seed = 0;
    int samples = 400;  // polarization grid points
    double t_end = 0.0; // polarization window; 0 = auto

    std::uint64_t config_hash = 0; // FNV-1a of the raw text

    slh::SourceSpec source() const; // probe fields as a SourceSpec
    void validate() const;          // throws ConfigError
};

RunConfig parse_config(const std::string& text);

// start:stop:count[ log], a comma list, or a single number.
std::vector<double> parse_axis(const std::string& text, int line);

std::uint64_t fnv1a(const std::string& text);

// One-line summary of the probe and grids, echoed on startup.
std::string describe(const RunConfig& c);

} // namespace spisim::cfg
