#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "spisim/pointer_metrics.hpp"
#include "spisim/slh.hpp"
#include "spisim/types.hpp"

// Spin readout through the balanced interferometer: click statistics under
// no-click conditioning, phase calibration, and the classical-vs-quantum
// comparison curves and maps built on top of them.
namespace spisim::readout {

// One spin preparation propagated along the no-click branch.  The trace that
// leaks out of the branch is the click probability.
struct ConditionedRun {
    double p_click = 0.0;
    bool converged = false;
    double t_final = 0.0;
    double truncation = 0.0;
};

// spin_level is ops::kUp or ops::kDown.  Conditioning is forced on regardless
// of cfg.condition_no_click.
ConditionedRun no_click_probability(const slh::MichelsonConfig& cfg, int spin_level,
                                    const metrics::NumericOptions& opts = {});

struct ClickStatistics {
    double p_up = 0.0;
    double p_down = 0.0;
    bool converged = false;
};

ClickStatistics click_probabilities(const slh::MichelsonConfig& cfg,
                                    const metrics::NumericOptions& opts = {});

// Two-outcome Bhattacharyya coefficient of the click record.
double cbhat(const ClickStatistics& s);

struct CalibrationOptions {
    int scan_points = 48;              // coarse grid over (-pi, pi]
    double tol = 1e-3;                 // bracket width at exit, radians
    double reference_bandwidth = 1e-2; // calibration pulse, units of gamma
};

// Reference phase maximizing the click contrast p_up - p_down for a
// narrowband probe.  cfg.phase is ignored; throws if the contrast is flat
// (e.g. eta = 0).
double calibrate_phase(const slh::MichelsonConfig& cfg, const CalibrationOptions& copt = {});

// Distinguishability-vs-bandwidth comparison at fixed eta.  All three
// figures of merit refer to the same interferometer:
//   b_cl_qs  click statistics of the single-photon probe,
//   b_q_qs   quantum bound for that probe (coherence route),
//   b_q_cs   quantum bound for a coherent probe of equal mean photon number.
struct ReadoutCurves {
    std::vector<double> bandwidth; // units of gamma
    std::vector<double> b_cl_qs;
    std::vector<double> b_q_qs;
    std::vector<double> b_q_cs;
    std::vector<std::string> flags; // per-point failure note, empty when ok
    double phase_star = PI;
};

ReadoutCurves readout_curves(std::vector<double> bandwidth, const slh::EmitterSpec& emitter,
                             double eta = 1.0, unsigned workers = 1,
                             const metrics::NumericOptions& opts = {});

// log B_cl(single photon) / log B_q(coherent) over an (eta, gamma_star) grid
// at fixed probe bandwidth.  ratio > 1 marks the quantum-advantage region.
struct AdvantageMap {
    std::vector<double> eta;             // rows
    std::vector<double> gamma_dephasing; // columns, units of gamma
    std::vector<double> b_cl;            // row-major
    std::vector<double> b_q;
    std::vector<double> ratio;
    std::vector<char> advantage;
    std::vector<std::string> flags;
    double bandwidth = 5e-2; // units of gamma
    double phase_star = PI;

    std::size_t rows() const { return eta.size(); }
    std::size_t cols() const { return gamma_dephasing.size(); }
    double ratio_at(std::size_t i, std::size_t j) const;
};

AdvantageMap advantage_map(std::vector<double> eta, std::vector<double> gamma_dephasing,
                           double gamma, double bandwidth = 5e-2, unsigned workers = 1,
                           const metrics::NumericOptions& opts = {});

// First axis position where ratio crosses 1, linearly interpolated; nullopt
// when the ratio never crosses.  NaN cells are skipped.
std::optional<double> threshold_crossing(std::span<const double> axis,
                                         std::span<const double> ratio);

} // namespace spisim::readout
