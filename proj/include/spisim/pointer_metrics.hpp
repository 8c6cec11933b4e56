#pragma once

#include <string>
#include <vector>

#include "spisim/analytic.hpp"
#include "spisim/slh.hpp"
#include "spisim/types.hpp"

// Pointer-state distinguishability measures: the overlap of the light states
// conditioned on the two spin projections, by closed form where available and
// through the cascaded engine otherwise.
namespace spisim::metrics {

// Coherent square drive: the surviving no-scatter probability.  `eval_time`
// past the drive end by >= 10/gamma marks the result as converged; earlier
// values are transient.
BhatResult qbhat_coherent_square(const analytic::SquareDriveParams& d, double eval_time);

// Zero/one-photon probe with a mono-exponential envelope: |1 - 2 n gamma /
// (gamma + Gamma)|, vanishing on the line n = (1 + Gamma/gamma)/2.
BhatResult qbhat_quantum_exp(double n_bar, double bandwidth, double gamma);

// Zero/one-photon probe with any envelope: |c0|^2 + |c1|^2 Re int xi* Upsilon
// by quadrature.  Reproduces the exponential closed form to 1e-6.
BhatResult qbhat_quantum_general(const slh::SourceSpec& probe, double gamma);

struct NumericOptions {
    double threshold = 1e-8; // residual excitation/occupation for convergence
    double t_floor = 0.0;    // 0: max(12/gamma, 12/bandwidth)
    double t_cap = 0.0;      // 0: max(60/gamma, 60/bandwidth)
};

struct TimeWindow {
    double floor;
    double cap;
};

// Convergence window for a probe envelope: zeros in `opts` resolve to
// multiples of the slowest rate, and custom pulses extend the floor past
// their support.
TimeWindow convergence_window(const PhotonEnvelope& env, double gamma,
                              const NumericOptions& opts);

// Coherence route: spin prepared in (|up> + |down>)/sqrt(2), probe cascaded
// in, 2 |<up| rho |down>| read out at the long-time criterion.
BhatResult qbhat_numeric(const slh::CascadeConfig& cfg, const NumericOptions& opts = {});

// Same metric with the probe routed through the interferometer (balanced
// arms, no conditioning); used for coherent-probe baselines.
BhatResult qbhat_numeric_michelson(const slh::MichelsonConfig& cfg,
                                   const NumericOptions& opts = {});

// Classical two-outcome Bhattacharyya coefficient.
double bhat_classical(double p_up, double p_down);

enum class ProbeKind { Quantum, Coherent };

struct SweepGrid {
    std::vector<double> n_bar;      // rows
    std::vector<double> bandwidth;  // columns, units of gamma
    std::vector<BhatResult> cells;  // row-major: cell(i, j) = cells[i * ncols + j]
    std::vector<std::string> flags; // per-cell failure note, empty when ok

    const BhatResult& at(std::size_t i, std::size_t j) const;
    std::size_t rows() const { return n_bar.size(); }
    std::size_t cols() const { return bandwidth.size(); }
};

// qBhat over an (n_bar, Gamma/gamma) grid of exponential-envelope probes.
// Quantum probes use the closed form; coherent probes run the engine.
// Cell-level failures are recorded in flags, never thrown.
SweepGrid sweep_qbhat(std::vector<double> n_bar, std::vector<double> bandwidth,
                      ProbeKind kind, double gamma, unsigned workers = 1,
                      const NumericOptions& opts = {});

} // namespace spisim::metrics
