#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "spisim/envelope.hpp"
#include "spisim/types.hpp"

// Closed-form scattering of square coherent pulses and single-photon
// wavepackets off a two-level transition, in the frame rotating at the
// transition frequency.  Conventions: the no-jump amplitudes F^(0,g/e)
// solve dFg/dt = -(Omega/2) Fe, dFe/dt = (Omega/2) Fg - (gamma/2) Fe with
// Omega = 2 sqrt(gamma) beta, so both stay real on resonance.
namespace spisim::analytic {

enum class Branch { Ground, Excited };

struct SquareDriveParams {
    double beta = 0.0;  // input amplitude, units rate^(1/2); flux = beta^2
    double gamma = 1.0; // emitter decay rate
    double tau = 1.0;   // drive duration

    double rabi() const;
    static SquareDriveParams from_rabi(double omega, double gamma, double tau);
    void validate() const;
};

struct F0Pair {
    cplx ground;
    cplx excited;
};

// No-jump amplitudes after driving for time t (t >= 0).  Continuous across
// the critically damped point Omega = gamma/2.
F0Pair f0_amplitudes(const SquareDriveParams& d, double t);

// n-photon emission amplitude with ordered jump times t1 <= ... <= tn <= tau
// and emitter branch eps at tau.
cplx fn_amplitude(const SquareDriveParams& d, int n, Branch eps, double tau,
                  std::span<const double> times);

struct PnValue {
    double value = 0.0;
    double error = 0.0;
};

inline constexpr int kDefaultNMax = 6;

// Probability of exactly n emissions during [0, tau] with the emitter in
// branch eps at tau.  n <= 3 by adaptive quadrature, n in [4, n_max] by a
// fixed quasi-Monte Carlo rule on the simplex.
PnValue pn_probability(const SquareDriveParams& d, int n, Branch eps, double tau,
                       std::uint64_t seed = 0);

struct ScatterProbabilities {
    double tau = 0.0;
    int n_max = kDefaultNMax;
    std::vector<PnValue> ground;  // indexed by photon number n
    std::vector<PnValue> excited;
    double tail_bound = 0.0;      // probability mass above n_max
    double total() const;         // sum over computed entries
};

ScatterProbabilities scatter_probabilities(const SquareDriveParams& d, double tau,
                                           int n_max = kDefaultNMax,
                                           std::uint64_t seed = 0);

// Thrown by pn_probability when n exceeds the configured cutoff; carries the
// unaccounted probability mass so callers can judge whether to raise n_max.
class CutoffError : public SimulationError {
  public:
    CutoffError(std::string msg, int n_max, double tail)
        : SimulationError(std::move(msg)), n_max(n_max), tail_bound(tail) {}
    int n_max;
    double tail_bound;
};

// Single-photon wavepacket scattering.  xi_tilde is the emitter-filtered
// envelope, Upsilon the output waveform on [0, tau].
class SinglePhotonScatter {
  public:
    SinglePhotonScatter(const PhotonEnvelope& envelope, double gamma, double tau);

    double gamma() const { return gamma_; }
    double tau() const { return tau_; }
    const PhotonEnvelope& envelope() const { return env_; }

    cplx xi_tilde(double t) const;
    cplx upsilon(double t) const; // xi(t) - gamma * xi_tilde(t)
    cplx excited_amplitude() const { return std::sqrt(gamma_) * xi_tilde(tau_); }

    double excited_norm() const;  // gamma |xi_tilde(tau)|^2
    double passed_norm() const;   // int_tau^inf |xi|^2
    double emitted_norm() const;  // int_0^tau |Upsilon|^2
    double norm_deficit() const;  // |sum of the three - 1|

    // int_0^T xi*(t) Upsilon(t) dt over the full pulse support.
    cplx overlap_with_input() const;

  private:
    PhotonEnvelope env_;
    double gamma_;
    double tau_;
    std::vector<cplx> xt_grid_; // xi_tilde on the envelope grid (Custom shape)
};

struct MeanAmplitude {
    cplx value;         // <b(t)> = beta - sqrt(gamma) <sigma(t)>
    cplx dipole;        // <sigma(t)>
    double tail_bound;  // bound on the truncated part of the emission series
    int n_used;
};

// Mean transmitted amplitude during the drive (t in [0, tau]) from the
// emission-number series.  Errors if the series tail bound exceeds 1e-3.
MeanAmplitude mean_output_amplitude(const SquareDriveParams& d, double t,
                                    int n_max = kDefaultNMax, std::uint64_t seed = 0);

// max over the quasi-steady window (t >= 5/gamma) of
// |<b(t)> + beta| / beta; 0 for a switched-off drive.
double linear_regime_residual(const SquareDriveParams& d, std::span<const double> t_grid);
double linear_regime_residual(const SquareDriveParams& d);

} // namespace spisim::analytic
