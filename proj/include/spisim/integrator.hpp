#pragma once

#include <Eigen/Dense>
#include <functional>
#include <span>
#include <vector>

#include "spisim/slh.hpp"
#include "spisim/types.hpp"

// Adaptive density-matrix propagation for the cascaded generators.  Lindblad
// form with optional unapplied (conditioned) channels, embedded 5(4) pair,
// re-symmetrization each accepted step, and a running check that population
// never piles up against the Fock truncation.
namespace spisim::me {

using ops::SpMat;

struct IntegratorOptions {
    double rtol = 1e-9;
    double atol = 1e-11;
    double truncation_tol = 1e-6; // ceiling for the top-Fock population
    double h_init = 0.0;          // 0: choose from the generator scale
};

struct Sample {
    double t = 0.0;
    std::vector<cplx> values; // one entry per requested observable
    double trace = 0.0;
    double truncation = 0.0;  // top-Fock population
};

struct EvolveResult {
    std::vector<Sample> samples;
    Eigen::MatrixXcd rho;            // state at the last requested time
    double max_truncation = 0.0;
    double max_hermiticity_drift = 0.0;
    long steps = 0;
    long rejected = 0;
};

// Called at every sample time with the current state; lets callers evaluate
// quantities (e.g. drive-dependent operators) without storing trajectories.
using SampleCallback = std::function<void(double t, const Eigen::MatrixXcd& rho)>;

// Propagate rho0 from t = 0 and record the observables at the given
// ascending sample times.  Throws SimulationError on truncation overflow or
// step-size underflow.
EvolveResult evolve(const slh::Generator& gen, Eigen::MatrixXcd rho0,
                    std::span<const double> sample_times, std::span<const SpMat> observables,
                    const IntegratorOptions& opts = {}, const SampleCallback& extra = {});

struct ConvergenceResult {
    EvolveResult run;
    bool converged = false;
    double t_final = 0.0;
};

// March in chunks until the emitter excitation and the (still driveable)
// source occupation drop below `threshold`, between a floor and a hard cap
// on total time.  Samples are recorded at chunk boundaries.
ConvergenceResult evolve_until_converged(const slh::Generator& gen, Eigen::MatrixXcd rho0,
                                         std::span<const SpMat> observables, double threshold,
                                         double t_floor, double t_cap,
                                         const IntegratorOptions& opts = {});

cplx expectation(const SpMat& op, const Eigen::MatrixXcd& rho);

} // namespace spisim::me
