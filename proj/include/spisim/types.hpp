#pragma once

#include <complex>
#include <stdexcept>
#include <string>

namespace spisim {

using cplx = std::complex<double>;
inline constexpr cplx I_UNIT{0.0, 1.0};
inline constexpr double PI = 3.14159265358979323846;

inline constexpr const char* kVersion = "0.1.0";

// How a pointer-overlap value was obtained.  The tag travels with every
// result so sweep CSVs can record the evaluation route per cell.
enum class BhatMethod {
    AnalyticSquare,        // closed-form no-scatter probability, square drive
    AnalyticExponential,   // closed-form overlap, exponential single-photon pulse
    OverlapQuadrature,     // numerical overlap integral for custom envelopes
    NumericMasterEquation, // cascaded master-equation coherence
};

std::string to_string(BhatMethod m);

struct BhatResult {
    double value = 0.0;          // in [0, 1]
    BhatMethod method = BhatMethod::AnalyticExponential;
    double error_estimate = 0.0; // absolute, 0 for closed forms
    bool converged = true;       // numeric routes: long-time criterion met
    double t_converged = 0.0;    // time at which convergence was declared
    std::string params;          // echo of the inputs that produced the value
};

// Thrown when a run cannot continue (step-size underflow, Fock truncation
// overflow, exhausted pulse norm, ...).  Parameter errors use
// std::invalid_argument instead.
class SimulationError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

} // namespace spisim
