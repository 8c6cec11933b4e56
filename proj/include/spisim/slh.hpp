#pragma once

#include <Eigen/Dense>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "spisim/envelope.hpp"
#include "spisim/operators.hpp"
#include "spisim/types.hpp"

// Cascaded-network construction.  A virtual decaying source mode carries the
// input pulse; its output feeds the emitter through a lossy line, and in the
// interferometer arrangement interferes with an attenuated reference on a
// balanced output splitter.  Scattering matrices stay trivial throughout, so
// components reduce to (L, H) pairs.
namespace spisim::slh {

using ops::HilbertLayout;
using ops::ShapedOp;
using ops::SpMat;

// Time dependence of the source coupling g(t) = sqrt(Gamma(t)).
struct DriveProfile {
    bool constant = true;
    double g0 = 0.0;          // used when constant
    std::vector<double> t;    // sampled profile otherwise
    std::vector<double> g;
    bool clipped = false;     // rate hit the stability ceiling somewhere

    double value(double time) const;
    double end_of_support() const;
    static DriveProfile constant_rate(double rate);
};

// Source coupling rate for an arbitrary envelope:
// Gamma(t) = |xi(t)|^2 / (1 - int_0^t |xi|^2), clipped at `rate_clip`.
// Throws SimulationError if the envelope norm is exhausted early enough that
// the remainder of the pulse cannot be represented at all.
DriveProfile shaped_bandwidth(const PhotonEnvelope& env, double rate_clip);

struct Component {
    std::vector<ShapedOp> L;
    ShapedOp H;
};

// Feed the outputs of `upstream` into the inputs of `downstream`
// (channel counts must match):
//   L = L_down + L_up,  H = H_down + H_up + Im(L_down^dag L_up) summed.
Component series_product(const Component& downstream, const Component& upstream);

enum class ChannelRole {
    TransmitR,  // cascade output behind the emitter
    TransmitL,
    DetectorR,  // interferometer difference port, R polarization
    DetectorL,
    DarkR,      // interferometer sum port (not monitored)
    DarkL,
    LossR,      // undetected line loss
    LossL,
    DephasingR, // trion pure dephasing
    DephasingL,
};
std::string to_string(ChannelRole r);

struct Generator {
    HilbertLayout layout;
    ShapedOp heff;                    // H - (i/2) sum_j L_j^dag L_j, all channels
    std::vector<ShapedOp> jumps;
    std::vector<ChannelRole> roles;
    std::vector<char> applied;        // refeed L rho L^dag for this channel?
    DriveProfile profile;

    bool trace_preserving() const;
    int dim() const { return layout.dim(); }
};

// Photon content of the input state riding on the source mode(s).
struct SourceSpec {
    enum class Kind {
        Superposition, // sqrt(1-n) |0> + sqrt(n) |1_pol>
        Coherent,      // displaced vacuum with mean photon number n
    };
    enum class Pol { H, R }; // horizontal = (R + L)/sqrt(2), or pure R

    Kind kind = Kind::Superposition;
    Pol pol = Pol::H;
    double n_bar = 1.0;
    PhotonEnvelope envelope = PhotonEnvelope::exponential(1.0);
};

struct EmitterSpec {
    double gamma = 1.0;
    double gamma_dephasing = 0.0;
};

struct CutoffPolicy {
    int n_r = 0; // 0: choose automatically from the source spec
    int n_l = 0;
};

// Fock levels needed per mode for a given per-mode mean occupation, chosen
// so the discarded Poisson tail stays below ~1e-7.
int coherent_fock_levels(double mode_mean);
HilbertLayout choose_layout(const SourceSpec& src, const CutoffPolicy& cutoff);

struct CascadeConfig {
    EmitterSpec emitter;
    SourceSpec source;
    double eta = 1.0; // source-to-emitter line transmission
    CutoffPolicy cutoff;
};

// Source -> lossy line -> emitter, with residual-loss channels keeping the
// source decay at the full pulse bandwidth.
Generator build_cascade(const CascadeConfig& cfg);

struct MichelsonConfig {
    EmitterSpec emitter;
    SourceSpec source;
    double eta = 1.0;
    double phase = PI;            // reference-arm phase
    bool condition_no_click = false; // drop detector-port refeeding terms
    CutoffPolicy cutoff;
};

// Balanced interferometer: one arm holds the emitter, the other an adjustable
// phase; outputs recombine into detector and dark ports.
Generator build_michelson(const MichelsonConfig& cfg);

// Initial state: emitter level (or superposition) times the source-mode pulse
// state.  Coherent sources are truncated and renormalized; if the truncated
// weight exceeds 1e-6 an error suggests the required cutoff.
Eigen::VectorXcd source_pulse_state(const SourceSpec& src, const HilbertLayout& h);
Eigen::VectorXcd initial_state(const HilbertLayout& h, const Eigen::Vector4cd& emitter_amps,
                               const SourceSpec& src);
Eigen::MatrixXcd initial_density(const HilbertLayout& h, const Eigen::Vector4cd& emitter_amps,
                                 const SourceSpec& src);

} // namespace spisim::slh
