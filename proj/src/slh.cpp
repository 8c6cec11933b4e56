#include "spisim/slh.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>

#include "spisim/quadrature.hpp"

namespace spisim::slh {
namespace {

constexpr double kCoherentTailTol = 1e-6;

ShapedOp scaled_linear(double s, const SpMat& m) {
    return ShapedOp::linear(SpMat(s * m));
}

ShapedOp scaled_constant(double s, const SpMat& m) {
    return ShapedOp::constant(SpMat(s * m));
}

void append_dephasing(const HilbertLayout& layout, const EmitterSpec& em,
                      std::vector<ShapedOp>& jumps, std::vector<ChannelRole>& roles) {
    if (em.gamma_dephasing <= 0.0)
        return;
    const double s = std::sqrt(em.gamma_dephasing);
    jumps.push_back(scaled_constant(s, ops::trion_r_projector(layout)));
    roles.push_back(ChannelRole::DephasingR);
    jumps.push_back(scaled_constant(s, ops::trion_l_projector(layout)));
    roles.push_back(ChannelRole::DephasingL);
}

ShapedOp effective_hamiltonian(const ShapedOp& h, const std::vector<ShapedOp>& jumps) {
    ShapedOp heff = h;
    for (const ShapedOp& l : jumps)
        heff += cplx(0.0, -0.5) * ShapedOp::product(l.adjoint(), l);
    return heff;
}

void validate_common(const EmitterSpec& em, double eta) {
    if (em.gamma <= 0.0)
        throw std::invalid_argument("emitter: gamma must be positive");
    if (em.gamma_dephasing < 0.0)
        throw std::invalid_argument("emitter: dephasing rate must be non-negative");
    if (eta < 0.0 || eta > 1.0)
        throw std::invalid_argument("eta must lie in [0, 1]");
}

std::vector<cplx> coherent_amps(double alpha, int levels) {
    std::vector<cplx> c(levels);
    double log_fact = 0.0;
    for (int m = 0; m < levels; ++m) {
        if (m > 0) log_fact += std::log(double(m));
        c[m] = std::exp(-0.5 * alpha * alpha + m * std::log(std::max(alpha, 1e-300)) -
                        0.5 * log_fact);
        if (alpha == 0.0) c[m] = (m == 0) ? 1.0 : 0.0;
    }
    return c;
}

} // namespace

double DriveProfile::value(double time) const {
    if (constant)
        return time >= 0.0 ? g0 : 0.0;
    if (t.empty() || time > t.back())
        return 0.0;
    if (time <= t.front())
        return g.front();
    const double dt = t[1] - t[0];
    const auto i = std::min(static_cast<std::size_t>((time - t.front()) / dt), t.size() - 2);
    const double w = (time - t[i]) / dt;
    return (1.0 - w) * g[i] + w * g[i + 1];
}

double DriveProfile::end_of_support() const {
    if (constant)
        return std::numeric_limits<double>::infinity();
    return t.empty() ? 0.0 : t.back();
}

DriveProfile DriveProfile::constant_rate(double rate) {
    if (rate < 0.0)
        throw std::invalid_argument("DriveProfile: rate must be non-negative");
    DriveProfile p;
    p.constant = true;
    p.g0 = std::sqrt(rate);
    return p;
}

DriveProfile shaped_bandwidth(const PhotonEnvelope& env, double rate_clip) {
    if (rate_clip <= 0.0)
        throw std::invalid_argument("shaped_bandwidth: clip rate must be positive");
    if (env.is_exponential()) {
        if (env.bandwidth() > rate_clip)
            throw SimulationError("shaped_bandwidth: pulse bandwidth exceeds the clip rate");
        return DriveProfile::constant_rate(env.bandwidth());
    }
    const auto ts = env.grid();
    const auto xs = env.samples();
    std::vector<double> abs2(xs.size());
    double peak = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        abs2[i] = std::norm(xs[i]);
        peak = std::max(peak, abs2[i]);
    }
    const std::vector<double> cum = quad::cumulative_uniform(abs2, env.grid_step());

    DriveProfile p;
    p.constant = false;
    p.t.assign(ts.begin(), ts.end());
    p.g.resize(ts.size());
    for (std::size_t i = 0; i < ts.size(); ++i) {
        const double remaining = 1.0 - cum[i];
        if (abs2[i] <= 1e-14 * peak) {
            p.g[i] = 0.0;
            continue;
        }
        if (remaining <= 0.0) {
            // Norm exhausted while amplitude remains: the rest of the pulse
            // cannot be produced by a decaying mode.
            double future = 0.0;
            for (std::size_t j = i; j < abs2.size(); ++j) future += abs2[j] * env.grid_step();
            if (future > 1e-6)
                throw SimulationError(
                    "shaped_bandwidth: envelope norm exhausted at t = " + std::to_string(ts[i]) +
                    " with weight " + std::to_string(future) + " still outstanding");
            p.g[i] = std::sqrt(rate_clip);
            p.clipped = true;
            continue;
        }
        const double rate = abs2[i] / remaining;
        if (rate > rate_clip) {
            p.g[i] = std::sqrt(rate_clip);
            p.clipped = true;
        } else {
            p.g[i] = std::sqrt(rate);
        }
    }
    return p;
}

Component series_product(const Component& downstream, const Component& upstream) {
    if (downstream.L.size() != upstream.L.size())
        throw std::invalid_argument("series_product: channel counts differ");
    Component out;
    out.H = downstream.H;
    if (!upstream.H.empty())
        out.H += upstream.H;
    for (std::size_t k = 0; k < downstream.L.size(); ++k) {
        ShapedOp l = downstream.L[k];
        l += upstream.L[k];
        out.L.push_back(std::move(l));
        const ShapedOp cross = ShapedOp::product(downstream.L[k].adjoint(), upstream.L[k]);
        out.H += cplx(0.0, -0.5) * cross;
        out.H += cplx(0.0, 0.5) * cross.adjoint();
    }
    return out;
}

std::string to_string(ChannelRole r) {
    switch (r) {
        case ChannelRole::TransmitR: return "transmit-R";
        case ChannelRole::TransmitL: return "transmit-L";
        case ChannelRole::DetectorR: return "detector-R";
        case ChannelRole::DetectorL: return "detector-L";
        case ChannelRole::DarkR: return "dark-R";
        case ChannelRole::DarkL: return "dark-L";
        case ChannelRole::LossR: return "loss-R";
        case ChannelRole::LossL: return "loss-L";
        case ChannelRole::DephasingR: return "dephasing-R";
        case ChannelRole::DephasingL: return "dephasing-L";
    }
    return "unknown";
}

bool Generator::trace_preserving() const {
    return std::all_of(applied.begin(), applied.end(), [](char c) { return c != 0; });
}

int coherent_fock_levels(double mode_mean) {
    if (mode_mean < 0.0)
        throw std::invalid_argument("coherent_fock_levels: negative occupation");
    if (mode_mean == 0.0)
        return 1;
    int n = static_cast<int>(std::ceil(mode_mean + 4.0 * std::sqrt(mode_mean) + 3.0));
    // Push further until the Poisson weight at the highest occupied level is
    // negligible; the top kept level then stays empty to the monitor tol.
    auto pmf = [&](int k) {
        double lp = -mode_mean + k * std::log(mode_mean);
        for (int j = 2; j <= k; ++j) lp -= std::log(double(j));
        return std::exp(lp);
    };
    while (n < 3 || pmf(n - 2) >= 1e-7) ++n;
    return n;
}

HilbertLayout choose_layout(const SourceSpec& src, const CutoffPolicy& cutoff) {
    HilbertLayout h;
    const bool split = src.pol == SourceSpec::Pol::H;
    if (src.kind == SourceSpec::Kind::Superposition) {
        h.n_r = 3;
        h.n_l = split ? 3 : 1;
    } else {
        const double mean_r = split ? 0.5 * src.n_bar : src.n_bar;
        h.n_r = coherent_fock_levels(mean_r);
        h.n_l = split ? h.n_r : 1;
    }
    if (cutoff.n_r > 0) h.n_r = cutoff.n_r;
    if (cutoff.n_l > 0) h.n_l = cutoff.n_l;
    h.validate();
    return h;
}

namespace {

DriveProfile make_profile(const SourceSpec& src, const EmitterSpec& em) {
    if (src.envelope.is_exponential())
        return DriveProfile::constant_rate(src.envelope.bandwidth());
    return shaped_bandwidth(src.envelope, 1e3 * em.gamma);
}

struct ArmParts {
    Component arm;             // source line + emitter, per polarization
    std::vector<ShapedOp> ref; // attenuated reference beams (Michelson only)
};

// Source channel k feeding the emitter through amplitude transmission
// `line_amp` (sqrt(eta) for the cascade, sqrt(eta/2) per interferometer arm).
Component build_arm(const HilbertLayout& layout, const EmitterSpec& em, double line_amp) {
    const SpMat a_r = ops::destroy_r(layout);
    const SpMat a_l = ops::destroy_l(layout);
    const double sg = std::sqrt(em.gamma);

    Component upstream;
    upstream.L.push_back(scaled_linear(line_amp, a_r));
    upstream.L.push_back(scaled_linear(line_amp, a_l));
    upstream.H = ShapedOp::zero(layout.dim());

    Component emitter;
    emitter.L.push_back(scaled_constant(sg, ops::sigma_r(layout)));
    emitter.L.push_back(scaled_constant(sg, ops::sigma_l(layout)));
    emitter.H = ShapedOp::zero(layout.dim());

    return series_product(emitter, upstream);
}

void append_residual_loss(const HilbertLayout& layout, double eta,
                          std::vector<ShapedOp>& jumps, std::vector<ChannelRole>& roles) {
    if (eta >= 1.0)
        return;
    const double s = std::sqrt(1.0 - eta);
    jumps.push_back(scaled_linear(s, ops::destroy_r(layout)));
    roles.push_back(ChannelRole::LossR);
    jumps.push_back(scaled_linear(s, ops::destroy_l(layout)));
    roles.push_back(ChannelRole::LossL);
}

} // namespace

Generator build_cascade(const CascadeConfig& cfg) {
    validate_common(cfg.emitter, cfg.eta);
    Generator gen;
    gen.layout = choose_layout(cfg.source, cfg.cutoff);
    gen.profile = make_profile(cfg.source, cfg.emitter);

    const Component arm = build_arm(gen.layout, cfg.emitter, std::sqrt(cfg.eta));
    gen.jumps.push_back(arm.L[0]);
    gen.roles.push_back(ChannelRole::TransmitR);
    gen.jumps.push_back(arm.L[1]);
    gen.roles.push_back(ChannelRole::TransmitL);
    append_residual_loss(gen.layout, cfg.eta, gen.jumps, gen.roles);
    append_dephasing(gen.layout, cfg.emitter, gen.jumps, gen.roles);

    gen.heff = effective_hamiltonian(arm.H, gen.jumps);
    gen.applied.assign(gen.jumps.size(), 1);
    return gen;
}

Generator build_michelson(const MichelsonConfig& cfg) {
    validate_common(cfg.emitter, cfg.eta);
    Generator gen;
    gen.layout = choose_layout(cfg.source, cfg.cutoff);
    gen.profile = make_profile(cfg.source, cfg.emitter);

    const double arm_amp = std::sqrt(0.5 * cfg.eta);
    const Component arm = build_arm(gen.layout, cfg.emitter, arm_amp);

    const cplx ref_phase = std::exp(I_UNIT * cfg.phase) * arm_amp;
    const std::array<ShapedOp, 2> ref{
        ref_phase * ShapedOp::linear(ops::destroy_r(gen.layout)),
        ref_phase * ShapedOp::linear(ops::destroy_l(gen.layout)),
    };

    const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
    for (int k = 0; k < 2; ++k) {
        ShapedOp det = arm.L[k];
        det += ref[k];
        gen.jumps.push_back(cplx(inv_sqrt2, 0.0) * det);
        gen.roles.push_back(k == 0 ? ChannelRole::DetectorR : ChannelRole::DetectorL);
    }
    for (int k = 0; k < 2; ++k) {
        ShapedOp dark = arm.L[k];
        dark += cplx(-1.0, 0.0) * ref[k];
        gen.jumps.push_back(cplx(inv_sqrt2, 0.0) * dark);
        gen.roles.push_back(k == 0 ? ChannelRole::DarkR : ChannelRole::DarkL);
    }
    append_residual_loss(gen.layout, cfg.eta, gen.jumps, gen.roles);
    append_dephasing(gen.layout, cfg.emitter, gen.jumps, gen.roles);

    gen.heff = effective_hamiltonian(arm.H, gen.jumps);
    gen.applied.assign(gen.jumps.size(), 1);
    if (cfg.condition_no_click) {
        for (std::size_t j = 0; j < gen.roles.size(); ++j)
            if (gen.roles[j] == ChannelRole::DetectorR || gen.roles[j] == ChannelRole::DetectorL)
                gen.applied[j] = 0;
    }
    return gen;
}

Eigen::VectorXcd source_pulse_state(const SourceSpec& src, const HilbertLayout& h) {
    h.validate();
    const int modes = h.n_r * h.n_l;
    Eigen::VectorXcd v = Eigen::VectorXcd::Zero(modes);
    auto idx = [&](int mr, int ml) { return mr * h.n_l + ml; };

    if (src.kind == SourceSpec::Kind::Superposition) {
        if (src.n_bar < 0.0 || src.n_bar > 1.0)
            throw std::invalid_argument("superposition source needs n_bar in [0, 1]");
        const double c1 = std::sqrt(src.n_bar);
        const double c0 = std::sqrt(1.0 - src.n_bar);
        v(idx(0, 0)) = c0;
        if (src.pol == SourceSpec::Pol::R) {
            if (h.n_r < 2)
                throw std::invalid_argument("source_pulse_state: R mode needs >= 2 levels");
            v(idx(1, 0)) = c1;
        } else {
            if (h.n_r < 2 || h.n_l < 2)
                throw std::invalid_argument("source_pulse_state: H pol needs >= 2 levels per mode");
            v(idx(1, 0)) = c1 / std::sqrt(2.0);
            v(idx(0, 1)) = c1 / std::sqrt(2.0);
        }
        return v;
    }

    // Coherent: product of per-mode displaced vacua.
    if (src.n_bar < 0.0)
        throw std::invalid_argument("coherent source needs n_bar >= 0");
    const bool split = src.pol == SourceSpec::Pol::H;
    const double alpha_r = split ? std::sqrt(0.5 * src.n_bar) : std::sqrt(src.n_bar);
    const double alpha_l = split ? alpha_r : 0.0;
    const std::vector<cplx> cr = coherent_amps(alpha_r, h.n_r);
    const std::vector<cplx> cl = coherent_amps(alpha_l, h.n_l);

    auto tail = [](const std::vector<cplx>& c) {
        double kept = 0.0;
        for (const cplx& x : c) kept += std::norm(x);
        return 1.0 - kept;
    };
    const double worst_tail = std::max(tail(cr), tail(cl));
    if (worst_tail > kCoherentTailTol) {
        const int suggest = coherent_fock_levels(std::max(alpha_r, alpha_l) *
                                                 std::max(alpha_r, alpha_l));
        throw SimulationError(
            "source_pulse_state: coherent amplitude truncated by " + std::to_string(worst_tail) +
            "; raise the Fock cutoff to at least " + std::to_string(suggest) + " levels");
    }

    for (int mr = 0; mr < h.n_r; ++mr)
        for (int ml = 0; ml < h.n_l; ++ml) v(idx(mr, ml)) = cr[mr] * cl[ml];
    v.normalize();
    return v;
}

Eigen::VectorXcd initial_state(const HilbertLayout& h, const Eigen::Vector4cd& emitter_amps,
                               const SourceSpec& src) {
    const double n2 = emitter_amps.squaredNorm();
    if (std::abs(n2 - 1.0) > 1e-9)
        throw std::invalid_argument("initial_state: emitter amplitudes must be normalized");
    const Eigen::VectorXcd pulse = source_pulse_state(src, h);
    Eigen::VectorXcd v = Eigen::VectorXcd::Zero(h.dim());
    const int modes = h.n_r * h.n_l;
    for (int e = 0; e < 4; ++e) {
        if (emitter_amps(e) == cplx(0.0))
            continue;
        v.segment(e * modes, modes) = emitter_amps(e) * pulse;
    }
    return v;
}

Eigen::MatrixXcd initial_density(const HilbertLayout& h, const Eigen::Vector4cd& emitter_amps,
                                 const SourceSpec& src) {
    const Eigen::VectorXcd v = initial_state(h, emitter_amps, src);
    return v * v.adjoint();
}

} // namespace spisim::slh
