#include "spisim/polarization.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "spisim/integrator.hpp"

namespace spisim::pol {
namespace {

using ops::ShapedOp;
using ops::SpMat;

double auto_t_end(const slh::CascadeConfig& cfg) {
    const double gamma = cfg.emitter.gamma;
    const PhotonEnvelope& env = cfg.source.envelope;
    if (env.is_exponential())
        return std::max(25.0 / gamma, 25.0 / env.bandwidth());
    return env.duration() + 10.0 / gamma;
}

cplx trace_with(const SpMat& op, const Eigen::MatrixXcd& rho) {
    cplx acc = 0.0;
    for (int k = 0; k < op.outerSize(); ++k)
        for (SpMat::InnerIterator it(op, k); it; ++it)
            acc += it.value() * rho(it.col(), it.row());
    return acc;
}

} // namespace

std::pair<double, double> polar_angles(double ex, double ey, double ez) {
    const double r = std::sqrt(ex * ex + ey * ey + ez * ez);
    if (r < 1e-12)
        throw std::invalid_argument("polar_angles: zero-length Stokes vector");
    const double theta = std::acos(std::clamp(ez / r, -1.0, 1.0));
    const double phi = std::atan2(ey, ex);
    return {theta, phi};
}

Trajectory stokes_trajectory(const TrajectoryConfig& cfg) {
    if (cfg.spin != ops::kUp && cfg.spin != ops::kDown)
        throw std::invalid_argument("stokes_trajectory: spin must be kUp or kDown");
    if (cfg.samples < 2)
        throw std::invalid_argument("stokes_trajectory: need at least 2 samples");
    if (cfg.intensity_floor <= 0.0)
        throw std::invalid_argument("stokes_trajectory: intensity floor must be positive");

    const slh::Generator gen = slh::build_cascade(cfg.cascade);

    ShapedOp lr, ll;
    for (std::size_t j = 0; j < gen.jumps.size(); ++j) {
        if (gen.roles[j] == slh::ChannelRole::TransmitR) lr = gen.jumps[j];
        if (gen.roles[j] == slh::ChannelRole::TransmitL) ll = gen.jumps[j];
    }
    if (lr.empty() || ll.empty())
        throw SimulationError("stokes_trajectory: generator lacks transmit channels");

    const double inv = 1.0 / std::sqrt(2.0);
    const ShapedOp lh = cplx(inv) * lr + cplx(inv) * ll;
    const ShapedOp lv = cplx(inv) * lr + cplx(-inv) * ll;
    const ShapedOp ld = cplx(inv) * lr + cplx(0.0, -inv) * ll;
    const ShapedOp la = cplx(inv) * lr + cplx(0.0, inv) * ll;

    // Flux operators in the six analysis bases, g-dependent through the
    // drive amplitude.
    const ShapedOp flux[6] = {
        ShapedOp::product(lr.adjoint(), lr), ShapedOp::product(ll.adjoint(), ll),
        ShapedOp::product(lh.adjoint(), lh), ShapedOp::product(lv.adjoint(), lv),
        ShapedOp::product(ld.adjoint(), ld), ShapedOp::product(la.adjoint(), la)};

    const double t_end = cfg.t_end > 0.0 ? cfg.t_end : auto_t_end(cfg.cascade);
    std::vector<double> times(cfg.samples);
    for (int i = 0; i < cfg.samples; ++i)
        times[i] = t_end * static_cast<double>(i) / (cfg.samples - 1);

    Eigen::Vector4cd amps = Eigen::Vector4cd::Zero();
    amps(cfg.spin) = 1.0;
    const Eigen::MatrixXcd rho0 = slh::initial_density(gen.layout, amps, cfg.cascade.source);

    Trajectory out;
    out.samples.reserve(times.size());
    out.amp_r.reserve(times.size());
    out.amp_l.reserve(times.size());
    out.projected.reserve(times.size());

    const double floor = cfg.intensity_floor * cfg.cascade.emitter.gamma;
    bool have_prev_phi = false;
    double prev_phi = 0.0;

    auto analyze = [&](double t, const Eigen::MatrixXcd& rho) {
        const double g = gen.profile.value(t);
        double in[6];
        for (int j = 0; j < 6; ++j)
            in[j] = std::max(0.0, trace_with(flux[j].at(g), rho).real());

        StokesSample s;
        s.t = t;
        s.intensity = in[0] + in[1];
        const cplx ar = trace_with(lr.at(g), rho);
        const cplx al = trace_with(ll.at(g), rho);
        out.amp_r.push_back(ar);
        out.amp_l.push_back(al);

        cplx proj = 0.0;
        if (s.intensity >= floor) {
            s.eps_z = (in[0] - in[1]) / s.intensity;
            s.eps_x = (in[2] - in[3]) / s.intensity;
            s.eps_y = (in[4] - in[5]) / s.intensity;
            const double len =
                std::sqrt(s.eps_x * s.eps_x + s.eps_y * s.eps_y + s.eps_z * s.eps_z);
            if (len >= 1e-12) {
                auto [theta, phi] = polar_angles(s.eps_x, s.eps_y, s.eps_z);
                if (have_prev_phi)
                    phi += 2.0 * PI * std::round((prev_phi - phi) / (2.0 * PI));
                prev_phi = phi;
                have_prev_phi = true;
                s.theta = theta;
                s.phi = phi;
                s.defined = true;
                const cplx er = std::cos(theta / 2.0);
                const cplx el = std::sin(theta / 2.0) * std::exp(cplx(0.0, phi));
                proj = std::conj(er) * ar + std::conj(el) * al;
            }
        }
        out.projected.push_back(proj);
        out.samples.push_back(s);
    };

    me::EvolveResult run = me::evolve(gen, rho0, times, {}, cfg.integrator, analyze);
    out.max_truncation = run.max_truncation;
    return out;
}

cplx conditional_amplitude(const Trajectory& traj, double t) {
    if (traj.samples.empty())
        throw std::invalid_argument("conditional_amplitude: empty trajectory");
    std::size_t best = 0;
    double dist = std::abs(traj.samples[0].t - t);
    for (std::size_t i = 1; i < traj.samples.size(); ++i) {
        const double d = std::abs(traj.samples[i].t - t);
        if (d < dist) {
            dist = d;
            best = i;
        }
    }
    if (!traj.samples[best].defined)
        throw SimulationError("conditional_amplitude: polarization undefined at this time");
    return traj.projected[best];
}

} // namespace spisim::pol
