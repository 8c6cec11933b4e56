#include "spisim/pointer_metrics.hpp"

#include <algorithm>
#include <cmath>
#include <initializer_list>
#include <sstream>
#include <utility>

#include "spisim/integrator.hpp"
#include "spisim/parallel.hpp"

namespace spisim::metrics {
namespace {

double clamp01(double v) { return std::clamp(v, 0.0, 1.0); }

std::string fmt_params(std::initializer_list<std::pair<const char*, double>> kv) {
    std::ostringstream os;
    bool first = true;
    for (const auto& [k, v] : kv) {
        if (!first) os << " ";
        os << k << "=" << v;
        first = false;
    }
    return os.str();
}

double probe_bandwidth_scale(const PhotonEnvelope& env) {
    if (env.is_exponential())
        return env.bandwidth();
    // Custom pulses: the support length sets the slow scale.
    return 1.0 / std::max(env.duration(), 1e-12);
}

} // namespace

TimeWindow convergence_window(const PhotonEnvelope& env, double gamma,
                              const NumericOptions& opts) {
    const double slow = std::min(gamma, probe_bandwidth_scale(env));
    TimeWindow w;
    w.floor = opts.t_floor > 0.0 ? opts.t_floor : 12.0 / slow;
    w.cap = opts.t_cap > 0.0 ? opts.t_cap : 60.0 / slow;
    if (!env.is_exponential()) {
        // The pulse must have fully entered before convergence can trigger.
        w.floor = std::max(w.floor, env.duration() + 12.0 / gamma);
        w.cap = std::max(w.cap, 2.0 * w.floor);
    }
    if (w.cap < w.floor)
        w.cap = w.floor;
    return w;
}

namespace {

BhatResult coherence_run(const slh::Generator& gen, const Eigen::MatrixXcd& rho0,
                         const PhotonEnvelope& env, double gamma,
                         const NumericOptions& opts, std::string params) {
    const TimeWindow w = convergence_window(env, gamma, opts);
    const std::vector<ops::SpMat> obs{ops::spin_coherence(gen.layout)};
    const me::ConvergenceResult cr =
        me::evolve_until_converged(gen, rho0, obs, opts.threshold, w.floor, w.cap);

    BhatResult r;
    r.value = clamp01(2.0 * std::abs(cr.run.samples.back().values[0]));
    r.method = BhatMethod::NumericMasterEquation;
    r.error_estimate = std::max(cr.run.max_truncation, 1e-9);
    r.converged = cr.converged;
    r.t_converged = cr.t_final;
    r.params = std::move(params);
    return r;
}

Eigen::Vector4cd spin_superposition() {
    Eigen::Vector4cd s = Eigen::Vector4cd::Zero();
    s(ops::kUp) = 1.0 / std::sqrt(2.0);
    s(ops::kDown) = 1.0 / std::sqrt(2.0);
    return s;
}

} // namespace

BhatResult qbhat_coherent_square(const analytic::SquareDriveParams& d, double eval_time) {
    d.validate();
    if (eval_time < 0.0)
        throw std::invalid_argument("qbhat_coherent_square: eval_time must be >= 0");
    const double t_drive = std::min(eval_time, d.tau);
    const cplx fg = analytic::f0_amplitudes(d, t_drive).ground;
    BhatResult r;
    r.value = clamp01(std::norm(fg));
    r.method = BhatMethod::AnalyticSquare;
    r.error_estimate = 0.0;
    // The ground no-scatter amplitude freezes when the drive stops; the
    // excited component still needs ~10/gamma to finish decaying.
    r.converged = eval_time >= d.tau + 10.0 / d.gamma;
    r.t_converged = eval_time;
    r.params = fmt_params({{"rabi", d.rabi()}, {"gamma", d.gamma}, {"tau", d.tau}});
    return r;
}

BhatResult qbhat_quantum_exp(double n_bar, double bandwidth, double gamma) {
    if (n_bar < 0.0 || n_bar > 1.0)
        throw std::invalid_argument("qbhat_quantum_exp: n_bar must lie in [0, 1]");
    if (bandwidth <= 0.0 || gamma <= 0.0)
        throw std::invalid_argument("qbhat_quantum_exp: rates must be positive");
    BhatResult r;
    r.value = clamp01(std::abs(1.0 - 2.0 * n_bar * gamma / (gamma + bandwidth)));
    r.method = BhatMethod::AnalyticExponential;
    r.error_estimate = 0.0;
    r.converged = true;
    r.t_converged = 0.0;
    r.params = fmt_params({{"n_bar", n_bar}, {"bandwidth", bandwidth}, {"gamma", gamma}});
    return r;
}

BhatResult qbhat_quantum_general(const slh::SourceSpec& probe, double gamma) {
    if (probe.kind != slh::SourceSpec::Kind::Superposition)
        throw std::invalid_argument("qbhat_quantum_general: needs a zero/one photon probe");
    if (probe.n_bar < 0.0 || probe.n_bar > 1.0)
        throw std::invalid_argument("qbhat_quantum_general: n_bar must lie in [0, 1]");
    const double norm_err = std::abs(probe.envelope.norm() - 1.0);
    if (norm_err > 1e-8)
        throw std::invalid_argument("qbhat_quantum_general: envelope is not normalized");

    const double tau = probe.envelope.duration() + 40.0 / gamma;
    const analytic::SinglePhotonScatter sc(probe.envelope, gamma, tau);
    const double overlap = sc.overlap_with_input().real();

    BhatResult r;
    r.value = clamp01(std::abs((1.0 - probe.n_bar) + probe.n_bar * overlap));
    r.method = BhatMethod::OverlapQuadrature;
    r.error_estimate = probe.envelope.is_exponential()
                           ? 1e-10
                           : probe.envelope.grid_step() * probe.envelope.grid_step();
    r.converged = true;
    r.t_converged = tau;
    r.params = fmt_params({{"n_bar", probe.n_bar}, {"gamma", gamma}});
    return r;
}

BhatResult qbhat_numeric(const slh::CascadeConfig& cfg, const NumericOptions& opts) {
    const slh::Generator gen = slh::build_cascade(cfg);
    const Eigen::MatrixXcd rho0 = slh::initial_density(gen.layout, spin_superposition(), cfg.source);
    std::string params = fmt_params({{"n_bar", cfg.source.n_bar},
                                     {"gamma", cfg.emitter.gamma},
                                     {"gamma_star", cfg.emitter.gamma_dephasing},
                                     {"eta", cfg.eta}});
    return coherence_run(gen, rho0, cfg.source.envelope, cfg.emitter.gamma, opts,
                         std::move(params));
}

BhatResult qbhat_numeric_michelson(const slh::MichelsonConfig& cfg, const NumericOptions& opts) {
    slh::MichelsonConfig open = cfg;
    open.condition_no_click = false; // coherence route needs the full map
    const slh::Generator gen = slh::build_michelson(open);
    const Eigen::MatrixXcd rho0 = slh::initial_density(gen.layout, spin_superposition(), cfg.source);
    std::string params = fmt_params({{"n_bar", cfg.source.n_bar},
                                     {"gamma", cfg.emitter.gamma},
                                     {"gamma_star", cfg.emitter.gamma_dephasing},
                                     {"eta", cfg.eta},
                                     {"phase", cfg.phase}});
    return coherence_run(gen, rho0, cfg.source.envelope, cfg.emitter.gamma, opts,
                         std::move(params));
}

double bhat_classical(double p_up, double p_down) {
    if (p_up < 0.0 || p_up > 1.0 || p_down < 0.0 || p_down > 1.0)
        throw std::invalid_argument("bhat_classical: probabilities must lie in [0, 1]");
    return std::sqrt(p_up * p_down) + std::sqrt((1.0 - p_up) * (1.0 - p_down));
}

const BhatResult& SweepGrid::at(std::size_t i, std::size_t j) const {
    return cells.at(i * bandwidth.size() + j);
}

SweepGrid sweep_qbhat(std::vector<double> n_bar, std::vector<double> bandwidth, ProbeKind kind,
                      double gamma, unsigned workers, const NumericOptions& opts) {
    auto ascending = [](const std::vector<double>& v) {
        for (std::size_t i = 1; i < v.size(); ++i)
            if (v[i] <= v[i - 1]) return false;
        return !v.empty();
    };
    if (!ascending(n_bar) || !ascending(bandwidth))
        throw std::invalid_argument("sweep_qbhat: axes must be strictly increasing");
    if (gamma <= 0.0)
        throw std::invalid_argument("sweep_qbhat: gamma must be positive");

    SweepGrid grid;
    grid.n_bar = std::move(n_bar);
    grid.bandwidth = std::move(bandwidth);
    const std::size_t total = grid.rows() * grid.cols();
    grid.cells.assign(total, BhatResult{});
    grid.flags.assign(total, std::string{});

    parallel_for(total, workers, [&](std::size_t idx) {
        const std::size_t i = idx / grid.cols();
        const std::size_t j = idx % grid.cols();
        const double n = grid.n_bar[i];
        const double bw = grid.bandwidth[j] * gamma;
        try {
            if (kind == ProbeKind::Quantum) {
                grid.cells[idx] = qbhat_quantum_exp(n, bw, gamma);
            } else {
                slh::CascadeConfig cfg;
                cfg.emitter.gamma = gamma;
                cfg.source.kind = slh::SourceSpec::Kind::Coherent;
                cfg.source.pol = slh::SourceSpec::Pol::H;
                cfg.source.n_bar = n;
                cfg.source.envelope = PhotonEnvelope::exponential(bw);
                grid.cells[idx] = qbhat_numeric(cfg, opts);
            }
        } catch (const std::exception& e) {
            grid.flags[idx] = e.what();
            grid.cells[idx].value = std::nan("");
            grid.cells[idx].converged = false;
        }
    });
    return grid;
}

} // namespace spisim::metrics
