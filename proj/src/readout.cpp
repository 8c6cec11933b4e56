#include "spisim/readout.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "spisim/integrator.hpp"
#include "spisim/parallel.hpp"

namespace spisim::readout {
namespace {

// Keep log ratios finite: perfect readout and saturated overlaps otherwise
// produce 0/0 or inf/inf cells.
constexpr double kBhatFloor = 1e-12;
constexpr double kBhatCeil = 1.0 - 1e-9;

double clip_bhat(double b) { return std::clamp(b, kBhatFloor, kBhatCeil); }

Eigen::Vector4cd spin_basis(int level) {
    if (level != ops::kUp && level != ops::kDown)
        throw std::invalid_argument("readout: spin level must be kUp or kDown");
    Eigen::Vector4cd s = Eigen::Vector4cd::Zero();
    s(level) = 1.0;
    return s;
}

double wrap_angle(double phi) {
    while (phi > PI) phi -= 2.0 * PI;
    while (phi <= -PI) phi += 2.0 * PI;
    return phi;
}

} // namespace

ConditionedRun no_click_probability(const slh::MichelsonConfig& cfg, int spin_level,
                                    const metrics::NumericOptions& opts) {
    slh::MichelsonConfig cnd = cfg;
    cnd.condition_no_click = true;
    const slh::Generator gen = slh::build_michelson(cnd);
    const Eigen::MatrixXcd rho0 =
        slh::initial_density(gen.layout, spin_basis(spin_level), cnd.source);

    const metrics::TimeWindow w =
        metrics::convergence_window(cnd.source.envelope, cnd.emitter.gamma, opts);
    const me::ConvergenceResult cr =
        me::evolve_until_converged(gen, rho0, {}, opts.threshold, w.floor, w.cap);

    ConditionedRun r;
    r.p_click = std::clamp(1.0 - cr.run.rho.trace().real(), 0.0, 1.0);
    r.converged = cr.converged;
    r.t_final = cr.t_final;
    r.truncation = cr.run.max_truncation;
    return r;
}

ClickStatistics click_probabilities(const slh::MichelsonConfig& cfg,
                                    const metrics::NumericOptions& opts) {
    const ConditionedRun up = no_click_probability(cfg, ops::kUp, opts);
    const ConditionedRun down = no_click_probability(cfg, ops::kDown, opts);
    ClickStatistics s;
    s.p_up = up.p_click;
    s.p_down = down.p_click;
    s.converged = up.converged && down.converged;
    return s;
}

double cbhat(const ClickStatistics& s) { return metrics::bhat_classical(s.p_up, s.p_down); }

double calibrate_phase(const slh::MichelsonConfig& cfg, const CalibrationOptions& copt) {
    if (cfg.eta <= 0.0)
        throw SimulationError("calibrate_phase: eta = 0 leaves the click contrast flat");
    if (copt.scan_points < 8)
        throw std::invalid_argument("calibrate_phase: need at least 8 scan points");

    slh::MichelsonConfig ref = cfg;
    ref.source.envelope =
        PhotonEnvelope::exponential(copt.reference_bandwidth * cfg.emitter.gamma);

    auto contrast = [&](double phi) {
        slh::MichelsonConfig c = ref;
        c.phase = wrap_angle(phi);
        const ClickStatistics s = click_probabilities(c);
        return s.p_up - s.p_down;
    };

    // Coarse scan over the full circle, then golden-section refinement in the
    // unwrapped bracket around the best grid point.
    const int n = copt.scan_points;
    const double step = 2.0 * PI / n;
    int best = 0;
    double best_val = -2.0, lo_val = 2.0;
    std::vector<double> vals(n);
    for (int k = 0; k < n; ++k) {
        const double phi = -PI + step * (k + 1);
        vals[k] = contrast(phi);
        if (vals[k] > best_val) {
            best_val = vals[k];
            best = k;
        }
        lo_val = std::min(lo_val, vals[k]);
    }
    if (best_val - lo_val < 1e-9)
        throw SimulationError("calibrate_phase: click contrast is flat over the phase scan");

    double a = -PI + step * best;       // neighbor below the best point
    double b = -PI + step * (best + 2); // neighbor above, possibly > pi
    const double gr = (std::sqrt(5.0) - 1.0) / 2.0;
    double x1 = b - gr * (b - a);
    double x2 = a + gr * (b - a);
    double f1 = contrast(x1);
    double f2 = contrast(x2);
    while (b - a > copt.tol) {
        if (f1 < f2) {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + gr * (b - a);
            f2 = contrast(x2);
        } else {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - gr * (b - a);
            f1 = contrast(x1);
        }
    }
    return wrap_angle(0.5 * (a + b));
}

ReadoutCurves readout_curves(std::vector<double> bandwidth, const slh::EmitterSpec& emitter,
                             double eta, unsigned workers, const metrics::NumericOptions& opts) {
    for (std::size_t i = 0; i < bandwidth.size(); ++i)
        if (bandwidth[i] <= 0.0 || (i > 0 && bandwidth[i] <= bandwidth[i - 1]))
            throw std::invalid_argument("readout_curves: bandwidths must be ascending and > 0");
    if (bandwidth.empty())
        throw std::invalid_argument("readout_curves: empty bandwidth grid");
    if (eta <= 0.0 || eta > 1.0)
        throw std::invalid_argument("readout_curves: eta must lie in (0, 1]");

    slh::MichelsonConfig base;
    base.emitter = emitter;
    base.eta = eta;
    base.source.kind = slh::SourceSpec::Kind::Superposition;
    base.source.pol = slh::SourceSpec::Pol::R;
    base.source.n_bar = 1.0;

    ReadoutCurves out;
    out.phase_star = calibrate_phase(base);
    out.bandwidth = std::move(bandwidth);
    const std::size_t n = out.bandwidth.size();
    out.b_cl_qs.assign(n, std::nan(""));
    out.b_q_qs.assign(n, std::nan(""));
    out.b_q_cs.assign(n, std::nan(""));
    out.flags.assign(n, std::string{});

    parallel_for(n, workers, [&](std::size_t i) {
        const double bw = out.bandwidth[i] * emitter.gamma;
        try {
            slh::MichelsonConfig qs = base;
            qs.phase = out.phase_star;
            qs.source.envelope = PhotonEnvelope::exponential(bw);
            out.b_cl_qs[i] = cbhat(click_probabilities(qs, opts));
            out.b_q_qs[i] = metrics::qbhat_numeric_michelson(qs, opts).value;

            slh::MichelsonConfig cs = qs;
            cs.source.kind = slh::SourceSpec::Kind::Coherent;
            out.b_q_cs[i] = metrics::qbhat_numeric_michelson(cs, opts).value;
        } catch (const std::exception& e) {
            out.flags[i] = e.what();
        }
    });
    return out;
}

double AdvantageMap::ratio_at(std::size_t i, std::size_t j) const {
    return ratio.at(i * gamma_dephasing.size() + j);
}

AdvantageMap advantage_map(std::vector<double> eta, std::vector<double> gamma_dephasing,
                           double gamma, double bandwidth, unsigned workers,
                           const metrics::NumericOptions& opts) {
    auto ascending = [](const std::vector<double>& v) {
        for (std::size_t i = 1; i < v.size(); ++i)
            if (v[i] <= v[i - 1]) return false;
        return !v.empty();
    };
    if (!ascending(eta) || !ascending(gamma_dephasing))
        throw std::invalid_argument("advantage_map: axes must be strictly increasing");
    if (eta.front() <= 0.0 || eta.back() > 1.0)
        throw std::invalid_argument("advantage_map: eta must lie in (0, 1]");
    if (gamma_dephasing.front() < 0.0)
        throw std::invalid_argument("advantage_map: dephasing rates must be >= 0");
    if (gamma <= 0.0 || bandwidth <= 0.0)
        throw std::invalid_argument("advantage_map: rates must be positive");

    AdvantageMap map;
    map.eta = std::move(eta);
    map.gamma_dephasing = std::move(gamma_dephasing);
    map.bandwidth = bandwidth;

    slh::MichelsonConfig calib;
    calib.emitter.gamma = gamma;
    calib.eta = map.eta.back();
    calib.source.kind = slh::SourceSpec::Kind::Superposition;
    calib.source.pol = slh::SourceSpec::Pol::R;
    calib.source.n_bar = 1.0;
    map.phase_star = calibrate_phase(calib);

    const std::size_t total = map.rows() * map.cols();
    map.b_cl.assign(total, std::nan(""));
    map.b_q.assign(total, std::nan(""));
    map.ratio.assign(total, std::nan(""));
    map.advantage.assign(total, 0);
    map.flags.assign(total, std::string{});

    parallel_for(total, workers, [&](std::size_t idx) {
        const std::size_t i = idx / map.cols();
        const std::size_t j = idx % map.cols();
        try {
            slh::MichelsonConfig qs;
            qs.emitter.gamma = gamma;
            qs.emitter.gamma_dephasing = map.gamma_dephasing[j] * gamma;
            qs.eta = map.eta[i];
            qs.phase = map.phase_star;
            qs.source.kind = slh::SourceSpec::Kind::Superposition;
            qs.source.pol = slh::SourceSpec::Pol::R;
            qs.source.n_bar = 1.0;
            qs.source.envelope = PhotonEnvelope::exponential(bandwidth * gamma);
            map.b_cl[idx] = cbhat(click_probabilities(qs, opts));

            slh::MichelsonConfig cs = qs;
            cs.source.kind = slh::SourceSpec::Kind::Coherent;
            map.b_q[idx] = metrics::qbhat_numeric_michelson(cs, opts).value;

            map.ratio[idx] =
                std::log(clip_bhat(map.b_cl[idx])) / std::log(clip_bhat(map.b_q[idx]));
            map.advantage[idx] = map.ratio[idx] > 1.0 ? 1 : 0;
        } catch (const std::exception& e) {
            map.flags[idx] = e.what();
        }
    });
    return map;
}

std::optional<double> threshold_crossing(std::span<const double> axis,
                                         std::span<const double> ratio) {
    if (axis.size() != ratio.size())
        throw std::invalid_argument("threshold_crossing: axis/ratio size mismatch");
    std::optional<std::size_t> prev;
    for (std::size_t i = 0; i < ratio.size(); ++i) {
        if (std::isnan(ratio[i])) continue;
        if (prev) {
            const double a = ratio[*prev] - 1.0;
            const double b = ratio[i] - 1.0;
            if (a == 0.0) return axis[*prev];
            if (a * b < 0.0) {
                const double f = a / (a - b);
                return axis[*prev] + f * (axis[i] - axis[*prev]);
            }
        }
        prev = i;
    }
    if (prev && ratio[*prev] == 1.0) return axis[*prev];
    return std::nullopt;
}

} // namespace spisim::readout
