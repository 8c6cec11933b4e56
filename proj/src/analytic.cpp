#include "spisim/analytic.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "spisim/quadrature.hpp"

namespace spisim::analytic {
namespace {

struct F0Real {
    double g;
    double e;
};

// Real-valued no-jump pair.  Three regimes: series around the critically
// damped point, trig above it, explicit exponentials below it (the cosh/sinh
// form overflows for gamma*t of a few thousand, the split form cannot).
F0Real f0_real(double omega, double gamma, double t) {
    const double disc = omega * omega - 0.25 * gamma * gamma;
    const double z = 0.25 * disc * t * t;
    F0Real out;
    if (std::abs(z) < 1e-8) {
        const double c = 1.0 - z / 2.0 + z * z / 24.0;
        const double s = 1.0 - z / 6.0 + z * z / 120.0;
        const double damp = std::exp(-0.25 * gamma * t);
        out.g = damp * (c + 0.25 * gamma * t * s);
        out.e = damp * 0.5 * omega * t * s;
    } else if (disc > 0.0) {
        const double op = std::sqrt(disc);
        const double x = 0.5 * op * t;
        const double damp = std::exp(-0.25 * gamma * t);
        out.g = damp * (std::cos(x) + 0.5 * gamma / op * std::sin(x));
        out.e = damp * (omega / op) * std::sin(x);
    } else {
        const double kap = std::sqrt(-disc); // <= gamma/2, so both exponents <= 0
        const double ep = std::exp((0.5 * kap - 0.25 * gamma) * t);
        const double em = std::exp(-(0.5 * kap + 0.25 * gamma) * t);
        const double r = 0.5 * gamma / kap;
        out.g = 0.5 * ((1.0 + r) * ep + (1.0 - r) * em);
        out.e = 0.5 * (omega / kap) * (ep - em);
    }
    return out;
}

double f0_branch(double omega, double gamma, double t, Branch eps) {
    const F0Real f = f0_real(omega, gamma, t);
    return eps == Branch::Ground ? f.g : f.e;
}

// Chain product over ordered jump times; excludes the (-sqrt(gamma))^n
// prefactor, which callers square or attach as needed.
double chain_product(double omega, double gamma, Branch eps, double tau,
                     std::span<const double> times) {
    double prod = f0_branch(omega, gamma, times.front(), Branch::Excited);
    for (std::size_t i = 1; i < times.size(); ++i)
        prod *= f0_branch(omega, gamma, times[i] - times[i - 1], Branch::Excited);
    prod *= f0_branch(omega, gamma, tau - times.back(), eps);
    return prod;
}

void check_times(int n, double tau, std::span<const double> times) {
    if (static_cast<int>(times.size()) != n)
        throw std::invalid_argument("fn_amplitude: times.size() != n");
    double prev = 0.0;
    for (double t : times) {
        if (t < prev || t > tau)
            throw std::invalid_argument("fn_amplitude: jump times must be ordered in [0, tau]");
        prev = t;
    }
}

PnValue pn_impl(const SquareDriveParams& d, int n, Branch eps, double tau,
                std::uint64_t seed) {
    const double omega = d.rabi();
    if (n == 0) {
        const double f = f0_branch(omega, d.gamma, tau, eps);
        return {f * f, 0.0};
    }
    const double gn = std::pow(d.gamma, n);
    auto integrand = [&](std::span<const double> ts) {
        const double c = chain_product(omega, d.gamma, eps, tau, ts);
        return gn * c * c;
    };
    const quad::QuadResult r = quad::simplex_integrate(integrand, n, tau, 1e-9, seed);
    return {r.value, r.error};
}

// Bound on the mass above n_max from the computed distribution.
double tail_from_partial(double accounted) {
    return std::max(0.0, 1.0 - accounted);
}

} // namespace

double SquareDriveParams::rabi() const { return 2.0 * std::sqrt(gamma) * beta; }

SquareDriveParams SquareDriveParams::from_rabi(double omega, double gamma, double tau) {
    if (gamma <= 0.0)
        throw std::invalid_argument("SquareDriveParams: gamma must be positive");
    return SquareDriveParams{omega / (2.0 * std::sqrt(gamma)), gamma, tau};
}

void SquareDriveParams::validate() const {
    if (gamma <= 0.0)
        throw std::invalid_argument("SquareDriveParams: gamma must be positive");
    if (tau < 0.0)
        throw std::invalid_argument("SquareDriveParams: tau must be non-negative");
    if (beta < 0.0)
        throw std::invalid_argument("SquareDriveParams: beta must be non-negative");
}

F0Pair f0_amplitudes(const SquareDriveParams& d, double t) {
    d.validate();
    if (t < 0.0)
        throw std::invalid_argument("f0_amplitudes: t must be non-negative");
    const F0Real f = f0_real(d.rabi(), d.gamma, t);
    return {cplx(f.g, 0.0), cplx(f.e, 0.0)};
}

cplx fn_amplitude(const SquareDriveParams& d, int n, Branch eps, double tau,
                  std::span<const double> times) {
    d.validate();
    if (n < 0)
        throw std::invalid_argument("fn_amplitude: n must be non-negative");
    if (tau < 0.0 || tau > d.tau)
        throw std::invalid_argument("fn_amplitude: tau outside the drive window");
    const double omega = d.rabi();
    if (n == 0)
        return cplx(f0_branch(omega, d.gamma, tau, eps), 0.0);
    check_times(n, tau, times);
    const double chain = chain_product(omega, d.gamma, eps, tau, times);
    const double pref = std::pow(-std::sqrt(d.gamma), n);
    return cplx(pref * chain, 0.0);
}

PnValue pn_probability(const SquareDriveParams& d, int n, Branch eps, double tau,
                       std::uint64_t seed) {
    d.validate();
    if (n < 0)
        throw std::invalid_argument("pn_probability: n must be non-negative");
    if (tau < 0.0 || tau > d.tau)
        throw std::invalid_argument("pn_probability: tau outside the drive window");
    if (n > kDefaultNMax) {
        // Estimate what is still unaccounted using the cheap low orders.
        double acc = 0.0;
        for (int m = 0; m <= 3; ++m)
            for (Branch b : {Branch::Ground, Branch::Excited})
                acc += pn_impl(d, m, b, tau, seed).value;
        throw CutoffError("pn_probability: n = " + std::to_string(n) +
                              " exceeds the supported photon-number cutoff " +
                              std::to_string(kDefaultNMax),
                          kDefaultNMax, tail_from_partial(acc));
    }
    return pn_impl(d, n, eps, tau, seed);
}

double ScatterProbabilities::total() const {
    double s = 0.0;
    for (const PnValue& p : ground) s += p.value;
    for (const PnValue& p : excited) s += p.value;
    return s;
}

ScatterProbabilities scatter_probabilities(const SquareDriveParams& d, double tau,
                                           int n_max, std::uint64_t seed) {
    d.validate();
    if (n_max < 0 || n_max > kDefaultNMax)
        throw std::invalid_argument("scatter_probabilities: n_max must lie in [0, " +
                                    std::to_string(kDefaultNMax) + "]");
    ScatterProbabilities out;
    out.tau = tau;
    out.n_max = n_max;
    out.ground.reserve(n_max + 1);
    out.excited.reserve(n_max + 1);
    for (int n = 0; n <= n_max; ++n) {
        out.ground.push_back(pn_probability(d, n, Branch::Ground, tau, seed));
        out.excited.push_back(pn_probability(d, n, Branch::Excited, tau, seed));
    }
    out.tail_bound = tail_from_partial(out.total());
    return out;
}

SinglePhotonScatter::SinglePhotonScatter(const PhotonEnvelope& envelope, double gamma,
                                         double tau)
    : env_(envelope), gamma_(gamma), tau_(tau) {
    if (gamma_ <= 0.0)
        throw std::invalid_argument("SinglePhotonScatter: gamma must be positive");
    if (tau_ < 0.0)
        throw std::invalid_argument("SinglePhotonScatter: tau must be non-negative");
    if (env_.is_exponential())
        return;
    // Grid recurrence: xi_tilde(t_{i+1}) = e^{-gamma dt/2} xi_tilde(t_i)
    // + local integral, with the midpoint of xi interpolated linearly.
    const auto& ts = env_.grid();
    const auto& xs = env_.samples();
    const double dt = env_.grid_step();
    xt_grid_.assign(ts.size(), cplx(0.0));
    const double decay_full = std::exp(-0.5 * gamma_ * dt);
    const double decay_half = std::exp(-0.25 * gamma_ * dt);
    for (std::size_t i = 0; i + 1 < ts.size(); ++i) {
        const cplx mid = 0.5 * (xs[i] + xs[i + 1]);
        const cplx local = dt / 6.0 * (xs[i] * decay_full + 4.0 * mid * decay_half + xs[i + 1]);
        xt_grid_[i + 1] = decay_full * xt_grid_[i] + local;
    }
}

cplx SinglePhotonScatter::xi_tilde(double t) const {
    if (t <= 0.0)
        return cplx(0.0);
    if (env_.is_exponential()) {
        const double bw = env_.bandwidth();
        const double delta = 0.5 * (gamma_ - bw);
        if (std::abs(delta * t) < 0.1) {
            const double x = delta * t;
            const double phi1 = x == 0.0 ? 1.0 : std::expm1(x) / x;
            return cplx(std::sqrt(bw) * std::exp(-0.5 * gamma_ * t) * t * phi1, 0.0);
        }
        return cplx(std::sqrt(bw) *
                        (std::exp(-0.5 * bw * t) - std::exp(-0.5 * gamma_ * t)) / delta,
                    0.0);
    }
    const auto& ts = env_.grid();
    if (t <= ts.front())
        return cplx(0.0);
    if (t >= ts.back())
        return xt_grid_.back() * std::exp(-0.5 * gamma_ * (t - ts.back()));
    const double dt = env_.grid_step();
    const auto i = static_cast<std::size_t>((t - ts.front()) / dt);
    const std::size_t j = std::min(i, ts.size() - 2);
    const double w = (t - ts[j]) / dt;
    return (1.0 - w) * xt_grid_[j] + w * xt_grid_[j + 1];
}

cplx SinglePhotonScatter::upsilon(double t) const {
    return env_.value(t) - gamma_ * xi_tilde(t);
}

double SinglePhotonScatter::excited_norm() const {
    return gamma_ * std::norm(xi_tilde(tau_));
}

double SinglePhotonScatter::passed_norm() const {
    if (env_.is_exponential())
        return std::exp(-env_.bandwidth() * tau_);
    const auto& ts = env_.grid();
    if (tau_ >= ts.back())
        return 0.0;
    const auto& xs = env_.samples();
    std::vector<double> density(xs.size());
    for (std::size_t i = 0; i < xs.size(); ++i) density[i] = std::norm(xs[i]);
    const std::vector<double> cum = quad::cumulative_uniform(density, env_.grid_step());
    if (tau_ <= ts.front())
        return cum.back();
    const double dt = env_.grid_step();
    const auto i = std::min(static_cast<std::size_t>((tau_ - ts.front()) / dt), ts.size() - 2);
    const double w = (tau_ - ts[i]) / dt;
    const double upto = (1.0 - w) * cum[i] + w * cum[i + 1];
    return std::max(0.0, cum.back() - upto);
}

double SinglePhotonScatter::emitted_norm() const {
    if (env_.is_exponential()) {
        auto f = [&](double t) { return std::norm(upsilon(t)); };
        return quad::integrate(f, 0.0, tau_, 1e-12).value;
    }
    const auto& ts = env_.grid();
    const double end = std::clamp(tau_, ts.front(), ts.back());
    std::vector<double> density(ts.size());
    for (std::size_t i = 0; i < ts.size(); ++i)
        density[i] = std::norm(env_.samples()[i] - gamma_ * xt_grid_[i]);
    const std::vector<double> cum = quad::cumulative_uniform(density, env_.grid_step());
    const double dt = env_.grid_step();
    const auto i = std::min(static_cast<std::size_t>((end - ts.front()) / dt), ts.size() - 2);
    const double w = (end - ts[i]) / dt;
    double val = (1.0 - w) * cum[i] + w * cum[i + 1];
    // Beyond the grid the input vanishes and the stored excitation decays.
    if (tau_ > ts.back()) {
        const double n0 = std::norm(xt_grid_.back());
        val += gamma_ * n0 * (1.0 - std::exp(-gamma_ * (tau_ - ts.back())));
    }
    return val;
}

double SinglePhotonScatter::norm_deficit() const {
    return std::abs(excited_norm() + passed_norm() + emitted_norm() - 1.0);
}

cplx SinglePhotonScatter::overlap_with_input() const {
    if (env_.is_exponential()) {
        auto re = [&](double t) { return (std::conj(env_.value(t)) * upsilon(t)).real(); };
        auto im = [&](double t) { return (std::conj(env_.value(t)) * upsilon(t)).imag(); };
        const double end = std::min(tau_, 60.0 / env_.bandwidth() + 60.0 / gamma_);
        return cplx(quad::integrate(re, 0.0, end, 1e-12).value,
                    quad::integrate(im, 0.0, end, 1e-12).value);
    }
    const auto& ts = env_.grid();
    const double end = std::clamp(tau_, ts.front(), ts.back());
    std::vector<cplx> density(ts.size());
    for (std::size_t i = 0; i < ts.size(); ++i)
        density[i] = std::conj(env_.samples()[i]) * (env_.samples()[i] - gamma_ * xt_grid_[i]);
    const std::vector<cplx> cum = quad::cumulative_uniform(density, env_.grid_step());
    const double dt = env_.grid_step();
    const auto i = std::min(static_cast<std::size_t>((end - ts.front()) / dt), ts.size() - 2);
    const double w = (end - ts[i]) / dt;
    return (1.0 - w) * cum[i] + w * cum[i + 1];
}

MeanAmplitude mean_output_amplitude(const SquareDriveParams& d, double t, int n_max,
                                    std::uint64_t seed) {
    d.validate();
    if (t < 0.0 || t > d.tau)
        throw std::invalid_argument("mean_output_amplitude: t outside the drive window");
    if (n_max < 0 || n_max > kDefaultNMax)
        throw std::invalid_argument("mean_output_amplitude: n_max must lie in [0, " +
                                    std::to_string(kDefaultNMax) + "]");
    const double omega = d.rabi();
    const F0Real f0 = f0_real(omega, d.gamma, t);

    double sigma = f0.e * f0.g;
    double accounted = f0.g * f0.g + f0.e * f0.e;
    int n_used = 0;
    for (int n = 1; n <= n_max; ++n) {
        if (tail_from_partial(accounted) < 1e-14)
            break;
        const double gn = std::pow(d.gamma, n);
        auto cross = [&](std::span<const double> ts) {
            const double ce = chain_product(omega, d.gamma, Branch::Excited, t, ts);
            const double cg = chain_product(omega, d.gamma, Branch::Ground, t, ts);
            return gn * ce * cg;
        };
        sigma += quad::simplex_integrate(cross, n, t, 1e-9, seed).value;
        accounted += pn_impl(d, n, Branch::Ground, t, seed).value;
        accounted += pn_impl(d, n, Branch::Excited, t, seed).value;
        n_used = n;
    }
    // Cauchy-Schwarz: the dropped cross terms are bounded by half the
    // unaccounted probability mass.
    const double tail = 0.5 * tail_from_partial(accounted);
    if (tail > 1e-3)
        throw SimulationError(
            "mean_output_amplitude: emission series tail bound " + std::to_string(tail) +
            " exceeds 1e-3; the drive is too strong or too long for the closed-form series");
    MeanAmplitude out;
    out.dipole = cplx(sigma, 0.0);
    out.value = cplx(d.beta - std::sqrt(d.gamma) * sigma, 0.0);
    out.tail_bound = tail;
    out.n_used = n_used;
    return out;
}

double linear_regime_residual(const SquareDriveParams& d, std::span<const double> t_grid) {
    d.validate();
    if (d.beta == 0.0)
        return 0.0;
    double worst = 0.0;
    bool any = false;
    for (double t : t_grid) {
        if (t < 5.0 / d.gamma)
            continue;
        any = true;
        const MeanAmplitude m = mean_output_amplitude(d, t);
        worst = std::max(worst, std::abs(m.value + cplx(d.beta, 0.0)) / d.beta);
    }
    if (!any)
        throw std::invalid_argument(
            "linear_regime_residual: no grid points in the quasi-steady window t >= 5/gamma");
    return worst;
}

double linear_regime_residual(const SquareDriveParams& d) {
    if (d.beta == 0.0)
        return 0.0;
    if (d.tau < 5.0 / d.gamma)
        throw std::invalid_argument(
            "linear_regime_residual: drive shorter than the quasi-steady window 5/gamma");
    std::vector<double> grid;
    const int npts = 12;
    for (int i = 0; i < npts; ++i)
        grid.push_back(5.0 / d.gamma + (d.tau - 5.0 / d.gamma) * i / (npts - 1.0));
    return linear_regime_residual(d, grid);
}

} // namespace spisim::analytic
