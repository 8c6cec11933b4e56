#include "oracles.hpp"

#include <cmath>
#include <stdexcept>

namespace oracle {
namespace {

using Eigen::MatrixXcd;
using spisim::slh::Generator;

MatrixXcd lindblad_rhs(const Generator& gen, double t, const MatrixXcd& rho) {
    const double g = gen.profile.value(t);
    const MatrixXcd heff = MatrixXcd(gen.heff.at(g));
    MatrixXcd out = cplx(0.0, -1.0) * (heff * rho - rho * heff.adjoint());
    for (std::size_t j = 0; j < gen.jumps.size(); ++j) {
        if (!gen.applied[j]) continue;
        const MatrixXcd l = MatrixXcd(gen.jumps[j].at(g));
        out += l * rho * l.adjoint();
    }
    return out;
}

} // namespace

MatrixXcd rk4_evolve(const Generator& gen, MatrixXcd rho, double t_end, int steps) {
    if (steps < 1) throw std::invalid_argument("rk4_evolve: steps must be positive");
    const double h = t_end / steps;
    for (int i = 0; i < steps; ++i) {
        const double t = h * i;
        const MatrixXcd k1 = lindblad_rhs(gen, t, rho);
        const MatrixXcd k2 = lindblad_rhs(gen, t + 0.5 * h, rho + 0.5 * h * k1);
        const MatrixXcd k3 = lindblad_rhs(gen, t + 0.5 * h, rho + 0.5 * h * k2);
        const MatrixXcd k4 = lindblad_rhs(gen, t + h, rho + h * k3);
        rho += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    }
    return rho;
}

NoJump nojump_rk4(double omega, double gamma, double t, int steps) {
    double g = 1.0, e = 0.0;
    const double h = t / steps;
    const auto dg = [&](double ev) { return -0.5 * omega * ev; };
    const auto de = [&](double gv, double ev) { return 0.5 * omega * gv - 0.5 * gamma * ev; };
    for (int i = 0; i < steps; ++i) {
        const double k1g = dg(e), k1e = de(g, e);
        const double k2g = dg(e + 0.5 * h * k1e), k2e = de(g + 0.5 * h * k1g, e + 0.5 * h * k1e);
        const double k3g = dg(e + 0.5 * h * k2e), k3e = de(g + 0.5 * h * k2g, e + 0.5 * h * k2e);
        const double k4g = dg(e + h * k3e), k4e = de(g + h * k3g, e + h * k3e);
        g += (h / 6.0) * (k1g + 2.0 * k2g + 2.0 * k3g + k4g);
        e += (h / 6.0) * (k1e + 2.0 * k2e + 2.0 * k3e + k4e);
    }
    return {g, e};
}

NoJump propagate_ground(double omega, double gamma, double dt, int steps) {
    if (dt <= 0.0) return {1.0, 0.0};
    return nojump_rk4(omega, gamma, dt, steps);
}

NoJump nojump_rk4_shaped(const std::function<double(double)>& omega, double gamma,
                         double t, int steps) {
    double g = 1.0, e = 0.0;
    const double h = t / steps;
    const auto dg = [&](double tv, double ev) { return -0.5 * omega(tv) * ev; };
    const auto de = [&](double tv, double gv, double ev) {
        return 0.5 * omega(tv) * gv - 0.5 * gamma * ev;
    };
    for (int i = 0; i < steps; ++i) {
        const double t0 = h * i, tm = t0 + 0.5 * h, t1 = t0 + h;
        const double k1g = dg(t0, e), k1e = de(t0, g, e);
        const double k2g = dg(tm, e + 0.5 * h * k1e),
                     k2e = de(tm, g + 0.5 * h * k1g, e + 0.5 * h * k1e);
        const double k3g = dg(tm, e + 0.5 * h * k2e),
                     k3e = de(tm, g + 0.5 * h * k2g, e + 0.5 * h * k2e);
        const double k4g = dg(t1, e + h * k3e), k4e = de(t1, g + h * k3g, e + h * k3e);
        g += (h / 6.0) * (k1g + 2.0 * k2g + 2.0 * k3g + k4g);
        e += (h / 6.0) * (k1e + 2.0 * k2e + 2.0 * k3e + k4e);
    }
    return {g, e};
}

Eigen::Matrix2cd driven_rho_rk4(const std::function<double(double)>& omega, double gamma,
                                double t, int steps) {
    using M2 = Eigen::Matrix2cd;
    M2 rho = M2::Zero();
    rho(0, 0) = 1.0;
    const auto rhs = [&](double tv, const M2& r) {
        M2 ham = M2::Zero();
        ham(0, 1) = cplx(0.0, -0.5 * omega(tv));
        ham(1, 0) = cplx(0.0, 0.5 * omega(tv));
        M2 out = cplx(0.0, -1.0) * (ham * r - r * ham);
        // D[sqrt(gamma) sigma], sigma = |g><e|
        out(0, 0) += gamma * r(1, 1);
        out(1, 1) -= gamma * r(1, 1);
        out(0, 1) -= 0.5 * gamma * r(0, 1);
        out(1, 0) -= 0.5 * gamma * r(1, 0);
        return out;
    };
    const double h = t / steps;
    for (int i = 0; i < steps; ++i) {
        const double t0 = h * i;
        const M2 k1 = rhs(t0, rho);
        const M2 k2 = rhs(t0 + 0.5 * h, rho + 0.5 * h * k1);
        const M2 k3 = rhs(t0 + 0.5 * h, rho + 0.5 * h * k2);
        const M2 k4 = rhs(t0 + h, rho + h * k3);
        rho += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    }
    return rho;
}

CountedBranch counting_hierarchy(double omega, double gamma, double tau, int n_max,
                                 int steps) {
    using M2 = Eigen::Matrix2cd;
    M2 heff = M2::Zero();
    // basis (g, e); H = (omega/2)(sigma + sigma+), sigma = |g><e|
    heff(0, 1) = 0.5 * omega;
    heff(1, 0) = 0.5 * omega;
    heff(1, 1) = cplx(0.0, -0.5 * gamma);

    std::vector<M2> rho(n_max + 1, M2::Zero());
    rho[0](0, 0) = 1.0;

    const auto rhs = [&](const std::vector<M2>& r, std::vector<M2>& out) {
        for (int n = 0; n <= n_max; ++n) {
            out[n] = cplx(0.0, -1.0) * (heff * r[n] - r[n] * heff.adjoint());
            if (n > 0) {
                // feeding term gamma sigma rho_{n-1} sigma+: only the excited
                // population of the previous layer lands in the ground state
                out[n](0, 0) += gamma * r[n - 1](1, 1);
            }
        }
    };

    std::vector<M2> k1(n_max + 1), k2(n_max + 1), k3(n_max + 1), k4(n_max + 1),
        tmp(n_max + 1);
    const double h = tau / steps;
    for (int i = 0; i < steps; ++i) {
        rhs(rho, k1);
        for (int n = 0; n <= n_max; ++n) tmp[n] = rho[n] + 0.5 * h * k1[n];
        rhs(tmp, k2);
        for (int n = 0; n <= n_max; ++n) tmp[n] = rho[n] + 0.5 * h * k2[n];
        rhs(tmp, k3);
        for (int n = 0; n <= n_max; ++n) tmp[n] = rho[n] + h * k3[n];
        rhs(tmp, k4);
        for (int n = 0; n <= n_max; ++n)
            rho[n] += (h / 6.0) * (k1[n] + 2.0 * k2[n] + 2.0 * k3[n] + k4[n]);
    }

    CountedBranch out;
    out.ground.resize(n_max + 1);
    out.excited.resize(n_max + 1);
    for (int n = 0; n <= n_max; ++n) {
        out.ground[n] = rho[n](0, 0).real();
        out.excited[n] = rho[n](1, 1).real();
    }
    return out;
}

cplx filtered_envelope(const spisim::PhotonEnvelope& env, double gamma, double t,
                       int panels) {
    if (t <= 0.0) return cplx(0.0);
    if (panels % 2) ++panels;
    const double h = t / panels;
    cplx acc = 0.0;
    for (int i = 0; i <= panels; ++i) {
        const double s = h * i;
        const double w = (i == 0 || i == panels) ? 1.0 : (i % 2 ? 4.0 : 2.0);
        acc += w * std::exp(-0.5 * gamma * (t - s)) * env.value(s);
    }
    return acc * (h / 3.0);
}

double simpson(const std::function<double(double)>& f, double a, double b, int panels) {
    if (panels % 2) ++panels;
    const double h = (b - a) / panels;
    double acc = 0.0;
    for (int i = 0; i <= panels; ++i) {
        const double w = (i == 0 || i == panels) ? 1.0 : (i % 2 ? 4.0 : 2.0);
        acc += w * f(a + h * i);
    }
    return acc * (h / 3.0);
}

} // namespace oracle
