#include "spisim/integrator.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace spisim::me {
namespace {

using Eigen::MatrixXcd;

// Dormand-Prince 5(4) tableau.
constexpr double kC[7] = {0.0, 1.0 / 5, 3.0 / 10, 4.0 / 5, 8.0 / 9, 1.0, 1.0};
constexpr double kA[7][6] = {
    {},
    {1.0 / 5},
    {3.0 / 40, 9.0 / 40},
    {44.0 / 45, -56.0 / 15, 32.0 / 9},
    {19372.0 / 6561, -25360.0 / 2187, 64448.0 / 6561, -212.0 / 729},
    {9017.0 / 3168, -355.0 / 33, 46732.0 / 5247, 49.0 / 176, -5103.0 / 18656},
    {35.0 / 384, 0.0, 500.0 / 1113, 125.0 / 192, -2187.0 / 6784, 11.0 / 84},
};
// Difference between the 5th- and the embedded 4th-order weights.
constexpr double kE[7] = {35.0 / 384 - 5179.0 / 57600,
                          0.0,
                          500.0 / 1113 - 7571.0 / 16695,
                          125.0 / 192 - 393.0 / 640,
                          -2187.0 / 6784 + 92097.0 / 339200,
                          11.0 / 84 - 187.0 / 2100,
                          -1.0 / 40};

class Engine {
  public:
    Engine(const slh::Generator& gen, const IntegratorOptions& opts)
        : gen_(gen), opts_(opts), top_(ops::top_fock_projector(gen.layout)) {
        if (gen_.profile.constant) {
            const double g = gen_.profile.g0;
            heff_c_ = gen_.heff.at(g);
            for (std::size_t j = 0; j < gen_.jumps.size(); ++j)
                if (gen_.applied[j]) jumps_c_.push_back(gen_.jumps[j].at(g));
        }
    }

    void rhs(double t, const MatrixXcd& rho, MatrixXcd& out) const {
        if (gen_.profile.constant) {
            apply(heff_c_, jumps_c_, rho, out);
            return;
        }
        const double g = gen_.profile.value(t);
        const SpMat heff = gen_.heff.at(g);
        std::vector<SpMat> jumps;
        jumps.reserve(gen_.jumps.size());
        for (std::size_t j = 0; j < gen_.jumps.size(); ++j)
            if (gen_.applied[j]) jumps.push_back(gen_.jumps[j].at(g));
        apply(heff, jumps, rho, out);
    }

    double rate_scale() const {
        const SpMat h = gen_.profile.constant ? heff_c_ : gen_.heff.at(gen_.profile.value(0.0));
        double m = 0.0;
        for (int k = 0; k < h.outerSize(); ++k)
            for (SpMat::InnerIterator it(h, k); it; ++it) m = std::max(m, std::abs(it.value()));
        return std::max(m, 1e-12);
    }

    double truncation(const MatrixXcd& rho) const {
        return expectation(top_, rho).real();
    }

  private:
    static void apply(const SpMat& heff, const std::vector<SpMat>& jumps, const MatrixXcd& rho,
                      MatrixXcd& out) {
        // -i (Heff rho - rho Heff^dag) already carries the anticommutator.
        out.noalias() = cplx(0.0, -1.0) * (heff * rho);
        out.noalias() += cplx(0.0, 1.0) * (rho * heff.adjoint());
        for (const SpMat& l : jumps) {
            const MatrixXcd lr = l * rho;
            out.noalias() += lr * l.adjoint();
        }
    }

    const slh::Generator& gen_;
    IntegratorOptions opts_;
    SpMat top_;
    SpMat heff_c_;
    std::vector<SpMat> jumps_c_;
};

double error_norm(const MatrixXcd& err, const MatrixXcd& y0, const MatrixXcd& y1, double atol,
                  double rtol) {
    double acc = 0.0;
    const auto n = err.size();
    for (Eigen::Index i = 0; i < n; ++i) {
        const double sc =
            atol + rtol * std::max(std::abs(y0.data()[i]), std::abs(y1.data()[i]));
        const double q = std::abs(err.data()[i]) / sc;
        acc += q * q;
    }
    return std::sqrt(acc / static_cast<double>(n));
}

} // namespace

cplx expectation(const SpMat& op, const Eigen::MatrixXcd& rho) {
    cplx acc = 0.0;
    for (int k = 0; k < op.outerSize(); ++k)
        for (SpMat::InnerIterator it(op, k); it; ++it)
            acc += it.value() * rho(it.col(), it.row()); // Tr[O rho]
    return acc;
}

EvolveResult evolve(const slh::Generator& gen, Eigen::MatrixXcd rho0,
                    std::span<const double> sample_times, std::span<const SpMat> observables,
                    const IntegratorOptions& opts, const SampleCallback& extra) {
    if (sample_times.empty())
        throw std::invalid_argument("evolve: need at least one sample time");
    for (std::size_t i = 0; i < sample_times.size(); ++i) {
        if (sample_times[i] < 0.0 || (i > 0 && sample_times[i] <= sample_times[i - 1]))
            throw std::invalid_argument("evolve: sample times must be ascending and >= 0");
    }
    if (rho0.rows() != gen.dim() || rho0.cols() != gen.dim())
        throw std::invalid_argument("evolve: state dimension does not match the generator");

    const Engine engine(gen, opts);
    EvolveResult res;
    res.samples.reserve(sample_times.size());

    MatrixXcd rho = std::move(rho0);
    MatrixXcd k[7];
    MatrixXcd ytmp(rho.rows(), rho.cols());
    MatrixXcd ynew(rho.rows(), rho.cols());
    MatrixXcd errm(rho.rows(), rho.cols());

    double t = 0.0;
    double h = opts.h_init > 0.0 ? opts.h_init : 0.05 / engine.rate_scale();

    auto record = [&](double time) {
        Sample s;
        s.t = time;
        s.trace = rho.trace().real();
        s.truncation = engine.truncation(rho);
        s.values.reserve(observables.size());
        for (const SpMat& op : observables) s.values.push_back(expectation(op, rho));
        res.max_truncation = std::max(res.max_truncation, s.truncation);
        res.samples.push_back(std::move(s));
        if (extra) extra(time, rho);
    };

    std::size_t next = 0;
    if (sample_times[0] == 0.0) {
        record(0.0);
        ++next;
    }

    bool fresh_k1 = true;
    while (next < sample_times.size()) {
        const double target = sample_times[next];
        if (target - t < 1e-14 * std::max(1.0, target)) {
            record(target);
            t = target;
            ++next;
            continue;
        }
        double step = std::min(h, target - t);
        bool hit = step >= target - t - 1e-14 * std::max(1.0, target);
        if (hit) step = target - t;

        if (fresh_k1) {
            k[0].resizeLike(rho);
            engine.rhs(t, rho, k[0]);
            fresh_k1 = false;
        }
        for (int s = 1; s < 7; ++s) {
            ytmp = rho;
            for (int j = 0; j < s; ++j)
                if (kA[s][j] != 0.0) ytmp.noalias() += (step * kA[s][j]) * k[j];
            k[s].resizeLike(rho);
            engine.rhs(t + kC[s] * step, ytmp, k[s]);
        }
        // Stage 7 is evaluated at the 5th-order solution (FSAL).
        ynew = ytmp;
        errm.setZero();
        for (int s = 0; s < 7; ++s)
            if (kE[s] != 0.0) errm.noalias() += (step * kE[s]) * k[s];

        const double err = error_norm(errm, rho, ynew, opts.atol, opts.rtol);
        ++res.steps;
        if (err <= 1.0) {
            t += step;
            rho = ynew;
            const double drift = (rho - rho.adjoint().eval()).norm() /
                                 std::max(rho.norm(), 1e-300);
            res.max_hermiticity_drift = std::max(res.max_hermiticity_drift, drift);
            rho = 0.5 * (rho + rho.adjoint().eval());

            const double top = engine.truncation(rho);
            res.max_truncation = std::max(res.max_truncation, top);
            if (top > opts.truncation_tol)
                throw SimulationError(
                    "evolve: top Fock level population " + std::to_string(top) +
                    " exceeds the truncation tolerance; raise the Fock cutoff");

            k[0] = k[6]; // first-same-as-last
            if (hit) {
                record(t);
                ++next;
                fresh_k1 = true; // profile kinks can sit on sample times
            }
        } else {
            ++res.rejected;
        }
        const double fact = err > 0.0 ? 0.9 * std::pow(err, -0.2) : 5.0;
        const double cand = step * std::clamp(fact, 0.2, 5.0);
        // A step clipped to land on a sample time must not drag h down.
        h = (err <= 1.0 && hit) ? std::max(h, cand) : cand;
        if (h < 1e-13 * std::max(1.0, std::abs(t)))
            throw SimulationError("evolve: step size underflow at t = " + std::to_string(t));
    }

    res.rho = std::move(rho);
    return res;
}

ConvergenceResult evolve_until_converged(const slh::Generator& gen, Eigen::MatrixXcd rho0,
                                         std::span<const SpMat> observables, double threshold,
                                         double t_floor, double t_cap,
                                         const IntegratorOptions& opts) {
    if (t_floor <= 0.0 || t_cap < t_floor)
        throw std::invalid_argument("evolve_until_converged: need 0 < t_floor <= t_cap");

    const SpMat excited = ops::excited_projector(gen.layout);
    const SpMat occupation = SpMat(ops::number_r(gen.layout) + ops::number_l(gen.layout));

    std::vector<SpMat> obs(observables.begin(), observables.end());
    obs.push_back(excited);
    obs.push_back(occupation);

    ConvergenceResult out;
    Eigen::MatrixXcd rho = std::move(rho0);
    double t = 0.0;
    const double chunk = t_floor / 3.0;
    IntegratorOptions o = opts;

    while (t < t_cap) {
        const double t_next = std::min(t + chunk, t_cap);
        std::vector<double> times{t_next - t};
        EvolveResult r = evolve(gen, std::move(rho), times, obs, o);
        rho = std::move(r.rho);

        // Splice the chunk sample into the global record with absolute time.
        Sample s = std::move(r.samples.back());
        s.t = t_next;
        const double exc = s.values[s.values.size() - 2].real();
        const double occ = s.values[s.values.size() - 1].real();
        s.values.resize(s.values.size() - 2);
        out.run.samples.push_back(std::move(s));
        out.run.max_truncation = std::max(out.run.max_truncation, r.max_truncation);
        out.run.max_hermiticity_drift =
            std::max(out.run.max_hermiticity_drift, r.max_hermiticity_drift);
        out.run.steps += r.steps;
        out.run.rejected += r.rejected;

        t = t_next;
        const bool drive_on = gen.profile.value(t) > 0.0 || gen.profile.constant;
        const double monitored = exc + (drive_on ? occ : 0.0);
        if (t >= t_floor && monitored < threshold) {
            out.converged = true;
            break;
        }
    }
    out.t_final = t;
    out.run.rho = std::move(rho);
    return out;
}

} // namespace spisim::me
