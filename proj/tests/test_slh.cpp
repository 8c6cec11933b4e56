#include <doctest.h>

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <vector>

#include "spisim/analytic.hpp"
#include "spisim/integrator.hpp"
#include "spisim/pointer_metrics.hpp"
#include "spisim/slh.hpp"
#include "support/oracles.hpp"

using namespace spisim;
using ops::ShapedOp;
using ops::SpMat;

namespace {

double mat_diff(const SpMat& a, const SpMat& b) {
    return (Eigen::MatrixXcd(a) - Eigen::MatrixXcd(b)).norm();
}

int role_index(const slh::Generator& gen, slh::ChannelRole role) {
    for (std::size_t j = 0; j < gen.roles.size(); ++j)
        if (gen.roles[j] == role) return int(j);
    return -1;
}

slh::CascadeConfig quantum_cascade(double n_bar, double bw, double eta = 1.0,
                                   double gstar = 0.0) {
    slh::CascadeConfig cc;
    cc.emitter.gamma_dephasing = gstar;
    cc.source.kind = slh::SourceSpec::Kind::Superposition;
    cc.source.pol = slh::SourceSpec::Pol::H;
    cc.source.n_bar = n_bar;
    cc.source.envelope = PhotonEnvelope::exponential(bw);
    cc.eta = eta;
    return cc;
}

Eigen::Vector4cd spin_up() {
    Eigen::Vector4cd v = Eigen::Vector4cd::Zero();
    v(ops::kUp) = 1.0;
    return v;
}

Eigen::Vector4cd spin_plus() {
    Eigen::Vector4cd v = Eigen::Vector4cd::Zero();
    v(ops::kUp) = v(ops::kDown) = 1.0 / std::sqrt(2.0);
    return v;
}

PhotonEnvelope gaussian_envelope() {
    std::vector<double> t;
    std::vector<cplx> xi;
    for (double x = 0.0; x <= 12.0 + 1e-12; x += 0.002) {
        t.push_back(x);
        const double u = (x - 5.0) / 1.0;
        xi.push_back(std::exp(-0.5 * u * u));
    }
    return PhotonEnvelope::custom(t, PhotonEnvelope::normalized_samples(t, xi));
}

} // namespace

TEST_CASE("cascade collapse operators carry the documented structure") {
    auto cc = quantum_cascade(0.5, 0.5, 0.8, 0.3);
    cc.source.kind = slh::SourceSpec::Kind::Coherent;
    const auto gen = slh::build_cascade(cc);
    const auto& h = gen.layout;
    const double g = gen.profile.value(1.0);
    CHECK(g == doctest::Approx(std::sqrt(0.5)).epsilon(1e-14));

    const SpMat ar = ops::destroy_r(h), al = ops::destroy_l(h);
    const SpMat sr = ops::sigma_r(h), sl = ops::sigma_l(h);
    const double rt_eta = std::sqrt(0.8), rt_loss = std::sqrt(0.2);

    const int tr = role_index(gen, slh::ChannelRole::TransmitR);
    const int tl = role_index(gen, slh::ChannelRole::TransmitL);
    const int lr = role_index(gen, slh::ChannelRole::LossR);
    const int ll = role_index(gen, slh::ChannelRole::LossL);
    const int dr = role_index(gen, slh::ChannelRole::DephasingR);
    const int dl = role_index(gen, slh::ChannelRole::DephasingL);
    REQUIRE(tr >= 0);
    REQUIRE(tl >= 0);
    REQUIRE(lr >= 0);
    REQUIRE(ll >= 0);
    REQUIRE(dr >= 0);
    REQUIRE(dl >= 0);

    CHECK(mat_diff(gen.jumps[tr].at(g), SpMat(sr + cplx(rt_eta * g) * ar)) < 1e-14);
    CHECK(mat_diff(gen.jumps[tl].at(g), SpMat(sl + cplx(rt_eta * g) * al)) < 1e-14);
    CHECK(mat_diff(gen.jumps[lr].at(g), SpMat(cplx(rt_loss * g) * ar)) < 1e-14);
    CHECK(mat_diff(gen.jumps[ll].at(g), SpMat(cplx(rt_loss * g) * al)) < 1e-14);
    CHECK(gen.jumps[dr].is_constant());
    CHECK(mat_diff(gen.jumps[dr].at(g), SpMat(cplx(std::sqrt(0.3)) * ops::trion_r_projector(h))) <
          1e-14);
    CHECK(mat_diff(gen.jumps[dl].at(g), SpMat(cplx(std::sqrt(0.3)) * ops::trion_l_projector(h))) <
          1e-14);

    // every channel of the plain cascade refeeds
    CHECK(gen.trace_preserving());
    for (char a : gen.applied) CHECK(a != 0);

    // H - (i/2) sum L^dag L, with the series-product exchange term
    Eigen::MatrixXcd manual = Eigen::MatrixXcd::Zero(h.dim(), h.dim());
    const cplx ihalf(0.0, -0.5);
    const Eigen::MatrixXcd srd = Eigen::MatrixXcd(sr), ard = Eigen::MatrixXcd(ar);
    const Eigen::MatrixXcd sld = Eigen::MatrixXcd(sl), ald = Eigen::MatrixXcd(al);
    manual += ihalf * (rt_eta * g) *
              (srd.adjoint() * ard - srd * ard.adjoint() + sld.adjoint() * ald -
               sld * ald.adjoint());
    for (std::size_t j = 0; j < gen.jumps.size(); ++j) {
        const Eigen::MatrixXcd l = Eigen::MatrixXcd(gen.jumps[j].at(g));
        manual += ihalf * (l.adjoint() * l);
    }
    CHECK((Eigen::MatrixXcd(gen.heff.at(g)) - manual).norm() < 1e-12);

    // a fully transmitting line has no loss channels
    auto ideal = quantum_cascade(0.5, 0.5, 1.0, 0.0);
    const auto gen2 = slh::build_cascade(ideal);
    CHECK(role_index(gen2, slh::ChannelRole::LossR) < 0);
    CHECK(role_index(gen2, slh::ChannelRole::DephasingR) < 0);
}

TEST_CASE("series product is associative") {
    ops::HilbertLayout h{3, 1};
    const ShapedOp a_op = ShapedOp::linear(ops::destroy_r(h));
    const ShapedOp s_op = ShapedOp::constant(ops::sigma_r(h));
    const ShapedOp n_op = ShapedOp::constant(SpMat(cplx(0.3) * ops::number_r(h)));

    slh::Component a{{a_op}, n_op};
    slh::Component b{{s_op}, ShapedOp::zero(h.dim())};
    slh::Component c{{a_op + s_op}, ShapedOp::constant(ops::trion_r_projector(h))};

    const auto left = slh::series_product(c, slh::series_product(b, a));
    const auto right = slh::series_product(slh::series_product(c, b), a);
    REQUIRE(left.L.size() == right.L.size());
    for (double g : {0.0, 0.7}) {
        CHECK(mat_diff(left.H.at(g), right.H.at(g)) < 1e-14);
        for (std::size_t j = 0; j < left.L.size(); ++j)
            CHECK(mat_diff(left.L[j].at(g), right.L[j].at(g)) < 1e-14);
    }

    CHECK_THROWS_AS((void)slh::series_product(slh::Component{{a_op, s_op}, n_op}, a),
                    std::invalid_argument);
}

TEST_CASE("vacuum input leaves the excited emitter decaying at gamma") {
    auto cc = quantum_cascade(0.0, 0.7, 0.9, 0.4);
    const auto gen = slh::build_cascade(cc);
    Eigen::Vector4cd amps = Eigen::Vector4cd::Zero();
    amps(ops::kTrionUp) = 1.0;
    const auto rho0 = slh::initial_density(gen.layout, amps, cc.source);

    const std::vector<double> times{0.5, 1.0, 2.0, 4.0};
    const SpMat exc = ops::excited_projector(gen.layout);
    std::vector<double> pops;
    me::evolve(gen, rho0, times, {}, {}, [&](double, const Eigen::MatrixXcd& rho) {
        pops.push_back(me::expectation(exc, rho).real());
    });
    REQUIRE(pops.size() == times.size());
    for (std::size_t i = 0; i < times.size(); ++i)
        CHECK(pops[i] == doctest::Approx(std::exp(-times[i])).epsilon(1e-6));
}

TEST_CASE("drive profiles reproduce pulse shapes") {
    const auto flat = slh::shaped_bandwidth(PhotonEnvelope::exponential(0.5), 1e3);
    CHECK(flat.constant);
    CHECK_FALSE(flat.clipped);
    CHECK(flat.value(3.0) == doctest::Approx(std::sqrt(0.5)).epsilon(1e-14));
    CHECK(flat.end_of_support() == std::numeric_limits<double>::infinity());

    // sampled pulse: g(t)^2 times the remaining norm reproduces |xi|^2
    const auto env = gaussian_envelope();
    const auto prof = slh::shaped_bandwidth(env, 1e3);
    for (double t : {3.0, 5.0, 7.0}) {
        const double used = oracle::simpson(
            [&](double s) { return std::norm(env.value(s)); }, 0.0, t, 6000);
        const double g = prof.value(t);
        CHECK(g * g * (1.0 - used) == doctest::Approx(std::norm(env.value(t))).epsilon(1e-4));
    }

    // truncated exponential: the tail man-handles the rate into the ceiling
    {
        std::vector<double> t;
        std::vector<cplx> xi;
        const double bw = 0.5, t_cut = 8.0 / bw;
        for (double x = 0.0; x <= t_cut + 1e-12; x += 0.002) {
            t.push_back(x);
            xi.push_back(std::exp(-0.5 * bw * x));
        }
        const auto tr_env = PhotonEnvelope::custom(t, PhotonEnvelope::normalized_samples(t, xi));
        const auto p = slh::shaped_bandwidth(tr_env, 1e3);
        CHECK(p.clipped);
        CHECK(p.value(0.5) * p.value(0.5) == doctest::Approx(bw).epsilon(1e-2));
        CHECK(p.end_of_support() == doctest::Approx(t_cut).epsilon(1e-3));
    }

    CHECK_THROWS_AS((void)slh::shaped_bandwidth(env, -1.0), std::invalid_argument);
    CHECK_THROWS_AS((void)slh::shaped_bandwidth(PhotonEnvelope::exponential(5.0), 1.0),
                    SimulationError);
}

TEST_CASE("adaptive propagation matches dense fixed-step integration") {
    auto cc = quantum_cascade(1.0, 0.5, 0.9, 0.2);
    const auto gen = slh::build_cascade(cc);
    const auto rho0 = slh::initial_density(gen.layout, spin_plus(), cc.source);

    Eigen::MatrixXcd rho_end;
    const std::vector<double> times{6.0};
    me::evolve(gen, rho0, times, {}, {},
               [&](double, const Eigen::MatrixXcd& rho) { rho_end = rho; });
    const auto rho_oracle = oracle::rk4_evolve(gen, rho0, 6.0, 6000);
    CHECK((rho_end - rho_oracle).norm() < 1e-6);

    // conditioned interferometer: same engine, decaying trace
    slh::MichelsonConfig mc;
    mc.emitter = cc.emitter;
    mc.source = cc.source;
    mc.eta = 0.7;
    mc.condition_no_click = true;
    const auto cond = slh::build_michelson(mc);
    CHECK_FALSE(cond.trace_preserving());
    const auto rho0m = slh::initial_density(cond.layout, spin_up(), mc.source);
    Eigen::MatrixXcd rho_c;
    me::evolve(cond, rho0m, times, {}, {},
               [&](double, const Eigen::MatrixXcd& rho) { rho_c = rho; });
    const auto rho_c_oracle = oracle::rk4_evolve(cond, rho0m, 6.0, 6000);
    CHECK((rho_c - rho_c_oracle).norm() < 1e-6);
    CHECK(rho_c.trace().real() < 1.0 - 1e-3);
}

TEST_CASE("cascade conserves trace, hermiticity and positivity") {
    auto cc = quantum_cascade(1.0, 0.3, 0.7, 0.1);
    const auto gen = slh::build_cascade(cc);
    const auto rho0 = slh::initial_density(gen.layout, spin_plus(), cc.source);

    std::vector<double> times;
    for (int i = 1; i <= 8; ++i) times.push_back(25.0 * i / 8.0);
    double min_eig = 1.0;
    const auto res = me::evolve(gen, rho0, times, {}, {},
                                [&](double, const Eigen::MatrixXcd& rho) {
                                    const Eigen::MatrixXcd h = 0.5 * (rho + rho.adjoint());
                                    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(h);
                                    min_eig = std::min(min_eig, es.eigenvalues().minCoeff());
                                });
    for (const auto& s : res.samples) CHECK(std::abs(s.trace - 1.0) < 1e-8);
    CHECK(min_eig > -1e-8);
    CHECK(res.max_hermiticity_drift < 1e-9);
    CHECK(res.max_truncation < 1e-7);
}

TEST_CASE("single-photon excitation follows the filtered envelope") {
    const double bw = 0.3;
    auto cc = quantum_cascade(1.0, bw);
    cc.source.pol = slh::SourceSpec::Pol::R;
    analytic::SinglePhotonScatter sc(cc.source.envelope, 1.0, 40.0);

    for (double eta : {1.0, 0.64}) {
        cc.eta = eta;
        const auto gen = slh::build_cascade(cc);
        const auto rho0 = slh::initial_density(gen.layout, spin_up(), cc.source);
        const SpMat exc = ops::excited_projector(gen.layout);
        std::vector<double> got;
        const std::vector<double> times{2.5, 5.0};
        me::evolve(gen, rho0, times, {}, {}, [&](double, const Eigen::MatrixXcd& rho) {
            got.push_back(me::expectation(exc, rho).real());
        });
        for (std::size_t i = 0; i < times.size(); ++i) {
            const double expect = eta * std::norm(sc.xi_tilde(times[i]));
            CHECK(got[i] == doctest::Approx(expect).epsilon(1e-6));
        }
    }
}

TEST_CASE("engine reproduces the closed-form pointer overlap on a grid") {
    for (double bw : {0.2, 0.5, 1.0, 2.0, 5.0}) {
        for (double n : {0.1, 0.3, 0.5, 0.75, 1.0}) {
            const auto r = metrics::qbhat_numeric(quantum_cascade(n, bw));
            const double expect = std::abs(1.0 - 2.0 * n / (1.0 + bw));
            CHECK_MESSAGE(std::abs(r.value - expect) < 2e-2,
                          "bw=", bw, " n=", n, " engine=", r.value, " closed=", expect);
            CHECK(r.converged);
        }
    }
}

TEST_CASE("a dead line scatters nothing") {
    auto cc = quantum_cascade(1.0, 0.5, 0.0);
    const auto r = metrics::qbhat_numeric(cc);
    CHECK(r.value == doctest::Approx(1.0).epsilon(1e-8));
}

TEST_CASE("line efficiency interpolates the pointer overlap") {
    std::vector<double> values;
    for (double eta : {0.2, 0.4, 0.6, 0.8, 1.0})
        values.push_back(metrics::qbhat_numeric(quantum_cascade(0.5, 0.5, eta)).value);
    for (std::size_t i = 1; i < values.size(); ++i)
        CHECK(values[i] <= values[i - 1] + 1e-9);
    // eta enters the overlap exactly like a reduced photon number
    CHECK(values[2] == doctest::Approx(1.0 - 2.0 * 0.5 * 0.6 / 1.5).epsilon(2e-2));
    CHECK(values.back() == doctest::Approx(1.0 / 3.0).epsilon(2e-2));
}

TEST_CASE("fock cutoff is converged for coherent probes") {
    CHECK(slh::coherent_fock_levels(0.25) >= 2);
    CHECK(slh::coherent_fock_levels(0.25) <= slh::coherent_fock_levels(1.0));
    CHECK(slh::coherent_fock_levels(1.0) <= slh::coherent_fock_levels(4.0));

    slh::CascadeConfig cc;
    cc.source.kind = slh::SourceSpec::Kind::Coherent;
    cc.source.pol = slh::SourceSpec::Pol::R;
    cc.source.n_bar = 1.0;
    cc.source.envelope = PhotonEnvelope::exponential(0.5);
    const auto base = metrics::qbhat_numeric(cc);
    const auto auto_layout = slh::choose_layout(cc.source, {});
    cc.cutoff.n_r = auto_layout.n_r + 2;
    cc.cutoff.n_l = auto_layout.n_l;
    const auto refined = metrics::qbhat_numeric(cc);
    CHECK(std::abs(base.value - refined.value) < 1e-3);
}

TEST_CASE("gaussian coherent drive matches the driven-atom oracle") {
    const auto env = gaussian_envelope();
    slh::CascadeConfig cc;
    cc.source.kind = slh::SourceSpec::Kind::Coherent;
    cc.source.pol = slh::SourceSpec::Pol::R;
    cc.source.n_bar = 1.0;
    cc.source.envelope = env;

    const auto omega = [&](double t) { return 2.0 * std::abs(env.value(t)); };

    // pointer overlap: spin-down leaves the pulse untouched, so the overlap
    // is the no-jump ground amplitude of the driven spin-up branch
    metrics::NumericOptions nopts;
    nopts.t_floor = 25.0;
    nopts.t_cap = 80.0;
    const auto num = metrics::qbhat_numeric(cc, nopts);
    const auto nj = oracle::nojump_rk4_shaped(omega, 1.0, 12.0, 24000);
    CHECK(std::abs(num.value - std::abs(nj.g)) < 5e-4);

    // dipole along the pulse
    const auto gen = slh::build_cascade(cc);
    const auto rho0 = slh::initial_density(gen.layout, spin_up(), cc.source);
    const SpMat sr = ops::sigma_r(gen.layout);
    const std::vector<double> times{4.0, 5.0, 5.5, 6.5};
    std::vector<cplx> got;
    me::evolve(gen, rho0, times, {}, {},
               [&](double, const Eigen::MatrixXcd& rho) { got.push_back(me::expectation(sr, rho)); });
    for (std::size_t i = 0; i < times.size(); ++i) {
        const auto r = oracle::driven_rho_rk4(omega, 1.0, times[i], 24000);
        CHECK(std::abs(std::abs(got[i]) - std::abs(r(1, 0))) < 1e-6);
    }
}

TEST_CASE("initial states validate their inputs") {
    auto cc = quantum_cascade(0.5, 1.0);
    const auto gen = slh::build_cascade(cc);
    Eigen::Vector4cd bad = Eigen::Vector4cd::Zero();
    bad(ops::kUp) = 0.5; // not normalized
    CHECK_THROWS_AS((void)slh::initial_state(gen.layout, bad, cc.source),
                    std::invalid_argument);

    CHECK_THROWS_AS((void)slh::build_cascade(quantum_cascade(0.5, 1.0, 1.5)),
                    std::invalid_argument);
    auto over = cc.source;
    over.n_bar = 1.5; // one photon is all a superposition holds
    CHECK_THROWS_AS((void)slh::source_pulse_state(over, gen.layout),
                    std::invalid_argument);

    // coherent sources reject cutoffs that drop visible weight
    slh::CascadeConfig big;
    big.source.kind = slh::SourceSpec::Kind::Coherent;
    big.source.pol = slh::SourceSpec::Pol::R;
    big.source.n_bar = 9.0;
    big.cutoff.n_r = 3;
    big.cutoff.n_l = 1;
    const auto layout = slh::choose_layout(big.source, big.cutoff);
    CHECK_THROWS_AS((void)slh::source_pulse_state(big.source, layout), SimulationError);
}
