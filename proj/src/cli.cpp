#include "spisim/cli.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"

#include "spisim/analytic.hpp"
#include "spisim/config.hpp"
#include "spisim/operators.hpp"
#include "spisim/parallel.hpp"
#include "spisim/pointer_metrics.hpp"
#include "spisim/polarization.hpp"
#include "spisim/quadrature.hpp"
#include "spisim/readout.hpp"
#include "spisim/sweep.hpp"

namespace spisim::cli {
namespace {

struct Check {
    std::string name;
    bool pass = false;
    std::string detail;
};

Check checked(std::string name, const std::function<Check()>& body) {
    try {
        Check c = body();
        c.name = std::move(name);
        return c;
    } catch (const std::exception& e) {
        return {std::move(name), false, std::string("threw: ") + e.what()};
    }
}

std::string num(double v) { return sweep::format_number(v); }

// Small cross-module sanity suite: one cheap, known-answer check per module.
// Intended as a post-install smoke test, not a replacement for the unit
// tests.
int run_validate() {
    std::vector<Check> checks;

    checks.push_back(checked("quadrature: adaptive pair on int_0^pi sin", [] {
        const auto r = quad::integrate([](double t) { return std::sin(t); }, 0.0, PI);
        const double err = std::abs(r.value - 2.0);
        return Check{"", err < 1e-9, "residual " + num(err)};
    }));

    checks.push_back(checked("envelope: custom waveform unit norm", [] {
        std::vector<double> t(257);
        std::vector<cplx> xi(t.size());
        for (std::size_t i = 0; i < t.size(); ++i) {
            t[i] = 0.05 * static_cast<double>(i);
            const double x = t[i] - 5.0;
            xi[i] = std::exp(-0.5 * x * x);
        }
        const auto env = PhotonEnvelope::custom(t, PhotonEnvelope::normalized_samples(t, xi));
        const double err = std::abs(env.norm() - 1.0);
        return Check{"", err < 1e-9, "norm deficit " + num(err)};
    }));

    checks.push_back(checked("analytic: emission record completeness", [] {
        analytic::SquareDriveParams d;
        d.beta = 0.6;
        d.gamma = 1.0;
        d.tau = 4.0;
        const auto probs = analytic::scatter_probabilities(d, d.tau);
        const bool ok = probs.total() <= 1.0 + 1e-6 && probs.tail_bound < 2e-3;
        return Check{"", ok,
                     "sum p_n = " + num(probs.total()) + ", tail <= " + num(probs.tail_bound)};
    }));

    checks.push_back(checked("slh: cascaded generator preserves trace", [] {
        slh::CascadeConfig cc;
        cc.source.kind = slh::SourceSpec::Kind::Coherent;
        cc.source.n_bar = 0.5;
        cc.source.envelope = PhotonEnvelope::exponential(0.2);
        cc.eta = 0.8;
        const auto gen = slh::build_cascade(cc);
        return Check{"", gen.trace_preserving(), gen.trace_preserving() ? "ok" : "broken"};
    }));

    checks.push_back(checked("pointer-metrics: numeric matches closed form", [] {
        slh::CascadeConfig cc;
        cc.source.n_bar = 0.5;
        cc.source.envelope = PhotonEnvelope::exponential(1.0);
        const double closed = metrics::qbhat_quantum_exp(0.5, 1.0, 1.0).value;
        const double numeric = metrics::qbhat_numeric(cc).value;
        const double err = std::abs(closed - numeric);
        return Check{"", err < 1e-6, "|closed - numeric| = " + num(err)};
    }));

    checks.push_back(checked("polarization: angles consistent with Stokes", [] {
        pol::TrajectoryConfig tc;
        tc.cascade.source.envelope = PhotonEnvelope::exponential(0.5);
        tc.samples = 60;
        tc.t_end = 12.0;
        const auto traj = pol::stokes_trajectory(tc);
        double worst = 0.0;
        int defined = 0;
        for (const auto& s : traj.samples) {
            if (!s.defined) continue;
            ++defined;
            const auto [th, ph] = pol::polar_angles(s);
            const double dphi =
                std::remainder(ph - s.phi, 2.0 * PI); // stored phi is unwrapped
            worst = std::max({worst, std::abs(th - s.theta), std::abs(dphi)});
        }
        return Check{"", defined > 0 && worst < 1e-9,
                     "max angle residual " + num(worst) + " over " +
                         std::to_string(defined) + " samples"};
    }));

    checks.push_back(checked("readout: dark port stays dark for spin down", [] {
        slh::MichelsonConfig mc;
        mc.source.pol = slh::SourceSpec::Pol::R;
        mc.source.envelope = PhotonEnvelope::exponential(1.0);
        const auto stats = readout::click_probabilities(mc);
        return Check{"", stats.p_down < 1e-9, "p_click(down) = " + num(stats.p_down)};
    }));

    int passed = 0;
    for (const auto& c : checks) {
        if (c.pass) ++passed;
        std::printf("%-4s %-48s %s\n", c.pass ? "PASS" : "FAIL", c.name.c_str(),
                    c.detail.c_str());
    }
    std::printf("validate: %d/%zu checks passed\n", passed, checks.size());
    return passed == static_cast<int>(checks.size()) ? 0 : 1;
}

int run_impl(int argc, const char* const* argv) {
    CLI::App app{"waveguide spin-photon interface simulator"};
    app.name("spisim");

    std::string experiment;
    std::string config_path;
    std::string out_dir;
    long long workers = -1;
    long long seed = -1;

    app.add_option("experiment", experiment,
                   "qbhat | sweep | readout | advantage-map | polarization | validate")
        ->required();
    app.add_option("--config", config_path, "run configuration file");
    app.add_option("--out", out_dir, "output directory (overrides the config)");
    app.add_option("--workers", workers,
                   "worker threads; overrides the config and SPISIM_WORKERS, 0 = auto")
        ->check(CLI::NonNegativeNumber);
    app.add_option("--seed", seed, "seed echoed into the run metadata")
        ->check(CLI::NonNegativeNumber);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e); // prints help or the error itself
        return code == 0 ? 0 : 1;
    }

    try {
        const cfg::Experiment exp = cfg::experiment_from(experiment);

        cfg::RunConfig rc;
        if (!config_path.empty()) {
            std::ifstream f(config_path, std::ios::binary);
            if (!f) {
                std::cerr << "spisim: cannot read config '" << config_path << "'\n";
                return 1;
            }
            std::ostringstream text;
            text << f.rdbuf();
            rc = cfg::parse_config(text.str());
        } else if (exp != cfg::Experiment::Validate) {
            std::cerr << "spisim: --config is required for the " << cfg::to_string(exp)
                      << " experiment\n";
            return 1;
        }

        if (exp == cfg::Experiment::Validate) return run_validate();

        rc.experiment = exp; // the positional argument wins over [run] experiment
        if (!out_dir.empty()) rc.out_dir = out_dir;
        if (workers >= 0) rc.workers = static_cast<unsigned>(workers);
        if (seed >= 0) rc.seed = static_cast<std::uint64_t>(seed);
        if (rc.workers == 0) rc.workers = default_worker_count();

        std::cout << cfg::describe(rc) << "\n";
        const int code = sweep::run_experiment(rc);
        std::cout << "artifacts written to " << rc.out_dir
                  << (code == sweep::kExitOk ? "" : " (partial: see the meta flags)") << "\n";
        return code;
    } catch (const std::exception& e) {
        std::cerr << "spisim: " << e.what() << "\n";
        return 1;
    }
}

} // namespace

int run(int argc, const char* const* argv) { return run_impl(argc, argv); }

int run(const std::vector<std::string>& args) {
    std::vector<const char*> argv;
    argv.reserve(args.size());
    for (const auto& a : args) argv.push_back(a.c_str());
    return run_impl(static_cast<int>(argv.size()), argv.data());
}

} // namespace spisim::cli
