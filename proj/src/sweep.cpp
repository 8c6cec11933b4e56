#include "spisim/sweep.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <stdexcept>
#include <utility>
#include <vector>

#include "spisim/operators.hpp"
#include "spisim/parallel.hpp"
#include "spisim/pointer_metrics.hpp"
#include "spisim/polarization.hpp"
#include "spisim/readout.hpp"

namespace fs = std::filesystem;

namespace spisim::sweep {

std::string format_number(double v) {
    char buf[32];
    const auto [p, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    if (ec != std::errc{}) return "nan";
    return std::string(buf, p);
}

std::string csv_escape(const std::string& field) {
    if (field.find_first_of(",\"\n") == std::string::npos) return field;
    std::string out = "\"";
    for (char ch : field) {
        out += ch;
        if (ch == '"') out += '"';
    }
    out += '"';
    return out;
}

namespace {

std::ofstream open_out(const fs::path& p) {
    std::ofstream f(p, std::ios::binary | std::ios::trunc);
    if (!f) throw std::ios_base::failure("cannot open " + p.string() + " for writing");
    f.exceptions(std::ios::badbit | std::ios::failbit);
    return f;
}

// key = value sidecar; insertion order is the file order, nothing here may
// depend on timing or the worker count.
struct Meta {
    std::vector<std::pair<std::string, std::string>> kv;

    void add(std::string k, std::string v) { kv.emplace_back(std::move(k), std::move(v)); }
    void add(std::string k, double v) { add(std::move(k), format_number(v)); }
    void add(std::string k, bool v) { add(std::move(k), std::string(v ? "true" : "false")); }
    void add_axis(const std::string& k, const std::vector<double>& axis) {
        std::string joined;
        for (std::size_t i = 0; i < axis.size(); ++i) {
            if (i) joined += ',';
            joined += format_number(axis[i]);
        }
        add(k + ".points", format_number(static_cast<double>(axis.size())));
        add(k + ".values", joined);
    }
    void add_flags(const std::vector<std::string>& flags, std::size_t cols) {
        std::size_t count = 0;
        for (const auto& f : flags)
            if (!f.empty()) ++count;
        add("flags", format_number(static_cast<double>(count)));
        for (std::size_t idx = 0; idx < flags.size(); ++idx) {
            if (flags[idx].empty()) continue;
            std::string where = cols > 0 ? "[" + std::to_string(idx / cols) + "," +
                                               std::to_string(idx % cols) + "] "
                                         : "";
            add("flag." + std::to_string(idx), where + flags[idx]);
        }
    }

    void write(const fs::path& p) const {
        auto f = open_out(p);
        for (const auto& [k, v] : kv) f << k << " = " << v << "\n";
    }
};

std::string hash_hex(std::uint64_t h) {
    char buf[20];
    std::snprintf(buf, sizeof(buf), "0x%016llx", static_cast<unsigned long long>(h));
    return buf;
}

const char* kind_name(slh::SourceSpec::Kind k) {
    return k == slh::SourceSpec::Kind::Superposition ? "superposition" : "coherent";
}
const char* pol_name(slh::SourceSpec::Pol p) {
    return p == slh::SourceSpec::Pol::H ? "H" : "R";
}

Meta meta_head(const cfg::RunConfig& c) {
    Meta m;
    m.add("tool_version", std::string(kVersion));
    m.add("experiment", cfg::to_string(c.experiment));
    m.add("config_hash", hash_hex(c.config_hash));
    m.add("seed", std::to_string(c.seed));
    m.add("gamma", c.gamma);
    m.add("gamma_dephasing", c.gamma_dephasing);
    m.add("eta", c.eta);
    return m;
}

void add_layout(Meta& m, const slh::SourceSpec& src) {
    const ops::HilbertLayout h = slh::choose_layout(src, {});
    m.add("fock_levels_r", format_number(static_cast<double>(h.n_r)));
    m.add("fock_levels_l", format_number(static_cast<double>(h.n_l)));
}

void add_engine_tolerances(Meta& m) {
    const me::IntegratorOptions d{};
    m.add("integrator_rtol", d.rtol);
    m.add("integrator_atol", d.atol);
    m.add("truncation_tol", d.truncation_tol);
}

std::vector<double> axis_or(const std::vector<double>& given, const char* fallback) {
    return given.empty() ? cfg::parse_axis(fallback, 0) : given;
}

int flags_exit(const std::vector<std::string>& flags) {
    for (const auto& f : flags)
        if (!f.empty()) return kExitPartial;
    return kExitOk;
}

// ---- qbhat: one probe, one number ----------------------------------------

int run_qbhat(const cfg::RunConfig& c, const fs::path& out) {
    const slh::SourceSpec src = c.source();
    BhatResult r;
    std::string flag;
    try {
        const bool ideal = c.eta == 1.0 && c.gamma_dephasing == 0.0;
        if (c.kind == slh::SourceSpec::Kind::Superposition && ideal) {
            r = metrics::qbhat_quantum_exp(c.n_bar, c.bandwidth * c.gamma, c.gamma);
        } else {
            slh::CascadeConfig cc;
            cc.emitter = {c.gamma, c.gamma_dephasing};
            cc.source = src;
            cc.eta = c.eta;
            r = metrics::qbhat_numeric(cc);
        }
    } catch (const std::exception& e) {
        flag = e.what();
        r.value = std::nan("");
        r.converged = false;
    }

    auto f = open_out(out / "qbhat.csv");
    f << "kind,polarization,n_bar,bandwidth_over_gamma,qbhat,method,error_estimate,converged,"
         "flag\n";
    f << kind_name(c.kind) << ',' << pol_name(c.pol) << ',' << format_number(c.n_bar) << ','
      << format_number(c.bandwidth) << ',' << format_number(r.value) << ','
      << to_string(r.method) << ',' << format_number(r.error_estimate) << ','
      << (r.converged ? 1 : 0) << ',' << csv_escape(flag) << "\n";

    Meta m = meta_head(c);
    m.add("probe_kind", std::string(kind_name(c.kind)));
    m.add("probe_polarization", std::string(pol_name(c.pol)));
    m.add("n_bar", c.n_bar);
    m.add("bandwidth_over_gamma", c.bandwidth);
    add_layout(m, src);
    add_engine_tolerances(m);
    m.add("method", to_string(r.method));
    m.add("converged_all", r.converged);
    m.add_flags({flag}, 0);
    m.write(out / "qbhat.meta.txt");
    return flag.empty() ? kExitOk : kExitPartial;
}

// ---- sweep: qbhat over (n_bar, bandwidth) --------------------------------

int run_sweep(const cfg::RunConfig& c, const fs::path& out, unsigned workers) {
    const auto nb = axis_or(c.grid_n_bar, "0:1:11");
    const auto bw = axis_or(c.grid_bandwidth, "1e-2:10:15 log");
    const auto kind = c.kind == slh::SourceSpec::Kind::Superposition
                          ? metrics::ProbeKind::Quantum
                          : metrics::ProbeKind::Coherent;
    const auto grid = metrics::sweep_qbhat(nb, bw, kind, c.gamma, workers);

    auto f = open_out(out / "sweep.csv");
    f << "n_bar,bandwidth_over_gamma,qbhat,method,error_estimate,converged,t_converged,flag\n";
    bool converged_all = true;
    for (std::size_t i = 0; i < grid.rows(); ++i) {
        for (std::size_t j = 0; j < grid.cols(); ++j) {
            const auto& cell = grid.at(i, j);
            converged_all = converged_all && cell.converged;
            f << format_number(nb[i]) << ',' << format_number(bw[j]) << ','
              << format_number(cell.value) << ',' << to_string(cell.method) << ','
              << format_number(cell.error_estimate) << ',' << (cell.converged ? 1 : 0) << ','
              << format_number(cell.t_converged) << ','
              << csv_escape(grid.flags[i * grid.cols() + j]) << "\n";
        }
    }

    Meta m = meta_head(c);
    m.add("probe_kind", std::string(kind_name(c.kind)));
    m.add_axis("n_bar", nb);
    m.add_axis("bandwidth_over_gamma", bw);
    slh::SourceSpec largest = c.source();
    largest.n_bar = nb.back();
    add_layout(m, largest);
    add_engine_tolerances(m);
    m.add("converged_all", converged_all);
    m.add_flags(grid.flags, grid.cols());
    m.write(out / "sweep.meta.txt");
    return flags_exit(grid.flags);
}

// ---- readout: the three overlap curves vs bandwidth ----------------------

int run_readout(const cfg::RunConfig& c, const fs::path& out, unsigned workers) {
    const auto bw = axis_or(c.grid_bandwidth, "1e-2:10:15 log");
    const auto curves =
        readout::readout_curves(bw, {c.gamma, c.gamma_dephasing}, c.eta, workers);

    auto f = open_out(out / "readout_curves.csv");
    f << "bandwidth_over_gamma,b_cl_qs,b_q_qs,b_q_cs,flag\n";
    for (std::size_t j = 0; j < curves.bandwidth.size(); ++j) {
        f << format_number(curves.bandwidth[j]) << ',' << format_number(curves.b_cl_qs[j])
          << ',' << format_number(curves.b_q_qs[j]) << ',' << format_number(curves.b_q_cs[j])
          << ',' << csv_escape(curves.flags[j]) << "\n";
    }

    Meta m = meta_head(c);
    m.add("probe_polarization", std::string("R"));
    m.add("n_bar", 1.0);
    m.add_axis("bandwidth_over_gamma", bw);
    slh::SourceSpec coherent;
    coherent.kind = slh::SourceSpec::Kind::Coherent;
    coherent.pol = slh::SourceSpec::Pol::R;
    coherent.n_bar = 1.0;
    add_layout(m, coherent);
    add_engine_tolerances(m);
    m.add("phase_star", curves.phase_star);
    m.add("converged_all", flags_exit(curves.flags) == kExitOk);
    m.add_flags(curves.flags, 0);
    m.write(out / "readout.meta.txt");
    return flags_exit(curves.flags);
}

// ---- advantage-map: log-ratio over (eta, gamma_dephasing) ----------------

int run_advantage_map(const cfg::RunConfig& c, const fs::path& out, unsigned workers) {
    const auto eta = axis_or(c.grid_eta, "0.55:1.0:10");
    const auto gst = axis_or(c.grid_dephasing, "0:0.45:10");
    const double bandwidth = c.bandwidth_set ? c.bandwidth : 5e-2;
    const auto map = readout::advantage_map(eta, gst, c.gamma, bandwidth, workers);

    auto f = open_out(out / "advantage_map.csv");
    f << "eta,gamma_star_over_gamma,b_cl,b_q,log_ratio,in_region,flag\n";
    for (std::size_t i = 0; i < map.rows(); ++i) {
        for (std::size_t j = 0; j < map.cols(); ++j) {
            const std::size_t idx = i * map.cols() + j;
            f << format_number(eta[i]) << ',' << format_number(gst[j]) << ','
              << format_number(map.b_cl[idx]) << ',' << format_number(map.b_q[idx]) << ','
              << format_number(map.ratio[idx]) << ',' << (map.advantage[idx] ? 1 : 0) << ','
              << csv_escape(map.flags[idx]) << "\n";
        }
    }

    Meta m = meta_head(c);
    m.add("bandwidth_over_gamma", bandwidth);
    m.add_axis("eta", eta);
    m.add_axis("gamma_dephasing_over_gamma", gst);
    slh::SourceSpec coherent;
    coherent.kind = slh::SourceSpec::Kind::Coherent;
    coherent.pol = slh::SourceSpec::Pol::R;
    coherent.n_bar = 1.0;
    add_layout(m, coherent);
    add_engine_tolerances(m);
    m.add("phase_star", map.phase_star);

    // Threshold crossings along the physically meaningful edges: eta at zero
    // dephasing, dephasing at unit collection.
    if (!gst.empty() && gst.front() == 0.0) {
        std::vector<double> col(map.rows());
        for (std::size_t i = 0; i < map.rows(); ++i) col[i] = map.ratio_at(i, 0);
        const auto t = readout::threshold_crossing(eta, col);
        m.add("threshold_eta", t ? format_number(*t) : std::string("none"));
    }
    if (!eta.empty() && eta.back() == 1.0) {
        std::vector<double> row(map.cols());
        for (std::size_t j = 0; j < map.cols(); ++j) row[j] = map.ratio_at(map.rows() - 1, j);
        const auto t = readout::threshold_crossing(gst, row);
        m.add("threshold_gamma_dephasing", t ? format_number(*t) : std::string("none"));
    }

    m.add("converged_all", flags_exit(map.flags) == kExitOk);
    m.add_flags(map.flags, map.cols());
    m.write(out / "advantage_map.meta.txt");
    return flags_exit(map.flags);
}

// ---- polarization: Stokes trajectory per spin projection -----------------

int run_polarization(const cfg::RunConfig& c, const fs::path& out, unsigned) {
    Meta m = meta_head(c);
    m.add("probe_kind", std::string(kind_name(c.kind)));
    m.add("probe_polarization", std::string(pol_name(c.pol)));
    m.add("n_bar", c.n_bar);
    m.add("bandwidth_over_gamma", c.bandwidth);
    add_layout(m, c.source());

    std::vector<std::string> flags(2);
    const struct {
        int spin;
        const char* file;
        const char* label;
    } runs[2] = {{ops::kUp, "polarization_up.csv", "up"},
                 {ops::kDown, "polarization_down.csv", "down"}};

    pol::TrajectoryConfig tc;
    tc.cascade.emitter = {c.gamma, c.gamma_dephasing};
    tc.cascade.source = c.source();
    tc.cascade.eta = c.eta;
    tc.samples = c.samples;
    tc.t_end = c.t_end;
    m.add("samples", format_number(static_cast<double>(c.samples)));
    m.add("integrator_rtol", tc.integrator.rtol);
    m.add("integrator_atol", tc.integrator.atol);
    m.add("truncation_tol", tc.integrator.truncation_tol);

    for (int k = 0; k < 2; ++k) {
        auto f = open_out(out / runs[k].file);
        f << "t,eps_x,eps_y,eps_z,theta,phi,intensity\n";
        tc.spin = runs[k].spin;
        try {
            const auto traj = pol::stokes_trajectory(tc);
            for (const auto& s : traj.samples) {
                if (!s.defined) continue;
                f << format_number(s.t) << ',' << format_number(s.eps_x) << ','
                  << format_number(s.eps_y) << ',' << format_number(s.eps_z) << ','
                  << format_number(s.theta) << ',' << format_number(s.phi) << ','
                  << format_number(s.intensity) << "\n";
            }
            m.add(std::string("max_truncation_") + runs[k].label, traj.max_truncation);
        } catch (const std::exception& e) {
            flags[k] = std::string("spin ") + runs[k].label + ": " + e.what();
        }
    }

    m.add("converged_all", flags_exit(flags) == kExitOk);
    m.add_flags(flags, 0);
    m.write(out / "polarization.meta.txt");
    return flags_exit(flags);
}

} // namespace

int run_experiment(const cfg::RunConfig& c) {
    c.validate();
    if (c.experiment == cfg::Experiment::Validate)
        throw std::invalid_argument("the validate experiment runs self-checks and writes no "
                                    "artifacts; it is dispatched by the CLI");

    const fs::path out(c.out_dir);
    fs::create_directories(out);
    const unsigned workers = c.workers > 0 ? c.workers : default_worker_count();

    switch (c.experiment) {
        case cfg::Experiment::QBhat: return run_qbhat(c, out);
        case cfg::Experiment::Sweep: return run_sweep(c, out, workers);
        case cfg::Experiment::Readout: return run_readout(c, out, workers);
        case cfg::Experiment::AdvantageMap: return run_advantage_map(c, out, workers);
        case cfg::Experiment::Polarization: return run_polarization(c, out, workers);
        case cfg::Experiment::Validate: break;
    }
    throw std::invalid_argument("unhandled experiment");
}

} // namespace spisim::sweep
