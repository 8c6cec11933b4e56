#include "spisim/config.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <map>
#include <sstream>

namespace spisim::cfg {
namespace {

std::string trim(std::string s) {
    const auto notspace = [](unsigned char c) { return !std::isspace(c); };
    s.erase(s.begin(), std::find_if(s.begin(), s.end(), notspace));
    s.erase(std::find_if(s.rbegin(), s.rend(), notspace).base(), s.end());
    return s;
}

std::string lower(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return s;
}

double parse_number(const std::string& text, int line) {
    const std::string t = trim(text);
    double v = 0.0;
    const char* first = t.data();
    const char* last = t.data() + t.size();
    auto [p, ec] = std::from_chars(first, last, v);
    if (ec != std::errc{} || p != last)
        throw ConfigError("malformed number '" + t + "'", line);
    return v;
}

long parse_integer(const std::string& text, int line) {
    const std::string t = trim(text);
    long v = 0;
    auto [p, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
    if (ec != std::errc{} || p != t.data() + t.size())
        throw ConfigError("malformed integer '" + t + "'", line);
    return v;
}

void require_increasing(const std::vector<double>& v, const char* name) {
    for (std::size_t i = 1; i < v.size(); ++i)
        if (v[i] <= v[i - 1])
            throw ConfigError(std::string("grid '") + name + "' must be strictly increasing", 0);
}

} // namespace

ConfigError::ConfigError(const std::string& msg, int l)
    : std::runtime_error(l > 0 ? "config line " + std::to_string(l) + ": " + msg
                               : "config: " + msg),
      line(l) {}

Experiment experiment_from(const std::string& name) {
    const std::string n = lower(trim(name));
    if (n == "qbhat") return Experiment::QBhat;
    if (n == "sweep") return Experiment::Sweep;
    if (n == "readout") return Experiment::Readout;
    if (n == "advantage-map") return Experiment::AdvantageMap;
    if (n == "polarization") return Experiment::Polarization;
    if (n == "validate") return Experiment::Validate;
    throw ConfigError("unknown experiment '" + name + "'", 0);
}

std::string to_string(Experiment e) {
    switch (e) {
        case Experiment::QBhat: return "qbhat";
        case Experiment::Sweep: return "sweep";
        case Experiment::Readout: return "readout";
        case Experiment::AdvantageMap: return "advantage-map";
        case Experiment::Polarization: return "polarization";
        case Experiment::Validate: return "validate";
    }
    return "?";
}

std::uint64_t fnv1a(const std::string& text) {
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : text) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

std::vector<double> parse_axis(const std::string& text, int line) {
    std::string t = trim(text);
    bool log_spaced = false;
    if (t.size() > 3 && lower(t.substr(t.size() - 3)) == "log" &&
        std::isspace(static_cast<unsigned char>(t[t.size() - 4]))) {
        log_spaced = true;
        t = trim(t.substr(0, t.size() - 3));
    }

    std::vector<double> out;
    if (t.find(':') != std::string::npos) {
        std::istringstream ss(t);
        std::string a, b, n;
        std::getline(ss, a, ':');
        std::getline(ss, b, ':');
        std::getline(ss, n);
        const double lo = parse_number(a, line);
        const double hi = parse_number(b, line);
        const long count = parse_integer(n, line);
        if (count < 2 || count > 100000)
            throw ConfigError("grid count must be in [2, 100000]", line);
        if (hi <= lo)
            throw ConfigError("grid stop must exceed start", line);
        if (log_spaced && lo <= 0.0)
            throw ConfigError("log-spaced grid needs a positive start", line);
        out.reserve(count);
        for (long i = 0; i < count; ++i) {
            const double f = static_cast<double>(i) / (count - 1);
            out.push_back(log_spaced ? lo * std::pow(hi / lo, f) : lo + f * (hi - lo));
        }
        // Land exactly on the endpoints.
        out.front() = lo;
        out.back() = hi;
    } else {
        if (log_spaced)
            throw ConfigError("'log' only applies to start:stop:count ranges", line);
        std::istringstream ss(t);
        std::string item;
        while (std::getline(ss, item, ','))
            out.push_back(parse_number(item, line));
        if (out.empty())
            throw ConfigError("empty grid", line);
    }
    return out;
}

slh::SourceSpec RunConfig::source() const {
    slh::SourceSpec s;
    s.kind = kind;
    s.pol = pol;
    s.n_bar = n_bar;
    s.envelope = PhotonEnvelope::exponential(bandwidth * gamma);
    return s;
}

void RunConfig::validate() const {
    if (gamma != 1.0)
        throw ConfigError("gamma is the unit rate and stays 1", 0);
    if (gamma_dephasing < 0.0)
        throw ConfigError("gamma_dephasing must be >= 0", 0);
    if (eta <= 0.0 || eta > 1.0)
        throw ConfigError("eta must lie in (0, 1]", 0);
    if (n_bar < 0.0)
        throw ConfigError("n_bar must be >= 0", 0);
    if (kind == slh::SourceSpec::Kind::Superposition && n_bar > 1.0)
        throw ConfigError("superposition probe needs n_bar in [0, 1]", 0);
    if (bandwidth <= 0.0)
        throw ConfigError("bandwidth must be positive", 0);
    if (samples < 2)
        throw ConfigError("samples must be >= 2", 0);
    if (t_end < 0.0)
        throw ConfigError("t_end must be >= 0", 0);

    require_increasing(grid_n_bar, "n_bar");
    require_increasing(grid_bandwidth, "bandwidth");
    require_increasing(grid_eta, "eta");
    require_increasing(grid_dephasing, "gamma_dephasing");
    if (!grid_bandwidth.empty() && grid_bandwidth.front() <= 0.0)
        throw ConfigError("grid 'bandwidth' must be positive", 0);
    if (!grid_n_bar.empty() && grid_n_bar.front() < 0.0)
        throw ConfigError("grid 'n_bar' must be >= 0", 0);
    if (!grid_eta.empty() && (grid_eta.front() <= 0.0 || grid_eta.back() > 1.0))
        throw ConfigError("grid 'eta' must lie in (0, 1]", 0);
    if (!grid_dephasing.empty() && grid_dephasing.front() < 0.0)
        throw ConfigError("grid 'gamma_dephasing' must be >= 0", 0);
}

RunConfig parse_config(const std::string& text) {
    RunConfig c;
    c.config_hash = fnv1a(text);

    std::istringstream in(text);
    std::string raw;
    std::string section;
    std::map<std::string, int> seen; // section.key -> first line
    int line = 0;

    while (std::getline(in, raw)) {
        ++line;
        std::string s = raw;
        if (const auto pos = s.find('#'); pos != std::string::npos) s.erase(pos);
        s = trim(s);
        if (s.empty()) continue;

        if (s.front() == '[') {
            if (s.back() != ']')
                throw ConfigError("unterminated section header", line);
            section = lower(trim(s.substr(1, s.size() - 2)));
            if (section != "emitter" && section != "probe" && section != "grid" &&
                section != "run")
                throw ConfigError("unknown section '" + section + "'", line);
            continue;
        }

        const auto eq = s.find('=');
        if (eq == std::string::npos)
            throw ConfigError("expected key = value", line);
        const std::string key = lower(trim(s.substr(0, eq)));
        const std::string value = trim(s.substr(eq + 1));
        if (key.empty() || value.empty())
            throw ConfigError("expected key = value", line);
        if (section.empty())
            throw ConfigError("key '" + key + "' outside any section", line);

        const std::string qualified = section + "." + key;
        if (const auto it = seen.find(qualified); it != seen.end())
            throw ConfigError("duplicate key '" + key + "' (first at line " +
                                  std::to_string(it->second) + ")",
                              line);
        seen[qualified] = line;

        if (section == "emitter") {
            if (key == "gamma_dephasing")
                c.gamma_dephasing = parse_number(value, line);
            else if (key == "eta")
                c.eta = parse_number(value, line);
            else
                throw ConfigError("unknown key '" + key + "' in [emitter]", line);
        } else if (section == "probe") {
            if (key == "kind") {
                const std::string v = lower(value);
                if (v == "superposition")
                    c.kind = slh::SourceSpec::Kind::Superposition;
                else if (v == "coherent")
                    c.kind = slh::SourceSpec::Kind::Coherent;
                else
                    throw ConfigError("probe kind must be superposition or coherent", line);
            } else if (key == "polarization") {
                const std::string v = lower(value);
                if (v == "h")
                    c.pol = slh::SourceSpec::Pol::H;
                else if (v == "r")
                    c.pol = slh::SourceSpec::Pol::R;
                else
                    throw ConfigError("polarization must be H or R", line);
            } else if (key == "n_bar") {
                c.n_bar = parse_number(value, line);
            } else if (key == "bandwidth") {
                c.bandwidth = parse_number(value, line);
                c.bandwidth_set = true;
            } else {
                throw ConfigError("unknown key '" + key + "' in [probe]", line);
            }
        } else if (section == "grid") {
            if (key == "n_bar")
                c.grid_n_bar = parse_axis(value, line);
            else if (key == "bandwidth")
                c.grid_bandwidth = parse_axis(value, line);
            else if (key == "eta")
                c.grid_eta = parse_axis(value, line);
            else if (key == "gamma_dephasing")
                c.grid_dephasing = parse_axis(value, line);
            else
                throw ConfigError("unknown key '" + key + "' in [grid]", line);
        } else { // run
            if (key == "experiment") {
                c.experiment = experiment_from(value);
            } else if (key == "out") {
                c.out_dir = value;
            } else if (key == "workers") {
                const long w = parse_integer(value, line);
                if (w < 0) throw ConfigError("workers must be >= 0", line);
                c.workers = static_cast<unsigned>(w);
            } else if (key == "seed") {
                const long sd = parse_integer(value, line);
                if (sd < 0) throw ConfigError("seed must be >= 0", line);
                c.seed = static_cast<std::uint64_t>(sd);
            } else if (key == "samples") {
                c.samples = static_cast<int>(parse_integer(value, line));
            } else if (key == "t_end") {
                c.t_end = parse_number(value, line);
            } else {
                throw ConfigError("unknown key '" + key + "' in [run]", line);
            }
        }
    }

    c.validate();
    return c;
}

std::string describe(const RunConfig& c) {
    std::ostringstream os;
    os << to_string(c.experiment) << ": probe "
       << (c.kind == slh::SourceSpec::Kind::Superposition ? "superposition" : "coherent") << "/"
       << (c.pol == slh::SourceSpec::Pol::H ? "H" : "R") << " n_bar=" << c.n_bar
       << " bandwidth=" << c.bandwidth << " | emitter gamma*=" << c.gamma_dephasing
       << " eta=" << c.eta;
    auto grid = [&](const char* name, const std::vector<double>& v) {
        if (v.empty()) return;
        os << " | grid " << name << "[" << v.size() << "]=" << v.front() << ".." << v.back();
    };
    grid("n_bar", c.grid_n_bar);
    grid("bandwidth", c.grid_bandwidth);
    grid("eta", c.grid_eta);
    grid("gamma_dephasing", c.grid_dephasing);
    return os.str();
}

} // namespace spisim::cfg
