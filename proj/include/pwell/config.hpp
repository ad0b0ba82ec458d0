#pragma once

#include <cstdint>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "pwell/classify.hpp"

namespace pwell {

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// INI-style key-value document with sections. Unknown keys or sections are
// hard errors so typos never pass silently.
class ConfigDoc {
  public:
    static ConfigDoc parse(std::istream& in) {
        ConfigDoc doc;
        std::string line, section;
        int lineno = 0;
        while (std::getline(in, line)) {
            ++lineno;
            std::string s = trim(line);
            if (s.empty() || s[0] == '#' || s[0] == ';') continue;
            if (s.front() == '[') {
                if (s.back() != ']')
                    throw ConfigError("config line " + std::to_string(lineno) +
                                      ": malformed section header");
                section = trim(s.substr(1, s.size() - 2));
                doc.sections_.insert(section);
                continue;
            }
            const auto eq = s.find('=');
            if (eq == std::string::npos)
                throw ConfigError("config line " + std::to_string(lineno) +
                                  ": expected key = value");
            const std::string key = trim(s.substr(0, eq));
            const std::string value = trim(s.substr(eq + 1));
            if (section.empty())
                throw ConfigError("config line " + std::to_string(lineno) + ": key '" + key +
                                  "' outside any section");
            doc.values_[section + "." + key] = value;
        }
        return doc;
    }

    static ConfigDoc parse_file(const std::string& path) {
        std::ifstream in(path);
        if (!in) throw ConfigError("cannot open config file: " + path);
        return parse(in);
    }

    static ConfigDoc parse_string(const std::string& text) {
        std::istringstream in(text);
        return parse(in);
    }

    std::optional<std::string> get(const std::string& section, const std::string& key) const {
        auto it = values_.find(section + "." + key);
        consumed_.insert(section + "." + key);
        known_sections_.insert(section);
        if (it == values_.end()) return std::nullopt;
        return it->second;
    }

    double get_double(const std::string& sec, const std::string& key, double def) const {
        auto v = get(sec, key);
        if (!v) return def;
        try {
            std::size_t pos = 0;
            const double x = std::stod(*v, &pos);
            if (pos != v->size()) throw std::invalid_argument("");
            return x;
        } catch (...) {
            throw ConfigError("section [" + sec + "], key '" + key + "': not a number: " + *v);
        }
    }

    std::uint64_t get_u64(const std::string& sec, const std::string& key, std::uint64_t def) const {
        auto v = get(sec, key);
        if (!v) return def;
        try {
            return std::stoull(*v);
        } catch (...) {
            throw ConfigError("section [" + sec + "], key '" + key + "': not an integer: " + *v);
        }
    }

    int get_int(const std::string& sec, const std::string& key, int def) const {
        return static_cast<int>(get_u64(sec, key, static_cast<std::uint64_t>(def)));
    }

    std::string get_string(const std::string& sec, const std::string& key,
                           const std::string& def) const {
        auto v = get(sec, key);
        return v ? *v : def;
    }

    // Call after reading everything: any untouched key or section is an error.
    void reject_unknown() const {
        for (const auto& [k, v] : values_)
            if (!consumed_.count(k)) {
                const auto dot = k.find('.');
                throw ConfigError("unknown key '" + k.substr(dot + 1) + "' in section [" +
                                  k.substr(0, dot) + "]");
            }
        for (const auto& s : sections_)
            if (!known_sections_.count(s)) throw ConfigError("unknown section [" + s + "]");
    }

  private:
    static std::string trim(const std::string& s) {
        std::size_t a = s.find_first_not_of(" \t\r");
        std::size_t b = s.find_last_not_of(" \t\r");
        if (a == std::string::npos) return "";
        return s.substr(a, b - a + 1);
    }

    std::map<std::string, std::string> values_;
    std::set<std::string> sections_;
    mutable std::set<std::string> consumed_;
    mutable std::set<std::string> known_sections_;
};

struct SweepSpec {
    std::string parameter; // u0_scale | u1_scale | amp_scale
    std::vector<double> values;
};

struct Config {
    ExperimentPlan plan;
    std::optional<SweepSpec> sweep;
    std::string tag;

    // Effective configuration with defaults resolved, echoed into the output
    // directory of every run.
    std::string resolved_text() const;
};

namespace detail {

inline std::vector<ModeComponent> parse_modes(const std::string& text, int dim,
                                              const std::string& where) {
    // "k:amp;k:amp" in 1D, "kx,ky:amp;..." in 2D
    std::vector<ModeComponent> out;
    std::istringstream in(text);
    std::string item;
    while (std::getline(in, item, ';')) {
        if (item.empty()) continue;
        const auto colon = item.find(':');
        if (colon == std::string::npos)
            throw ConfigError(where + ": mode entry '" + item + "' must be k:amplitude");
        ModeComponent m;
        const std::string k = item.substr(0, colon);
        try {
            if (dim == 2) {
                const auto comma = k.find(',');
                if (comma == std::string::npos) {
                    m.kx = m.ky = std::stoi(k);
                } else {
                    m.kx = std::stoi(k.substr(0, comma));
                    m.ky = std::stoi(k.substr(comma + 1));
                }
            } else {
                m.kx = std::stoi(k);
            }
            m.amplitude = std::stod(item.substr(colon + 1));
        } catch (const ConfigError&) {
            throw;
        } catch (...) {
            throw ConfigError(where + ": malformed mode entry '" + item + "'");
        }
        out.push_back(m);
    }
    if (out.empty()) throw ConfigError(where + ": empty mode list");
    return out;
}

inline InitialRecipe parse_recipe(const ConfigDoc& doc, const std::string& prefix, int dim) {
    InitialRecipe r;
    const std::string kind = doc.get_string("initial", prefix + "_kind", "modes");
    if (kind == "modes") {
        r.kind = InitialRecipe::Kind::Modes;
        const std::string modes = doc.get_string("initial", prefix + "_modes", "1:0");
        r.modes = parse_modes(modes, dim, "section [initial], key '" + prefix + "_modes'");
    } else if (kind == "random") {
        r.kind = InitialRecipe::Kind::RandomSmooth;
        if (doc.get("initial", prefix + "_modes"))
            throw ConfigError("section [initial]: '" + prefix + "_modes' is not valid with " +
                              prefix + "_kind = random");
    } else {
        throw ConfigError("section [initial], key '" + prefix + "_kind': must be modes or random");
    }
    r.scale = doc.get_double("initial", prefix + "_scale", 1.0);
    return r;
}

} // namespace detail

inline Config load_config(const ConfigDoc& doc) {
    Config cfg;
    auto& plan = cfg.plan;

    const int dim = doc.get_int("grid", "dim", 1);
    if (dim == 1) {
        plan.grid = Grid::interval(doc.get_double("grid", "L", 3.14159265358979323846),
                                   doc.get_int("grid", "n", 200));
        if (doc.get("grid", "Lx") || doc.get("grid", "Ly") || doc.get("grid", "nx") ||
            doc.get("grid", "ny"))
            throw ConfigError("section [grid]: use L and n for dim = 1");
    } else if (dim == 2) {
        if (doc.get("grid", "L") || doc.get("grid", "n"))
            throw ConfigError("section [grid]: use Lx/Ly and nx/ny for dim = 2");
        plan.grid = Grid::rectangle(doc.get_double("grid", "Lx", 3.14159265358979323846),
                                    doc.get_double("grid", "Ly", 3.14159265358979323846),
                                    doc.get_int("grid", "nx", 48), doc.get_int("grid", "ny", 48));
    } else {
        throw ConfigError("section [grid], key 'dim': must be 1 or 2");
    }

    const std::string family = doc.get_string("nonlinearity", "family", "odd_power");
    const double p = doc.get_double("nonlinearity", "p", 3.0);
    if (family == "odd_power")
        plan.spec = NonlinearitySpec::odd_power(p);
    else if (family == "even_power")
        plan.spec = NonlinearitySpec::even_power(static_cast<int>(p));
    else if (family == "zero")
        plan.spec = NonlinearitySpec::zero();
    else
        throw ConfigError(
            "section [nonlinearity], key 'family': must be odd_power, even_power, or zero");

    plan.params.alpha = doc.get_double("condition", "alpha", 4.0);
    plan.params.beta = doc.get_double("condition", "beta", 0.0);
    plan.params.sigma = doc.get_double("condition", "sigma", 0.0);
    plan.params.gamma = doc.get_double("condition", "gamma", 4.0);
    plan.params.u_max = doc.get_double("condition", "U_max", 4.0);
    plan.params.sample_count = doc.get_int("condition", "samples", 10000);
    if (plan.spec.family != NonlinearityFamily::Zero) plan.params.validate();

    plan.u0 = detail::parse_recipe(doc, "u0", dim);
    plan.u1 = detail::parse_recipe(doc, "u1", dim);

    plan.dt = doc.get_double("integrator", "dt", 0.0);
    plan.t_end = doc.get_double("integrator", "t_end", 10.0);
    plan.monitors.cfl = doc.get_double("integrator", "cfl", 0.9);
    plan.monitors.blowup_factor = doc.get_double("integrator", "blowup_factor", 1e6);
    plan.monitors.drift_fail = doc.get_double("integrator", "drift_fail", 1e-2);
    plan.monitors.sample_dt = doc.get_double("integrator", "sample_dt", 0.01);
    plan.monitors.amplitude_limit = doc.get_double("integrator", "amplitude_limit", 1e154);

    plan.seed = doc.get_u64("search", "seed", 0);
    plan.depth_budget = doc.get_int("search", "budget", 64);
    plan.curve_points = doc.get_int("search", "curve_points", 24);

    cfg.tag = doc.get_string("output", "tag", "");

    if (doc.get("sweep", "parameter")) {
        SweepSpec sw;
        sw.parameter = doc.get_string("sweep", "parameter", "");
        if (sw.parameter != "u0_scale" && sw.parameter != "u1_scale" &&
            sw.parameter != "amp_scale")
            throw ConfigError(
                "section [sweep], key 'parameter': must be u0_scale, u1_scale, or amp_scale");
        const std::string values = doc.get_string("sweep", "values", "");
        std::istringstream in(values);
        std::string item;
        while (std::getline(in, item, ',')) {
            try {
                sw.values.push_back(std::stod(item));
            } catch (...) {
                throw ConfigError("section [sweep], key 'values': malformed number '" + item +
                                  "'");
            }
        }
        if (sw.values.empty())
            throw ConfigError("section [sweep], key 'values': at least one value required");
        cfg.sweep = sw;
    } else {
        (void)doc.get("sweep", "values");
    }

    doc.reject_unknown();
    return cfg;
}

inline Config load_config_file(const std::string& path) {
    return load_config(ConfigDoc::parse_file(path));
}

inline std::string Config::resolved_text() const {
    std::ostringstream os;
    const auto& g = plan.grid;
    os << "[grid]\ndim = " << g.dim << "\n";
    if (g.dim == 1)
        os << "L = " << g.Lx << "\nn = " << g.nx << "\n";
    else
        os << "Lx = " << g.Lx << "\nLy = " << g.Ly << "\nnx = " << g.nx << "\nny = " << g.ny
           << "\n";
    os << "\n[nonlinearity]\nfamily = ";
    switch (plan.spec.family) {
        case NonlinearityFamily::OddPower: os << "odd_power"; break;
        case NonlinearityFamily::EvenPower: os << "even_power"; break;
        case NonlinearityFamily::Zero: os << "zero"; break;
        case NonlinearityFamily::Custom: os << "custom"; break;
    }
    os << "\np = " << plan.spec.p << "\n";
    os << "\n[condition]\nalpha = " << plan.params.alpha << "\nbeta = " << plan.params.beta
       << "\nsigma = " << plan.params.sigma << "\ngamma = " << plan.params.gamma
       << "\nU_max = " << plan.params.u_max << "\nsamples = " << plan.params.sample_count << "\n";
    os << "\n[initial]\nu0 = " << plan.u0.describe() << "\nu1 = " << plan.u1.describe() << "\n";
    os << "\n[integrator]\ndt = " << plan.dt << "\nt_end = " << plan.t_end
       << "\ncfl = " << plan.monitors.cfl << "\nblowup_factor = " << plan.monitors.blowup_factor
       << "\ndrift_fail = " << plan.monitors.drift_fail
       << "\nsample_dt = " << plan.monitors.sample_dt << "\n";
    os << "\n[search]\nseed = " << plan.seed << "\nbudget = " << plan.depth_budget
       << "\ncurve_points = " << plan.curve_points << "\n";
    if (sweep) {
        os << "\n[sweep]\nparameter = " << sweep->parameter << "\nvalues =";
        for (std::size_t i = 0; i < sweep->values.size(); ++i)
            os << (i ? "," : " ") << sweep->values[i];
        os << "\n";
    }
    return os.str();
}

} // namespace pwell
