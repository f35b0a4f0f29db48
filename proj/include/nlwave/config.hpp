#pragma once

// Declarative run configuration: an INI-style file with sections
// [kernel] [grid] [time] [contour] [bc] [outputs] [data] [converge].
// Unknown sections and keys are errors that name the offending line.

#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "nlwave/errors.hpp"
#include "nlwave/kernels.hpp"
#include "nlwave/lattice.hpp"
#include "nlwave/reference.hpp"
#include "nlwave/solver.hpp"

namespace nlwave {

struct ini_entry {
    std::string value;
    int line = 0;
};

struct ini_document {
    std::string source;
    std::map<std::string, std::map<std::string, ini_entry>> sections;

    const ini_entry* find(const std::string& sec, const std::string& key) const {
        auto s = sections.find(sec);
        if (s == sections.end()) return nullptr;
        auto k = s->second.find(key);
        return k == s->second.end() ? nullptr : &k->second;
    }
};

namespace detail {

inline std::string trim(std::string s) {
    const char* ws = " \t\r";
    s.erase(0, s.find_first_not_of(ws));
    s.erase(s.find_last_not_of(ws) + 1);
    return s;
}

inline const std::map<std::string, std::vector<std::string>>& allowed_keys() {
    static const std::map<std::string, std::vector<std::string>> keys = {
        {"kernel", {"family", "delta", "nu", "amplitude", "rate", "profile"}},
        {"grid", {"dim", "h", "beta", "p", "quad_tol"}},
        {"time", {"tau", "T"}},
        {"contour", {"P", "theta"}},
        {"bc", {"mode"}},
        {"outputs", {"dir", "snapshot_times", "energy"}},
        {"data", {"phi", "psi", "support_tol"}},
        {"converge", {"h_ladder", "solver", "reference_half_width", "reference_modes"}},
    };
    return keys;
}

} // namespace detail

inline ini_document parse_ini(std::istream& in, const std::string& source) {
    ini_document doc;
    doc.source = source;
    std::string raw, section;
    int line = 0;
    while (std::getline(in, raw)) {
        ++line;
        std::string s = detail::trim(raw.substr(0, raw.find_first_of("#;")));
        if (s.empty()) continue;
        auto where = [&] { return detail::concat(source, ":", line); };
        if (s.front() == '[') {
            if (s.back() != ']') throw config_error(where() + ": malformed section header '" + s + "'");
            section = detail::trim(s.substr(1, s.size() - 2));
            if (!detail::allowed_keys().count(section))
                throw config_error(where() + ": unknown section [" + section + "]");
            doc.sections[section];
            continue;
        }
        auto eq = s.find('=');
        if (eq == std::string::npos) throw config_error(where() + ": expected key = value, got '" + s + "'");
        if (section.empty()) throw config_error(where() + ": key outside any section");
        std::string key = detail::trim(s.substr(0, eq));
        std::string value = detail::trim(s.substr(eq + 1));
        const auto& allowed = detail::allowed_keys().at(section);
        if (std::find(allowed.begin(), allowed.end(), key) == allowed.end())
            throw config_error(where() + ": unknown key '" + key + "' in [" + section + "]");
        if (doc.sections[section].count(key))
            throw config_error(where() + ": duplicate key '" + key + "' in [" + section + "]");
        doc.sections[section][key] = {value, line};
    }
    return doc;
}

inline ini_document parse_ini_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw config_error("cannot open config file " + path.string());
    return parse_ini(in, path.string());
}

/// Typed access with line-numbered errors.
class config_reader {
public:
    explicit config_reader(const ini_document& doc) : doc_(doc) {}

    bool has(const std::string& sec, const std::string& key) const { return doc_.find(sec, key) != nullptr; }

    std::string str(const std::string& sec, const std::string& key,
                    std::optional<std::string> fallback = std::nullopt) const {
        if (const ini_entry* e = doc_.find(sec, key)) return e->value;
        if (fallback) return *fallback;
        throw config_error(doc_.source + ": missing key '" + key + "' in [" + sec + "]");
    }

    double num(const std::string& sec, const std::string& key, std::optional<double> fallback = std::nullopt) const {
        const ini_entry* e = doc_.find(sec, key);
        if (!e) {
            if (fallback) return *fallback;
            throw config_error(doc_.source + ": missing key '" + key + "' in [" + sec + "]");
        }
        return parse_number(e->value, *e, key);
    }

    int integer(const std::string& sec, const std::string& key, std::optional<int> fallback = std::nullopt) const {
        const ini_entry* e = doc_.find(sec, key);
        double v = num(sec, key, fallback ? std::optional<double>(*fallback) : std::nullopt);
        if (v != std::floor(v))
            throw config_error(detail::concat(doc_.source, ":", e ? e->line : 0, ": key '", key,
                                              "' must be an integer"));
        return static_cast<int>(v);
    }

    std::vector<double> list(const std::string& sec, const std::string& key) const {
        std::vector<double> out;
        const ini_entry* e = doc_.find(sec, key);
        if (!e) return out;
        std::stringstream ss(e->value);
        std::string item;
        while (std::getline(ss, item, ',')) {
            item = detail::trim(item);
            if (!item.empty()) out.push_back(parse_number(item, *e, key));
        }
        return out;
    }

    int line_of(const std::string& sec, const std::string& key) const {
        const ini_entry* e = doc_.find(sec, key);
        return e ? e->line : 0;
    }
    const std::string& source() const { return doc_.source; }

private:
    double parse_number(const std::string& text, const ini_entry& e, const std::string& key) const {
        try {
            std::size_t pos = 0;
            double v = std::stod(text, &pos);
            if (pos != text.size()) throw std::invalid_argument(text);
            return v;
        } catch (const std::exception&) {
            throw config_error(detail::concat(doc_.source, ":", e.line, ": key '", key,
                                              "' expects a number, got '", text, "'"));
        }
    }
    const ini_document& doc_;
};

/// Named initial data. Example 1 uses a pair of pulses at +-0.2 with an
/// antisymmetric velocity; example 2 places the same pulses on the diagonal.
inline field_fn preset_field(const std::string& name, int dim, bool velocity) {
    if (name == "zero") return [](std::span<const double>) { return 0.0; };
    if (name == "example1" && dim == 1) {
        if (velocity) return [](std::span<const double> x) { return 50.0 * x[0] * std::exp(-25.0 * x[0] * x[0]); };
        return [](std::span<const double> x) {
            double a = x[0] - 0.2, b = x[0] + 0.2;
            return std::exp(-25.0 * a * a) + std::exp(-25.0 * b * b);
        };
    }
    if (name == "example2" && !velocity) {
        return [dim](std::span<const double> x) {
            double a = 0.0, b = 0.0;
            for (int i = 0; i < dim; ++i) {
                a += (x[i] - 0.2) * (x[i] - 0.2);
                b += (x[i] + 0.2) * (x[i] + 0.2);
            }
            return std::exp(-25.0 * a) + std::exp(-25.0 * b);
        };
    }
    throw config_error(detail::concat("unknown ", velocity ? "velocity" : "displacement", " preset '", name,
                                      "' for d = ", dim));
}

struct run_config {
    kernel_spec kernel;
    int p = 1;
    double quad_tol = 1e-13;
    double h = 0.0;
    double beta = 0.0;
    double tau = 0.0;
    double T = 0.0;
    int P = 0;            // 0: automatic
    double theta = 1e8;
    bc_mode bc = bc_mode::dtn;
    std::string out_dir = "out";
    std::vector<double> snapshot_times;
    bool energy = false;
    std::string phi = "zero";
    std::string psi = "zero";
    double support_tol = 1e-14;   // relative tail allowed outside K-
    std::vector<double> h_ladder;
    std::string converge_solver = "free-space";
    double reference_half_width = 4.0;
    int reference_modes = 1024;

    grid_spec grid() const { return grid_spec::make(kernel.dim, h, kernel.delta, beta); }
    grid_spec grid_at(double hh) const { return grid_spec::make(kernel.dim, hh, kernel.delta, beta); }
    time_grid time() const { return time_grid::from_final_time(T, tau); }
    contour_spec contour() const { return contour_spec::make(time().N, P, theta); }

    std::vector<int> snapshot_steps() const {
        std::vector<int> out;
        for (double t : snapshot_times) out.push_back(exact_ratio(t, tau, "snapshot time / tau"));
        return out;
    }
};

inline run_config read_run_config(const ini_document& doc) {
    config_reader r(doc);
    run_config c;
    c.kernel.family = parse_kernel_family(r.str("kernel", "family"));
    c.kernel.delta = r.num("kernel", "delta");
    c.kernel.dim = r.integer("grid", "dim", 1);
    c.kernel.nu = r.num("kernel", "nu", 0.5);
    c.kernel.amplitude = r.num("kernel", "amplitude", 1.0);
    c.kernel.rate = r.num("kernel", "rate", 0.0);
    if (r.has("kernel", "profile")) {
        // profile = r0:v0, r1:v1, ...
        std::stringstream ss(r.str("kernel", "profile"));
        std::string item;
        while (std::getline(ss, item, ',')) {
            auto colon = item.find(':');
            if (colon == std::string::npos)
                throw config_error(detail::concat(r.source(), ":", r.line_of("kernel", "profile"),
                                                  ": profile entries must be radius:value"));
            c.kernel.profile.emplace_back(std::stod(item.substr(0, colon)), std::stod(item.substr(colon + 1)));
        }
    }
    c.kernel.validate();
    c.p = r.integer("grid", "p", 1);
    c.quad_tol = r.num("grid", "quad_tol", 1e-13);
    c.h = r.num("grid", "h");
    c.beta = r.num("grid", "beta");
    c.tau = r.num("time", "tau");
    c.T = r.num("time", "T");
    c.P = r.integer("contour", "P", 0);
    c.theta = r.num("contour", "theta", 1e8);
    c.bc = parse_bc_mode(r.str("bc", "mode", std::string("dtn")));
    c.out_dir = r.str("outputs", "dir", std::string("out"));
    c.snapshot_times = r.list("outputs", "snapshot_times");
    c.energy = r.str("outputs", "energy", std::string("false")) == "true";
    c.phi = r.str("data", "phi", std::string("zero"));
    c.psi = r.str("data", "psi", std::string("zero"));
    c.support_tol = r.num("data", "support_tol", 1e-14);
    c.h_ladder = r.list("converge", "h_ladder");
    c.converge_solver = r.str("converge", "solver", std::string("free-space"));
    if (c.converge_solver != "free-space" && c.converge_solver != "bounded")
        throw config_error(detail::concat(r.source(), ":", r.line_of("converge", "solver"),
                                          ": converge solver must be free-space or bounded"));
    c.reference_half_width = r.num("converge", "reference_half_width", 4.0);
    c.reference_modes = r.integer("converge", "reference_modes", 1024);
    // validate eagerly so grid/time inconsistencies surface at load time
    (void)c.grid();
    (void)c.time();
    (void)c.snapshot_steps();
    preset_field(c.phi, c.kernel.dim, false);
    preset_field(c.psi, c.kernel.dim, true);
    return c;
}

/// Canonical config text; parsing it back yields the same run_config.
inline void write_run_config(std::ostream& os, const run_config& c) {
    auto num = [](double v) { return fmt_double(v); };
    auto list = [&](const std::vector<double>& v) {
        std::string out;
        for (std::size_t i = 0; i < v.size(); ++i) out += (i ? ", " : "") + num(v[i]);
        return out;
    };
    os << "[kernel]\nfamily = " << to_string(c.kernel.family) << "\ndelta = " << num(c.kernel.delta)
       << "\nnu = " << num(c.kernel.nu) << "\namplitude = " << num(c.kernel.amplitude)
       << "\nrate = " << num(c.kernel.rate) << '\n';
    if (!c.kernel.profile.empty()) {
        os << "profile = ";
        for (std::size_t i = 0; i < c.kernel.profile.size(); ++i)
            os << (i ? ", " : "") << num(c.kernel.profile[i].first) << ':' << num(c.kernel.profile[i].second);
        os << '\n';
    }
    os << "\n[grid]\ndim = " << c.kernel.dim << "\nh = " << num(c.h) << "\nbeta = " << num(c.beta)
       << "\np = " << c.p << "\nquad_tol = " << num(c.quad_tol) << '\n';
    os << "\n[time]\ntau = " << num(c.tau) << "\nT = " << num(c.T) << '\n';
    os << "\n[contour]\nP = " << c.P << "\ntheta = " << num(c.theta) << '\n';
    os << "\n[bc]\nmode = " << to_string(c.bc) << '\n';
    os << "\n[outputs]\ndir = " << c.out_dir << "\nsnapshot_times = " << list(c.snapshot_times)
       << "\nenergy = " << (c.energy ? "true" : "false") << '\n';
    os << "\n[data]\nphi = " << c.phi << "\npsi = " << c.psi
       << "\nsupport_tol = " << num(c.support_tol) << '\n';
    os << "\n[converge]\nh_ladder = " << list(c.h_ladder) << "\nsolver = " << c.converge_solver
       << "\nreference_half_width = " << num(c.reference_half_width)
       << "\nreference_modes = " << c.reference_modes << '\n';
}

inline run_config load_run_config(const std::filesystem::path& path) {
    return read_run_config(parse_ini_file(path));
}

} // namespace nlwave
