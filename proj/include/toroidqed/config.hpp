// Run configuration: a sectioned key = value text format.
//
//   # comment
//   [section]
//   key = value          lists are comma separated
//
// Every key has a default; unknown sections or keys are errors. Writing a
// config and reading it back reproduces it exactly.

#pragma once

#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "toroidqed/core_model.hpp"
#include "toroidqed/errors.hpp"
#include "toroidqed/geometry.hpp"
#include "toroidqed/sweep.hpp"
#include "toroidqed/transit.hpp"

namespace toroidqed {

inline constexpr std::uint64_t kDefaultSeed = 1729;

struct AtomSettings {
    double g{50.0};                      // normal-mode coupling magnitude at the atom
    double kx{std::numbers::pi / 4.0};  // standing-wave phase
};

struct SpectrumSettings {
    double lo{-150.0};
    double hi{150.0};
    int points{601};
};

struct EigenSettings {
    double lo{-150.0};
    double hi{150.0};
    int points{301};
};

struct DropSettings {
    double window_ms{10.0};
    int sub_samples{16};
    bool atoms{true};
    std::optional<double> fixed_rho_nm;
    int threshold{6};
    double max_lag_us{20.0};
    std::uint64_t index{0};  // which drop of the seeded sequence
};

struct SweepSettings {
    std::vector<double> detunings{0.0, 10.0, 20.0, 30.0, 40.0, 50.0, 60.0};
    std::vector<double> g0m{35.0, 50.0, 65.0};
    std::vector<int> thresholds{6};
    std::size_t drops{100};
    bool baseline{true};
    bool normalize{true};
    bool fixed_rho{false};  // atoms at rho_min only, x and t still averaged
};

struct FitSettings {
    std::string model{"empty"};  // empty | width
    std::optional<double> fixed_center;
    bool allow_pin_h{true};
    bool calibrate{false};  // width model: map β to g0m through the averaged theory
    double calibration_lo{10.0};
    double calibration_hi{120.0};
    double calibration_step{5.0};
};

struct RunSettings {
    std::uint64_t seed{kDefaultSeed};
    unsigned jobs{1};
    std::string out{"out"};
};

struct RunConfig {
    SystemParams system{[] {
        SystemParams p;
        p.h = 4.9;
        p.gamma = 2.6;
        auto [ki, kex] = critical_split(17.9, 4.9);
        p.kappa_i = ki;
        p.kappa_ex = kex;
        return p;
    }()};
    double n0{0.3};
    AtomSettings atom;
    SpectrumSettings spectrum;
    EigenSettings eigen;
    ModeGeometry geometry;
    CloudParams cloud;
    DetectionChain detection;
    DropSettings drop;
    SweepSettings sweep;
    FitSettings fit;
    RunSettings run;

    DropConfig drop_config() const {
        DropConfig d;
        d.system = system;
        d.geometry = geometry;
        d.cloud = cloud;
        d.chain = detection;
        d.window_ms = drop.window_ms;
        d.sub_samples = drop.sub_samples;
        d.fixed_rho_nm = drop.fixed_rho_nm;
        d.atoms = drop.atoms;
        return d;
    }
};

namespace config_detail {

inline std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return std::string(s.substr(b, e - b + 1));
}

inline std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> out;
    if (trim(s).empty()) return out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) out.push_back(trim(item));
    return out;
}

inline std::string format_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

inline double parse_double(const std::string& s) {
    double v = 0.0;
    const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || p != s.data() + s.size() || !std::isfinite(v))
        throw ConfigError("not a finite number: '" + s + "'");
    return v;
}

template <class Int>
Int parse_int(const std::string& s) {
    Int v{};
    const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || p != s.data() + s.size()) throw ConfigError("not a valid integer: '" + s + "'");
    return v;
}

inline bool parse_bool(const std::string& s) {
    if (s == "true") return true;
    if (s == "false") return false;
    throw ConfigError("expected true or false, got '" + s + "'");
}

struct Entry {
    std::string section;
    std::string key;
    std::function<std::string(const RunConfig&)> get;
    std::function<void(RunConfig&, const std::string&)> set;
};

// Helpers that bind an entry to a member reached through an accessor.
template <class Access>
Entry real(std::string s, std::string k, Access a) {
    return {std::move(s), std::move(k), [a](const RunConfig& c) { return format_double(a(const_cast<RunConfig&>(c))); },
            [a](RunConfig& c, const std::string& v) { a(c) = parse_double(v); }};
}
template <class Access>
Entry integer(std::string s, std::string k, Access a) {
    using T = std::remove_reference_t<decltype(a(std::declval<RunConfig&>()))>;
    return {std::move(s), std::move(k), [a](const RunConfig& c) { return std::to_string(a(const_cast<RunConfig&>(c))); },
            [a](RunConfig& c, const std::string& v) { a(c) = parse_int<T>(v); }};
}
template <class Access>
Entry boolean(std::string s, std::string k, Access a) {
    return {std::move(s), std::move(k),
            [a](const RunConfig& c) { return std::string(a(const_cast<RunConfig&>(c)) ? "true" : "false"); },
            [a](RunConfig& c, const std::string& v) { a(c) = parse_bool(v); }};
}
template <class Access>
Entry text(std::string s, std::string k, Access a) {
    return {std::move(s), std::move(k), [a](const RunConfig& c) { return a(const_cast<RunConfig&>(c)); },
            [a](RunConfig& c, const std::string& v) { a(c) = v; }};
}
template <class Access>
Entry optional_real(std::string s, std::string k, Access a) {
    return {std::move(s), std::move(k),
            [a](const RunConfig& c) {
                const auto& o = a(const_cast<RunConfig&>(c));
                return o ? format_double(*o) : std::string();
            },
            [a](RunConfig& c, const std::string& v) {
                if (v.empty()) a(c).reset();
                else a(c) = parse_double(v);
            }};
}
template <class Access>
Entry real_list(std::string s, std::string k, Access a) {
    return {std::move(s), std::move(k),
            [a](const RunConfig& c) {
                std::string out;
                for (double v : a(const_cast<RunConfig&>(c))) out += (out.empty() ? "" : ", ") + format_double(v);
                return out;
            },
            [a](RunConfig& c, const std::string& v) {
                auto& dst = a(c);
                dst.clear();
                for (const auto& item : split_list(v)) dst.push_back(parse_double(item));
            }};
}
template <class Access>
Entry int_list(std::string s, std::string k, Access a) {
    return {std::move(s), std::move(k),
            [a](const RunConfig& c) {
                std::string out;
                for (int v : a(const_cast<RunConfig&>(c))) out += (out.empty() ? "" : ", ") + std::to_string(v);
                return out;
            },
            [a](RunConfig& c, const std::string& v) {
                auto& dst = a(c);
                dst.clear();
                for (const auto& item : split_list(v)) dst.push_back(parse_int<int>(item));
            }};
}

#define TQ_FIELD(expr) [](RunConfig& c) -> auto& { return c.expr; }

inline const std::vector<Entry>& registry() {
    static const std::vector<Entry> entries = [] {
        std::vector<Entry> e;
        e.push_back(real("system", "kappa_i", TQ_FIELD(system.kappa_i)));
        e.push_back(real("system", "kappa_ex", TQ_FIELD(system.kappa_ex)));
        e.push_back(real("system", "h", TQ_FIELD(system.h)));
        e.push_back(real("system", "gamma", TQ_FIELD(system.gamma)));
        e.push_back({"system", "delta_AC", [](const RunConfig& c) { return format_double(c.system.delta_AC()); },
                     [](RunConfig& c, const std::string& v) { c.system = c.system.at_cavity(parse_double(v)); }});
        e.push_back(real("system", "n0", TQ_FIELD(n0)));

        e.push_back(real("atom", "g", TQ_FIELD(atom.g)));
        e.push_back(real("atom", "kx", TQ_FIELD(atom.kx)));

        e.push_back(real("spectrum", "lo", TQ_FIELD(spectrum.lo)));
        e.push_back(real("spectrum", "hi", TQ_FIELD(spectrum.hi)));
        e.push_back(integer("spectrum", "points", TQ_FIELD(spectrum.points)));

        e.push_back(real("eigen", "lo", TQ_FIELD(eigen.lo)));
        e.push_back(real("eigen", "hi", TQ_FIELD(eigen.hi)));
        e.push_back(integer("eigen", "points", TQ_FIELD(eigen.points)));

        e.push_back(real("geometry", "D_um", TQ_FIELD(geometry.D_um)));
        e.push_back(real("geometry", "d_um", TQ_FIELD(geometry.d_um)));
        e.push_back(real("geometry", "lambda_nm", TQ_FIELD(geometry.lambda_nm)));
        e.push_back(real("geometry", "w_z_um", TQ_FIELD(geometry.w_z_um)));
        e.push_back(real("geometry", "g0_surface", TQ_FIELD(geometry.g0_surface)));

        e.push_back(real("cloud", "drop_height_mm", TQ_FIELD(cloud.drop_height_mm)));
        e.push_back(real("cloud", "cloud_fwhm_mm", TQ_FIELD(cloud.cloud_fwhm_mm)));
        e.push_back(real("cloud", "temperature_uK", TQ_FIELD(cloud.temperature_uK)));
        e.push_back(real("cloud", "mean_transits_per_drop", TQ_FIELD(cloud.mean_transits_per_drop)));
        e.push_back(real("cloud", "atom_count", TQ_FIELD(cloud.atom_count)));
        e.push_back(real("cloud", "rho_min_nm", TQ_FIELD(cloud.rho_min_nm)));
        e.push_back(real("cloud", "shell_inner_nm", TQ_FIELD(cloud.shell_inner_nm)));
        e.push_back(real("cloud", "shell_depth", TQ_FIELD(cloud.shell_depth)));

        e.push_back(real("detection", "xi", TQ_FIELD(detection.xi)));
        e.push_back(real("detection", "qe", TQ_FIELD(detection.qe)));
        e.push_back(real("detection", "dark_rate", TQ_FIELD(detection.dark_rate)));
        e.push_back(real("detection", "dead_time_ns", TQ_FIELD(detection.dead_time_ns)));
        e.push_back(real("detection", "splitter", TQ_FIELD(detection.splitter)));
        e.push_back(real("detection", "bin_dt_us", TQ_FIELD(detection.bin_dt_us)));
        e.push_back(real("detection", "c_max", TQ_FIELD(detection.c_max)));
        e.push_back(real("detection", "background_mean", TQ_FIELD(detection.background_mean)));
        e.push_back({"detection", "dead_time_model",
                     [](const RunConfig& c) {
                         return std::string(c.detection.dead_time_model == DeadTimeModel::paralyzable
                                                ? "paralyzable"
                                                : "non-paralyzable");
                     },
                     [](RunConfig& c, const std::string& v) {
                         if (v == "paralyzable") c.detection.dead_time_model = DeadTimeModel::paralyzable;
                         else if (v == "non-paralyzable") c.detection.dead_time_model = DeadTimeModel::non_paralyzable;
                         else throw ConfigError("expected paralyzable or non-paralyzable, got '" + v + "'");
                     }});
        e.push_back(real("detection", "drift_rms", TQ_FIELD(detection.drift_rms)));
        e.push_back(real("detection", "drift_corr_ms", TQ_FIELD(detection.drift_corr_ms)));

        e.push_back(real("drop", "window_ms", TQ_FIELD(drop.window_ms)));
        e.push_back(integer("drop", "sub_samples", TQ_FIELD(drop.sub_samples)));
        e.push_back(boolean("drop", "atoms", TQ_FIELD(drop.atoms)));
        e.push_back(optional_real("drop", "fixed_rho_nm", TQ_FIELD(drop.fixed_rho_nm)));
        e.push_back(integer("drop", "threshold", TQ_FIELD(drop.threshold)));
        e.push_back(real("drop", "max_lag_us", TQ_FIELD(drop.max_lag_us)));
        e.push_back(integer("drop", "index", TQ_FIELD(drop.index)));

        e.push_back(real_list("sweep", "detunings", TQ_FIELD(sweep.detunings)));
        e.push_back(real_list("sweep", "g0m", TQ_FIELD(sweep.g0m)));
        e.push_back(int_list("sweep", "thresholds", TQ_FIELD(sweep.thresholds)));
        e.push_back(integer("sweep", "drops", TQ_FIELD(sweep.drops)));
        e.push_back(boolean("sweep", "baseline", TQ_FIELD(sweep.baseline)));
        e.push_back(boolean("sweep", "normalize", TQ_FIELD(sweep.normalize)));
        e.push_back(boolean("sweep", "fixed_rho", TQ_FIELD(sweep.fixed_rho)));

        e.push_back(text("fit", "model", TQ_FIELD(fit.model)));
        e.push_back(optional_real("fit", "fixed_center", TQ_FIELD(fit.fixed_center)));
        e.push_back(boolean("fit", "allow_pin_h", TQ_FIELD(fit.allow_pin_h)));
        e.push_back(boolean("fit", "calibrate", TQ_FIELD(fit.calibrate)));
        e.push_back(real("fit", "calibration_lo", TQ_FIELD(fit.calibration_lo)));
        e.push_back(real("fit", "calibration_hi", TQ_FIELD(fit.calibration_hi)));
        e.push_back(real("fit", "calibration_step", TQ_FIELD(fit.calibration_step)));

        e.push_back(integer("run", "seed", TQ_FIELD(run.seed)));
        e.push_back(integer("run", "jobs", TQ_FIELD(run.jobs)));
        e.push_back(text("run", "out", TQ_FIELD(run.out)));
        return e;
    }();
    return entries;
}

#undef TQ_FIELD

inline const Entry& find_entry(const std::string& section, const std::string& key) {
    for (const auto& e : registry())
        if (e.section == section && e.key == key) return e;
    bool known_section = false;
    for (const auto& e : registry()) known_section = known_section || e.section == section;
    if (!known_section) throw ConfigError("unknown section [" + section + "]");
    throw ConfigError("unknown key '" + key + "' in section [" + section + "]");
}

}  // namespace config_detail

// Semantic checks beyond per-value parsing.
inline void validate(const RunConfig& c) {
    try {
        c.system.validate();
        c.geometry.validate();
        c.cloud.validate();
        c.detection.validate();
    } catch (const ContractError& e) {
        throw ConfigError(e.what());
    }
    auto check = [](bool ok, const std::string& msg) {
        if (!ok) throw ConfigError(msg);
    };
    check(c.n0 > 0.0, "system.n0 must be positive");
    check(c.atom.g >= 0.0, "atom.g must be >= 0");
    check(c.spectrum.points >= 2 && c.spectrum.hi > c.spectrum.lo, "spectrum: need hi > lo and at least 2 points");
    check(c.eigen.points >= 2 && c.eigen.hi > c.eigen.lo, "eigen: need hi > lo and at least 2 points");
    check(c.drop.window_ms > 0.0 && c.drop.sub_samples >= 8, "drop: window must be positive, sub_samples >= 8");
    check(c.drop.threshold >= 1 && c.drop.max_lag_us >= 0.0, "drop: threshold >= 1 and max_lag_us >= 0");
    check(!c.drop.fixed_rho_nm || *c.drop.fixed_rho_nm >= 0.0, "drop.fixed_rho_nm must be >= 0");
    check(!c.sweep.detunings.empty(), "sweep.detunings is empty");
    for (double d : c.sweep.detunings)
        check(std::abs(d) <= kMaxSweepDetuning, "sweep.detunings must lie within ±200 MHz");
    check(!c.sweep.g0m.empty(), "sweep.g0m is empty");
    for (double g : c.sweep.g0m) check(g >= 0.0, "sweep.g0m values must be >= 0");
    check(!c.sweep.thresholds.empty(), "sweep.thresholds is empty");
    for (int t : c.sweep.thresholds) check(t >= 1, "sweep.thresholds must be >= 1");
    check(c.sweep.drops > 0, "sweep.drops must be positive");
    check(c.fit.model == "empty" || c.fit.model == "width", "fit.model must be empty or width");
    check(c.fit.calibration_hi > c.fit.calibration_lo && c.fit.calibration_step > 0.0, "fit: bad calibration grid");
    check(c.run.jobs >= 1, "run.jobs must be >= 1");
    check(!c.run.out.empty(), "run.out is empty");
}

// Applies one "section.key=value" assignment.
inline void apply_override(RunConfig& c, const std::string& assignment) {
    const auto eq = assignment.find('=');
    const auto dot = assignment.find('.');
    if (eq == std::string::npos || dot == std::string::npos || dot > eq)
        throw ConfigError("override must look like section.key=value, got '" + assignment + "'");
    const std::string section = config_detail::trim(assignment.substr(0, dot));
    const std::string key = config_detail::trim(assignment.substr(dot + 1, eq - dot - 1));
    const std::string value = config_detail::trim(assignment.substr(eq + 1));
    try {
        config_detail::find_entry(section, key).set(c, value);
    } catch (const ConfigError& e) {
        throw ConfigError(section + "." + key + ": " + e.what());
    }
}

inline RunConfig parse_config(std::istream& in, RunConfig c = {}) {
    std::string line, section;
    std::map<std::pair<std::string, std::string>, int> seen;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        const std::string s = config_detail::trim(hash == std::string::npos ? line : line.substr(0, hash));
        if (s.empty()) continue;
        auto fail = [&](const std::string& msg) { throw ConfigError("line " + std::to_string(lineno) + ": " + msg); };
        if (s.front() == '[') {
            if (s.back() != ']') fail("unterminated section header");
            section = config_detail::trim(s.substr(1, s.size() - 2));
            bool known = false;
            for (const auto& e : config_detail::registry()) known = known || e.section == section;
            if (!known) fail("unknown section [" + section + "]");
            continue;
        }
        const auto eq = s.find('=');
        if (eq == std::string::npos) fail("expected key = value");
        if (section.empty()) fail("key outside of any section");
        const std::string key = config_detail::trim(s.substr(0, eq));
        const std::string value = config_detail::trim(s.substr(eq + 1));
        if (auto [it, fresh] = seen.emplace(std::pair{section, key}, lineno); !fresh)
            fail("duplicate key '" + key + "' (first on line " + std::to_string(it->second) + ")");
        try {
            config_detail::find_entry(section, key).set(c, value);
        } catch (const ConfigError& e) {
            fail(e.what());
        }
    }
    return c;
}

inline RunConfig parse_config(const std::string& text) {
    std::istringstream in(text);
    return parse_config(in);
}

inline RunConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read config file '" + path + "'");
    return parse_config(in);
}

inline std::string serialize(const RunConfig& c) {
    std::string out, section;
    for (const auto& e : config_detail::registry()) {
        if (e.section != section) {
            out += (section.empty() ? "" : "\n") + std::string("[") + e.section + "]\n";
            section = e.section;
        }
        const std::string v = e.get(c);
        out += e.key + (v.empty() ? " =\n" : " = " + v + "\n");
    }
    return out;
}

}  // namespace toroidqed
