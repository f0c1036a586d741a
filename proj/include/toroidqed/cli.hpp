// Command implementations behind the toroidqed executable. Each command
// computes all of its output files in memory; write_outputs then commits them.

#pragma once

#include <array>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "toroidqed/config.hpp"
#include "toroidqed/core_model.hpp"
#include "toroidqed/fitting.hpp"
#include "toroidqed/geometry.hpp"
#include "toroidqed/sweep.hpp"
#include "toroidqed/transit.hpp"

namespace toroidqed {

struct OutputFile {
    std::string name;
    std::string content;
};
using Outputs = std::vector<OutputFile>;

inline std::uint64_t fnv1a(std::string_view bytes) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

inline std::string hex64(std::uint64_t v) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

// Digest of everything that affects results; thread count and output directory excluded.
inline std::string config_digest(RunConfig c) {
    c.run.jobs = 1;
    c.run.out.clear();
    return hex64(fnv1a(serialize(c)));
}

// Writes every file to a temporary name inside dir, then renames them into place.
inline void write_outputs(const std::filesystem::path& dir, const Outputs& files) {
    namespace fs = std::filesystem;
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw ConfigError("cannot create output directory '" + dir.string() + "': " + ec.message());
    std::vector<fs::path> temps;
    auto cleanup = [&] {
        for (const auto& t : temps) fs::remove(t, ec);
    };
    for (const auto& f : files) {
        const fs::path tmp = dir / ("." + f.name + ".tmp");
        temps.push_back(tmp);
        std::ofstream out(tmp, std::ios::binary);
        out << f.content;
        out.close();
        if (!out) {
            cleanup();
            throw ConfigError("cannot write '" + tmp.string() + "'");
        }
    }
    for (std::size_t i = 0; i < files.size(); ++i) {
        fs::rename(temps[i], dir / files[i].name, ec);
        if (ec) {
            cleanup();
            throw ConfigError("cannot rename into '" + (dir / files[i].name).string() + "': " + ec.message());
        }
    }
}

namespace cli_detail {

inline std::string num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

class CsvWriter {
public:
    CsvWriter(const std::string& schema, const RunConfig& cfg, std::vector<std::string> columns) {
        out_ << "# schema: toroidqed." << schema << "/1\n";
        out_ << "# config: " << config_digest(cfg) << "\n";
        for (std::size_t i = 0; i < columns.size(); ++i) out_ << (i ? "," : "") << columns[i];
        out_ << "\n";
    }
    template <class... T>
    void row(const T&... cells) {
        std::size_t i = 0;
        ((out_ << (i++ ? "," : "") << cell(cells)), ...);
        out_ << "\n";
    }
    std::string str() const { return out_.str(); }

private:
    static std::string cell(double v) { return num(v); }
    static std::string cell(int v) { return std::to_string(v); }
    static std::string cell(std::size_t v) { return std::to_string(v); }
    static std::string cell(const std::string& s) { return s; }
    std::ostringstream out_;
};

inline nlohmann::ordered_json header(const std::string& schema, const RunConfig& cfg) {
    nlohmann::ordered_json j;
    j["schema"] = "toroidqed." + schema + "/1";
    j["config_digest"] = config_digest(cfg);
    j["seed"] = cfg.run.seed;
    return j;
}

inline std::string dump(const nlohmann::ordered_json& j) { return j.dump(2) + "\n"; }

inline SystemParams atom_params(const RunConfig& cfg) {
    SystemParams p = cfg.system;
    p.g_tw = traveling_wave_coupling(cfg.atom.g, 1.0, cfg.atom.kx);
    return p;
}

inline double grid_point(double lo, double hi, int n, int i) {
    return i + 1 == n ? hi : lo + (hi - lo) * i / (n - 1);
}

inline nlohmann::ordered_json fit_params(const FitResult& r) {
    nlohmann::ordered_json j = nlohmann::ordered_json::object();
    for (const auto& p : r.params) j[p.name] = {{"value", p.value}, {"error", p.error}, {"pinned", p.pinned}};
    return j;
}

}  // namespace cli_detail

// ---- spectrum ------------------------------------------------------------

inline Outputs run_spectrum(const RunConfig& cfg) {
    using namespace cli_detail;
    const SystemParams p = atom_params(cfg);
    p.validate();
    CsvWriter csv("spectrum", cfg, {"delta_mhz", "t_f", "t_b"});
    const auto& s = cfg.spectrum;
    for (int i = 0; i < s.points; ++i) {
        const SystemParams q = p.with_probe(grid_point(s.lo, s.hi, s.points, i));
        csv.row(q.delta, forward_transmission(q), backward_transmission(q));
    }
    return {{"spectrum.csv", csv.str()}};
}

// ---- eigen ---------------------------------------------------------------

// Eigenvalues along a Δ_AC scan. Branches are followed by eigenvector overlap
// with the previous point rather than by frequency order, so crossings keep identity.
inline Outputs run_eigen(const RunConfig& cfg) {
    using namespace cli_detail;
    const SystemParams base = atom_params(cfg);
    const auto& e = cfg.eigen;
    std::array<Eigenmode, 3> prev{};
    nlohmann::ordered_json points = nlohmann::ordered_json::array();
    for (int i = 0; i < e.points; ++i) {
        const double dac = grid_point(e.lo, e.hi, e.points, i);
        const EigenSet set = eigenvalues(base.at_cavity(dac));
        std::array<std::size_t, 3> perm{0, 1, 2};
        if (i > 0) {
            std::array<std::size_t, 3> best = perm, trial = perm;
            double best_score = -1.0;
            do {
                double score = 0.0;
                for (std::size_t b = 0; b < 3; ++b)
                    score += std::abs(prev[b].vector.dot(set.modes[trial[b]].vector));
                if (score > best_score) {
                    best_score = score;
                    best = trial;
                }
            } while (std::next_permutation(trial.begin(), trial.end()));
            perm = best;
        }
        nlohmann::ordered_json branches = nlohmann::ordered_json::array();
        for (std::size_t b = 0; b < 3; ++b) {
            const Eigenmode& m = set.modes[perm[b]];
            prev[b] = m;
            branches.push_back({{"frequency", m.frequency},
                                {"decay", m.decay},
                                {"label", to_string(m.label)},
                                {"weights", {{"A", m.weights[0]}, {"B", m.weights[1]}, {"atom", m.weights[2]}}}});
        }
        points.push_back({{"delta_AC", dac}, {"branches", branches}});
    }
    auto j = header("eigen", cfg);
    j["g_tw"] = {{"re", base.g_tw.real()}, {"im", base.g_tw.imag()}};
    j["points"] = points;
    return {{"eigen.json", dump(j)}};
}

// ---- drop ----------------------------------------------------------------

inline Outputs run_drop(const RunConfig& cfg) {
    using namespace cli_detail;
    const DropConfig dc = cfg.drop_config();
    const DropResult r = simulate_drop(dc, cfg.run.seed, cfg.drop.index);
    const auto& s = r.series;

    CsvWriter counts("counts", cfg, {"t_us", "t_f", "det1", "det2"});
    for (std::size_t i = 0; i < s.size(); ++i) counts.row(s.time_us(i), r.t_f[i], s.det1[i], s.det2[i]);

    const CountHistogram hist = count_histogram(s, {0, s.size()});
    CsvWriter hcsv("histogram", cfg, {"counts", "bins", "probability", "probability_err", "poisson"});
    for (std::size_t c = 0; c < hist.counts().size(); ++c)
        hcsv.row(c, static_cast<std::size_t>(hist.counts()[c]), hist.probability(c), hist.probability_error(c),
                 hist.poisson(c));

    CsvWriter ccsv("correlation", cfg, {"lag_us", "gamma"});
    for (const auto& p : cross_correlation(s, cfg.drop.max_lag_us)) ccsv.row(p.lag_us, p.gamma);

    const auto events = threshold_events(s, cfg.drop.threshold);
    SystemParams empty = cfg.system;
    empty.g_tw = 0.0;
    auto j = header("drop", cfg);
    j["drop_index"] = cfg.drop.index;
    j["bins"] = s.size();
    j["bin_dt_us"] = s.bin_dt_us;
    j["origin_us"] = s.origin_us;
    j["transits"] = r.transits.size();
    j["threshold"] = cfg.drop.threshold;
    j["events"] = events.size();
    j["mean_counts_per_bin"] = hist.mean();
    j["max_counts"] = hist.counts().empty() ? 0 : hist.counts().size() - 1;
    j["c_max_consistent"] = c_max_consistent(dc.chain, empty.at_cavity(0.0), cfg.n0);
    nlohmann::ordered_json ev = nlohmann::ordered_json::array();
    for (const auto& e : events)
        ev.push_back({{"t_us", s.time_us(e.first_bin)}, {"bins", e.last_bin - e.first_bin + 1},
                      {"peak_counts", e.peak_counts}, {"total_counts", e.total_counts}});
    j["event_list"] = ev;
    return {{"counts.csv", counts.str()},
            {"histogram.csv", hcsv.str()},
            {"correlation.csv", ccsv.str()},
            {"summary.json", dump(j)}};
}

// ---- sweep ---------------------------------------------------------------

inline SweepConfig sweep_config(const RunConfig& cfg, double g0m) {
    SweepConfig sc;
    sc.drop = cfg.drop_config();
    sc.drop.atoms = true;
    sc.drop.geometry = geometry_for_g0m(cfg.geometry, g0m, cfg.cloud.rho_min_nm);
    if (cfg.sweep.fixed_rho) sc.drop.fixed_rho_nm = cfg.cloud.rho_min_nm;
    sc.detunings = cfg.sweep.detunings;
    sc.thresholds = cfg.sweep.thresholds;
    sc.drops = cfg.sweep.drops;
    sc.subtract_baseline = cfg.sweep.baseline;
    sc.normalize = cfg.sweep.normalize;
    sc.jobs = cfg.run.jobs;
    return sc;
}

inline Outputs run_sweep(const RunConfig& cfg) {
    using namespace cli_detail;
    const auto& sw = cfg.sweep;
    std::vector<SweepResult> results;
    std::vector<SweepConfig> configs;
    for (double g : sw.g0m) {
        configs.push_back(sweep_config(cfg, g));
        configs.back().validate();
    }
    for (const auto& sc : configs) results.push_back(detuning_sweep(sc, cfg.run.seed));

    CsvWriter csv("sweep", cfg,
                  {"g0m", "threshold", "delta_AC", "events_per_drop", "events_err", "baseline", "value", "value_err",
                   "theory_t_f", "theory_value"});
    auto j = header("sweep", cfg);
    j["drops"] = sw.drops;
    nlohmann::ordered_json widths = nlohmann::ordered_json::array();
    for (std::size_t k = 0; k < sw.g0m.size(); ++k) {
        const auto theory = theory_sweep(sw.detunings, sw.g0m[k], Averaging::x_rho_t, cfg.system, cfg.geometry,
                                         cfg.cloud, cfg.detection.bin_dt_us);
        const double theory_zero =
            theory_sweep({0.0}, sw.g0m[k], Averaging::x_rho_t, cfg.system, cfg.geometry, cfg.cloud,
                         cfg.detection.bin_dt_us)[0].value;
        std::vector<CurvePoint> theory_norm;
        for (const auto& p : theory) theory_norm.push_back({p.delta_AC, theory_zero > 0.0 ? p.value / theory_zero : 0.0});
        const auto theory_hw = half_max_crossing(theory);
        for (std::size_t t = 0; t < sw.thresholds.size(); ++t) {
            const SweepCurve& c = results[k].curves[t];
            for (std::size_t i = 0; i < c.detunings.size(); ++i)
                csv.row(sw.g0m[k], c.threshold, c.detunings[i], c.mean[i], c.mean_err[i], c.baseline, c.value[i],
                        c.value_err[i], theory[i].value, theory_norm[i].value);
            const auto hw = sweep_half_width(results[k], configs[k], t, 200, cfg.run.seed);
            nlohmann::ordered_json w{{"g0m", sw.g0m[k]}, {"threshold", c.threshold}};
            w["half_width"] = std::isfinite(hw.value) ? nlohmann::ordered_json(hw.value) : nlohmann::ordered_json();
            w["half_width_err"] = std::isfinite(hw.error) ? nlohmann::ordered_json(hw.error) : nlohmann::ordered_json();
            w["unresolved_replicas"] = hw.unresolved;
            w["theory_half_width"] = theory_hw ? nlohmann::ordered_json(*theory_hw) : nlohmann::ordered_json();
            widths.push_back(w);
        }
    }
    j["half_widths"] = widths;

    // width steps between consecutive g0m values, with drop-paired errors
    if (sw.g0m.size() >= 2) {
        std::vector<const SweepResult*> ptrs;
        for (const auto& r : results) ptrs.push_back(&r);
        nlohmann::ordered_json ord = nlohmann::ordered_json::array();
        for (std::size_t t = 0; t < sw.thresholds.size(); ++t) {
            const WidthOrdering o = half_width_ordering(ptrs, configs.front(), t, 400, cfg.run.seed);
            nlohmann::ordered_json steps = nlohmann::ordered_json::array();
            for (std::size_t i = 0; i < o.difference.size(); ++i)
                steps.push_back({{"from_g0m", sw.g0m[i]}, {"to_g0m", sw.g0m[i + 1]}, {"difference", o.difference[i]},
                                 {"difference_err", o.difference_err[i]}});
            const double z = o.min_significance();
            ord.push_back({{"threshold", sw.thresholds[t]},
                           {"resolved", o.resolved},
                           {"min_significance", std::isfinite(z) ? nlohmann::ordered_json(z) : nlohmann::ordered_json()},
                           {"steps", steps}});
        }
        j["ordering"] = ord;
    }
    return {{"sweep.csv", csv.str()}, {"sweep_summary.json", dump(j)}};
}

// ---- fit -----------------------------------------------------------------

// Comment lines start with '#'; the first other line names the columns.
struct CsvTable {
    std::vector<std::string> columns;
    std::vector<std::vector<double>> rows;

    std::optional<std::size_t> column(std::initializer_list<const char*> names) const {
        for (const char* n : names)
            for (std::size_t i = 0; i < columns.size(); ++i)
                if (columns[i] == n) return i;
        return std::nullopt;
    }
    std::vector<double> values(std::size_t c) const {
        std::vector<double> out;
        for (const auto& r : rows) out.push_back(r[c]);
        return out;
    }
};

inline CsvTable parse_csv(const std::string& text) {
    CsvTable t;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const std::string s = config_detail::trim(line);
        if (s.empty() || s.front() == '#') continue;
        const auto cells = config_detail::split_list(s);
        if (t.columns.empty()) {
            t.columns = cells;
            continue;
        }
        if (cells.size() != t.columns.size())
            throw ContractError("input line " + std::to_string(lineno) + ": expected " +
                                std::to_string(t.columns.size()) + " columns");
        std::vector<double> row;
        for (const auto& c : cells) {
            try {
                row.push_back(config_detail::parse_double(c));
            } catch (const ConfigError&) {
                throw ContractError("input line " + std::to_string(lineno) + ": not a number: '" + c + "'");
            }
        }
        t.rows.push_back(std::move(row));
    }
    if (t.columns.empty()) throw ContractError("input has no header line");
    return t;
}

inline Outputs run_fit(const RunConfig& cfg, const std::string& input_text, const std::string& input_name) {
    using namespace cli_detail;
    const CsvTable table = parse_csv(input_text);
    auto j = header("fit", cfg);
    j["input"] = input_name;
    j["input_digest"] = hex64(fnv1a(input_text));
    j["model"] = cfg.fit.model;

    if (cfg.fit.model == "empty") {
        const auto cd = table.column({"delta_mhz", "delta"});
        const auto ct = table.column({"t_f"});
        if (!cd || !ct) throw ContractError("empty-cavity fit needs columns delta_mhz (or delta) and t_f");
        SpectrumTrace tr;
        tr.delta = table.values(*cd);
        tr.t_f = table.values(*ct);
        if (const auto cs = table.column({"sigma", "t_f_err"})) tr.sigma = table.values(*cs);
        EmptyCavityOptions opt;
        opt.allow_pin_h = cfg.fit.allow_pin_h;
        const FitResult r = fit_empty_cavity(tr, opt);
        j["params"] = fit_params(r);
        j["kappa"] = r.value("kappa_i") + r.value("kappa_ex");
        j["critical_gate"] = critical_gate(tr);
        j["residual_norm"] = r.residual_norm;
        j["iterations"] = r.iterations;
        j["flags"] = r.flags;
        return {{"fit.json", dump(j)}};
    }

    const auto cd = table.column({"delta_AC"});
    const auto cv = table.column({"value"});
    if (!cd || !cv) throw ContractError("width fit needs columns delta_AC and value");
    if (table.column({"g0m"}) || table.column({"threshold"})) {
        const auto cg = table.column({"g0m"}), ct = table.column({"threshold"});
        for (const auto& r : table.rows)
            if ((cg && r[*cg] != table.rows.front()[*cg]) || (ct && r[*ct] != table.rows.front()[*ct]))
                throw ContractError("width fit input holds several curves; extract one g0m and threshold first");
    }
    DetuningCurve curve;
    curve.delta_AC = table.values(*cd);
    curve.value = table.values(*cv);
    std::vector<std::string> flags;
    if (const auto cs = table.column({"sigma", "value_err"})) {
        const auto s = table.values(*cs);
        if (std::all_of(s.begin(), s.end(), [](double x) { return x > 0.0; })) curve.sigma = s;
        else flags.push_back("sigma_ignored");
    }
    WidthFitOptions opt;
    opt.fixed_center = cfg.fit.fixed_center;
    const WidthFit w = fit_detuning_width(curve, opt);
    j["params"] = fit_params(w.fit);
    j["beta"] = w.beta;
    j["beta_err"] = w.beta_err;
    j["residual_norm"] = w.fit.residual_norm;
    j["iterations"] = w.fit.iterations;
    try {
        const CouplingFromWidth g = invert_width(w.fit.value("center"), w.fit.value("width"), cfg.system.kappa(),
                                                 cfg.system.h, cfg.system.gamma);
        j["fixed_position"] = {{"g_tw_abs", g.g_tw_abs}, {"re_g2", g.re_g2}, {"g0", g.g0}};
    } catch (const DegenerateParameters&) {
        j["fixed_position"] = nullptr;
        flags.push_back("width_below_gamma");
    }
    if (cfg.fit.calibrate) {
        std::vector<double> grid;
        for (double g = cfg.fit.calibration_lo; g <= cfg.fit.calibration_hi + 1e-9; g += cfg.fit.calibration_step)
            grid.push_back(g);
        std::vector<double> det = curve.delta_AC;
        std::sort(det.begin(), det.end());
        const CalibrationTable table_cal = build_calibration(det, grid, cfg.system, cfg.geometry, cfg.cloud,
                                                             cfg.detection.bin_dt_us, opt);
        j["g0m"] = table_cal.invert(w.beta);
    }
    j["flags"] = flags;
    return {{"fit.json", dump(j)}};
}

}  // namespace toroidqed
