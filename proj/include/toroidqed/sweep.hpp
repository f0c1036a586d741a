// sweep.hpp — event rate and averaged transmission versus atom–cavity detuning.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "toroidqed/core_model.hpp"
#include "toroidqed/errors.hpp"
#include "toroidqed/geometry.hpp"
#include "toroidqed/parallel.hpp"
#include "toroidqed/rng.hpp"
#include "toroidqed/transit.hpp"

namespace toroidqed {

inline constexpr double kMaxSweepDetuning = 200.0;

// Geometry whose coupling at ρ = rho_min equals g0m.
inline ModeGeometry geometry_for_g0m(ModeGeometry geom, double g0m, double rho_min_nm) {
    require(g0m >= 0.0, "g0m must be >= 0");
    geom.g0_surface = ModeGeometry::surface_coupling_for(g0m, rho_min_nm, geom.lambda_nm);
    return geom;
}

enum class Averaging { x_only, x_rho_t };

inline Averaging parse_averaging(std::string_view s) {
    if (s == "x-only") return Averaging::x_only;
    if (s == "x-rho-t") return Averaging::x_rho_t;
    throw ConfigError("unknown averaging mode '" + std::string(s) + "' (expected x-only or x-rho-t)");
}

inline std::string to_string(Averaging a) { return a == Averaging::x_only ? "x-only" : "x-rho-t"; }

struct TheoryGrid {
    int x_points{48};
    int rho_points{40};
    int t_points{16};
};

struct CurvePoint {
    double delta_AC{0.0};
    double value{0.0};
};

// Averaged on-resonance T_F(Δ_AC) from the closed form. x-only: atom at ρ = rho_min,
// z = 0, averaged over one period of x. x-rho-t: additionally ρ uniform over the
// interaction shell and t over one detection bin centered on the crossing.
inline std::vector<CurvePoint> theory_sweep(const std::vector<double>& detunings, double g0m,
                                            Averaging averaging, const SystemParams& cavity,
                                            const ModeGeometry& geometry = {}, const CloudParams& cloud = {},
                                            double bin_dt_us = 2.0, TheoryGrid grid = {}) {
    require(!detunings.empty(), "theory_sweep: empty detuning list");
    require(grid.x_points >= 4 && grid.rho_points >= 2 && grid.t_points >= 1, "theory_sweep: grid too coarse");
    const ModeGeometry geom = geometry_for_g0m(geometry, g0m, cloud.rho_min_nm);
    const double ki = cavity.kappa_i, kex = cavity.kappa_ex, h = cavity.h, gamma = cavity.gamma;

    // sample positions are independent of Δ_AC
    std::vector<cplx> couplings;
    const double period_nm = geom.lambda_nm;  // cos(kx), sin(kx) repeat after λ
    const double rho_hi = cloud.rho_min_nm + cloud.shell_depth * geom.alpha_inv_nm();
    const double v = cloud.fall_velocity();
    for (int ix = 0; ix < grid.x_points; ++ix) {
        const double x = period_nm * (ix + 0.5) / grid.x_points;
        if (averaging == Averaging::x_only) {
            couplings.push_back(coupling_at(geom, {cloud.rho_min_nm, x, 0.0}).g_tw);
            continue;
        }
        for (int ir = 0; ir < grid.rho_points; ++ir) {
            const double rho = cloud.rho_min_nm + (rho_hi - cloud.rho_min_nm) * (ir + 0.5) / grid.rho_points;
            for (int it = 0; it < grid.t_points; ++it) {
                const double t_us = bin_dt_us * ((it + 0.5) / grid.t_points - 0.5);
                couplings.push_back(coupling_at(geom, {rho, x, v * t_us * 1e3}).g_tw);
            }
        }
    }

    std::vector<CurvePoint> out;
    out.reserve(detunings.size());
    for (double d : detunings) {
        double acc = 0.0;
        for (const cplx& g : couplings) acc += on_resonance_transmission(g, h, ki, kex, gamma, d);
        out.push_back({d, acc / static_cast<double>(couplings.size())});
    }
    return out;
}

// First Δ_AC above the curve maximum where the curve falls to half of it
// (linear interpolation). Empty when it never does within the grid.
inline std::optional<double> half_max_crossing(const std::vector<CurvePoint>& curve) {
    require(!curve.empty(), "half_max_crossing: empty curve");
    auto top = std::max_element(curve.begin(), curve.end(),
                                [](const CurvePoint& a, const CurvePoint& b) { return a.value < b.value; });
    const double half = 0.5 * top->value;
    for (auto it = top; it + 1 != curve.end(); ++it) {
        const auto next = it + 1;
        if (next->value <= half) {
            const double f = (it->value - half) / (it->value - next->value);
            return it->delta_AC + f * (next->delta_AC - it->delta_AC);
        }
    }
    return std::nullopt;
}

struct SweepConfig {
    DropConfig drop;  // system, geometry, cloud, detection; Δ_AC is set per point
    std::vector<double> detunings{0.0, 10.0, 20.0, 30.0, 40.0, 50.0, 60.0};
    std::vector<int> thresholds{6};
    std::size_t drops{100};
    bool subtract_baseline{true};  // no-atom control cycles with the same drop count
    bool normalize{true};          // scale to the Δ_AC = 0 point
    unsigned jobs{1};

    void validate() const {
        drop.validate();
        require(!detunings.empty(), "detuning_sweep: empty detuning list");
        require(drops > 0, "detuning_sweep: zero drops");
        require(!thresholds.empty(), "detuning_sweep: no thresholds");
        for (double d : detunings)
            require(std::abs(d) <= kMaxSweepDetuning, "detuning_sweep: detunings must lie within ±200 MHz");
        for (int c : thresholds) require(c >= 1, "detuning_sweep: thresholds must be >= 1");
        if (normalize)
            require(std::find(detunings.begin(), detunings.end(), 0.0) != detunings.end(),
                    "detuning_sweep: normalization needs a Δ_AC = 0 point");
    }
};

// Events per drop, indexed [threshold][point][drop]; baseline is [threshold][drop].
struct SweepRaw {
    std::vector<std::vector<std::vector<double>>> events;
    std::vector<std::vector<double>> baseline;
};

struct SweepCurve {
    int threshold{6};
    std::vector<double> detunings;
    std::vector<double> mean;       // events per drop, raw
    std::vector<double> mean_err;
    double baseline{0.0};
    double baseline_err{0.0};
    std::vector<double> value;      // baseline-subtracted and optionally normalized
    std::vector<double> value_err;

    std::vector<CurvePoint> points() const {
        std::vector<CurvePoint> out;
        for (std::size_t i = 0; i < detunings.size(); ++i) out.push_back({detunings[i], value[i]});
        return out;
    }
};

struct SweepResult {
    std::vector<SweepCurve> curves;  // one per threshold
    SweepRaw raw;
    std::size_t drops{0};
};

namespace detail {

inline double mean(const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x;
    return s / static_cast<double>(v.size());
}

inline double standard_error(const std::vector<double>& v) {
    if (v.size() < 2) return std::numeric_limits<double>::quiet_NaN();
    const double m = mean(v);
    double s = 0.0;
    for (double x : v) s += (x - m) * (x - m);
    return std::sqrt(s / static_cast<double>(v.size() - 1) / static_cast<double>(v.size()));
}

// A single drop has no spread estimate; fall back to the Poisson error of its count.
inline double event_error(const std::vector<double>& v) {
    if (v.size() >= 2) return standard_error(v);
    return std::sqrt(std::max(v[0], 1.0));
}

}  // namespace detail

// Curves from per-drop event counts, optionally restricted to a resample of drop indices.
inline SweepCurve build_curve(const SweepRaw& raw, std::size_t threshold_index, int threshold,
                              const std::vector<double>& detunings, bool subtract_baseline, bool normalize,
                              const std::vector<std::size_t>* resample = nullptr) {
    auto pick = [&](const std::vector<double>& v) {
        if (!resample) return v;
        std::vector<double> out;
        out.reserve(resample->size());
        for (std::size_t i : *resample) out.push_back(v[i]);
        return out;
    };
    SweepCurve c;
    c.threshold = threshold;
    c.detunings = detunings;
    const auto& pts = raw.events[threshold_index];
    std::vector<std::vector<double>> per_point;
    for (const auto& v : pts) per_point.push_back(pick(v));
    std::vector<double> base;
    if (subtract_baseline) {
        base = pick(raw.baseline[threshold_index]);
        c.baseline = detail::mean(base);
        c.baseline_err = detail::event_error(base);
    }
    for (const auto& v : per_point) {
        c.mean.push_back(detail::mean(v));
        c.mean_err.push_back(detail::event_error(v));
    }
    const std::size_t n_drops = per_point.front().size();
    std::size_t zero = 0;
    if (normalize) zero = static_cast<std::size_t>(std::find(detunings.begin(), detunings.end(), 0.0) - detunings.begin());
    const double ref = normalize ? c.mean[zero] - c.baseline : 1.0;
    for (std::size_t i = 0; i < per_point.size(); ++i) {
        const double num = c.mean[i] - c.baseline;
        if (!normalize) {
            c.value.push_back(num);
            c.value_err.push_back(std::hypot(c.mean_err[i], c.baseline_err));
            continue;
        }
        if (ref <= 0.0) throw NumericalFailure("detuning_sweep: no excess events at Δ_AC = 0, cannot normalize");
        const double r = num / ref;
        c.value.push_back(r);
        if (n_drops < 2) {
            c.value_err.push_back(std::hypot(c.mean_err[i], c.baseline_err) / ref);
            continue;
        }
        // delta method with per-drop pairing: the same trajectories feed every point
        std::vector<double> u(n_drops);
        for (std::size_t d = 0; d < n_drops; ++d) u[d] = (per_point[i][d] - r * per_point[zero][d]) / ref;
        double var = std::pow(detail::standard_error(u), 2);
        if (subtract_baseline) var += std::pow((1.0 - r) * c.baseline_err / ref, 2);
        c.value_err.push_back(std::sqrt(var));
    }
    return c;
}

// Monte Carlo N_drop(C >= c0) versus Δ_AC. Every detuning sees the same atom
// trajectories (drop index d); detection noise is drawn per point.
inline SweepResult detuning_sweep(const SweepConfig& cfg, std::uint64_t seed) {
    cfg.validate();
    const std::size_t n_pts = cfg.detunings.size(), n_thr = cfg.thresholds.size(), n_drops = cfg.drops;
    SweepResult res;
    res.drops = n_drops;
    res.raw.events.assign(n_thr, std::vector<std::vector<double>>(n_pts, std::vector<double>(n_drops, 0.0)));
    res.raw.baseline.assign(n_thr, std::vector<double>(n_drops, 0.0));

    auto count_events = [&](const CountTimeSeries& s, std::size_t t) {
        return static_cast<double>(threshold_events(s, cfg.thresholds[t]).size());
    };

    // work unit = one drop index, all detunings
    parallel_for(n_drops, cfg.jobs, [&](std::size_t d) {
        for (std::size_t i = 0; i < n_pts; ++i) {
            DropConfig dc = cfg.drop;
            dc.system = dc.system.at_cavity(cfg.detunings[i]);
            dc.atoms = true;
            const DropResult r = simulate_drop(dc, seed, d, i + 1);
            for (std::size_t t = 0; t < n_thr; ++t) res.raw.events[t][i][d] = count_events(r.series, t);
        }
        if (cfg.subtract_baseline) {
            DropConfig dc = cfg.drop;
            dc.atoms = false;
            const DropResult r = simulate_drop(dc, seed, d, 0);
            for (std::size_t t = 0; t < n_thr; ++t) res.raw.baseline[t][d] = count_events(r.series, t);
        }
    });

    for (std::size_t t = 0; t < n_thr; ++t)
        res.curves.push_back(
            build_curve(res.raw, t, cfg.thresholds[t], cfg.detunings, cfg.subtract_baseline, cfg.normalize));
    return res;
}

struct HalfWidthEstimate {
    double value{std::numeric_limits<double>::quiet_NaN()};
    double error{std::numeric_limits<double>::quiet_NaN()};
    std::size_t unresolved{0};  // bootstrap replicas without a crossing
};

// Half-max crossing of a sweep curve with a bootstrap-over-drops error.
inline HalfWidthEstimate sweep_half_width(const SweepResult& res, const SweepConfig& cfg, std::size_t threshold_index,
                                          std::size_t replicas = 200, std::uint64_t seed = 1) {
    HalfWidthEstimate out;
    const SweepCurve& c = res.curves.at(threshold_index);
    const auto w = half_max_crossing(c.points());
    if (!w) return out;
    out.value = *w;
    Rng rng = make_stream(seed, 0x5eed, threshold_index);
    std::uniform_int_distribution<std::size_t> pick(0, res.drops - 1);
    std::vector<double> samples;
    std::vector<std::size_t> idx(res.drops);
    for (std::size_t b = 0; b < replicas; ++b) {
        for (auto& i : idx) i = pick(rng);
        try {
            const SweepCurve r = build_curve(res.raw, threshold_index, c.threshold, cfg.detunings,
                                             cfg.subtract_baseline, cfg.normalize, &idx);
            if (auto x = half_max_crossing(r.points())) samples.push_back(*x);
            else ++out.unresolved;
        } catch (const NumericalFailure&) {
            ++out.unresolved;
        }
    }
    if (samples.size() >= 2) {
        const double m = detail::mean(samples);
        double s = 0.0;
        for (double x : samples) s += (x - m) * (x - m);
        out.error = std::sqrt(s / static_cast<double>(samples.size() - 1));
    }
    return out;
}

struct WidthOrdering {
    std::vector<double> widths;        // per sweep
    std::vector<double> difference;    // widths[i+1] - widths[i]
    std::vector<double> difference_err;
    bool resolved{true};

    // smallest step over its error; +inf when errors vanish
    double min_significance() const {
        double z = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < difference.size(); ++i)
            z = std::min(z, difference_err[i] > 0.0 ? difference[i] / difference_err[i]
                                                     : (difference[i] > 0.0 ? z : -z));
        return z;
    }
};

// Half-width steps between sweeps run with the same seed and drop count. The
// sweeps share trajectories drop by drop, so the bootstrap resamples drop
// indices jointly and the step errors keep that pairing.
inline WidthOrdering half_width_ordering(const std::vector<const SweepResult*>& sweeps, const SweepConfig& cfg,
                                         std::size_t threshold_index, std::size_t replicas = 400,
                                         std::uint64_t seed = 1) {
    require(sweeps.size() >= 2, "half_width_ordering: need at least two sweeps");
    const std::size_t n = sweeps.front()->drops;
    for (const auto* s : sweeps) require(s->drops == n, "half_width_ordering: sweeps differ in drop count");
    WidthOrdering out;
    for (const auto* s : sweeps) {
        const auto w = half_max_crossing(s->curves.at(threshold_index).points());
        out.widths.push_back(w ? *w : std::numeric_limits<double>::quiet_NaN());
        if (!w) out.resolved = false;
    }
    for (std::size_t i = 0; i + 1 < sweeps.size(); ++i) out.difference.push_back(out.widths[i + 1] - out.widths[i]);

    Rng rng = make_stream(seed, 0x5eed, 1000 + threshold_index);
    std::uniform_int_distribution<std::size_t> pick(0, n - 1);
    std::vector<std::size_t> idx(n);
    std::vector<std::vector<double>> diffs(sweeps.size() - 1);
    for (std::size_t b = 0; b < replicas; ++b) {
        for (auto& i : idx) i = pick(rng);
        std::vector<double> w;
        try {
            for (const auto* s : sweeps) {
                const SweepCurve& c = s->curves.at(threshold_index);
                const auto x = half_max_crossing(build_curve(s->raw, threshold_index, c.threshold, cfg.detunings,
                                                             cfg.subtract_baseline, cfg.normalize, &idx)
                                                     .points());
                if (!x) break;
                w.push_back(*x);
            }
        } catch (const NumericalFailure&) {
        }
        if (w.size() != sweeps.size()) {
            out.resolved = false;
            continue;
        }
        for (std::size_t i = 0; i + 1 < w.size(); ++i) diffs[i].push_back(w[i + 1] - w[i]);
    }
    for (const auto& d : diffs) {
        if (d.size() < 2) {
            out.difference_err.push_back(std::numeric_limits<double>::quiet_NaN());
            out.resolved = false;
            continue;
        }
        const double m = detail::mean(d);
        double s = 0.0;
        for (double x : d) s += (x - m) * (x - m);
        out.difference_err.push_back(std::sqrt(s / static_cast<double>(d.size() - 1)));
    }
    return out;
}

}  // namespace toroidqed
