// transit.hpp — Monte Carlo of single atoms falling through the evanescent
// field: trajectories, bin-averaged transmission, two-detector photon
// counting, thresholded transit events, P(C) histograms and Γ(τ).
//
// Units: trajectory times in ms, count series in µs, distances in nm,
// velocities in m/s, rates in MHz.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <numbers>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "toroidqed/core_model.hpp"
#include "toroidqed/errors.hpp"
#include "toroidqed/geometry.hpp"
#include "toroidqed/rng.hpp"

namespace toroidqed {

namespace constants {
inline constexpr double gravity = 9.81;                                    // m/s²
inline constexpr double boltzmann = 1.380649e-23;                          // J/K
inline constexpr double cesium_mass = 132.905451931 * 1.66053906660e-27;  // kg
}  // namespace constants

struct CloudParams {
    double drop_height_mm{10.0};
    double cloud_fwhm_mm{3.0};
    double temperature_uK{10.0};
    double mean_transits_per_drop{30.0};
    double atom_count{2e6};  // documentation only
    double rho_min_nm{45.0};      // van der Waals cutoff
    double shell_inner_nm{45.0};  // inner edge of the sampled shell
    double shell_depth{5.0};      // outer edge = rho_min + shell_depth·ƛ

    void validate() const {
        require(drop_height_mm > 0.0 && cloud_fwhm_mm > 0.0 && temperature_uK > 0.0 && atom_count > 0.0,
                "CloudParams: drop height, cloud size, temperature and atom count must be positive");
        require(mean_transits_per_drop >= 0.0, "CloudParams: mean transits must be >= 0");
        require(rho_min_nm >= 0.0 && shell_inner_nm >= 0.0 && shell_depth > 0.0,
                "CloudParams: invalid interaction shell");
    }

    double fall_time_ms() const { return 1e3 * std::sqrt(2.0 * drop_height_mm * 1e-3 / constants::gravity); }
    double fall_velocity() const { return std::sqrt(2.0 * constants::gravity * drop_height_mm * 1e-3); }
};

struct AtomTrajectory {
    double rho_nm{0.0};
    double x_nm{0.0};
    double velocity{0.0};  // m/s, downward
    double t0_ms{0.0};     // crossing of the mode center z = 0
    bool valid{true};

    // 1 m/s · 1 µs = 1000 nm
    double z_nm(double t_us) const { return velocity * (t_us - 1e3 * t0_ms) * 1e3; }
    AtomPosition position(double t_us) const { return {rho_nm, x_nm, z_nm(t_us)}; }
};

// Draws the transits of one drop. Invalid (vdW-captured) trajectories are kept
// only when keep_invalid is set.
inline std::vector<AtomTrajectory> sample_drop(const CloudParams& cloud, const ModeGeometry& geom, Rng& rng,
                                               bool keep_invalid = false) {
    cloud.validate();
    geom.validate();
    std::vector<AtomTrajectory> out;
    if (cloud.mean_transits_per_drop == 0.0) return out;

    std::poisson_distribution<int> count(cloud.mean_transits_per_drop);
    const int n = count(rng);
    const double sigma_z = cloud.cloud_fwhm_mm * 1e-3 / (2.0 * std::sqrt(2.0 * std::log(2.0)));
    const double sigma_v = std::sqrt(constants::boltzmann * cloud.temperature_uK * 1e-6 / constants::cesium_mass);
    std::normal_distribution<double> dz(0.0, sigma_z), dv(0.0, sigma_v);
    const double rho_hi = cloud.rho_min_nm + cloud.shell_depth * geom.alpha_inv_nm();
    std::uniform_real_distribution<double> rho(std::min(cloud.shell_inner_nm, rho_hi), rho_hi);
    std::uniform_real_distribution<double> x(0.0, geom.circumference_nm());
    const VdwCutoff cut{cloud.rho_min_nm};

    out.reserve(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        const double height = std::max(cloud.drop_height_mm * 1e-3 + dz(rng), 1e-6);
        const double v0 = dv(rng);  // downward positive
        const double g = constants::gravity;
        const double t = (-v0 + std::sqrt(v0 * v0 + 2.0 * g * height)) / g;
        AtomTrajectory tr;
        tr.t0_ms = 1e3 * t;
        tr.velocity = v0 + g * t;
        tr.rho_nm = rho(rng);
        tr.x_nm = x(rng);
        tr.valid = cut.valid(tr.rho_nm);
        if (tr.valid || keep_invalid) out.push_back(tr);
    }
    return out;
}

inline std::vector<AtomTrajectory> sample_drop(const CloudParams& cloud, const ModeGeometry& geom,
                                               std::uint64_t seed) {
    Rng rng = make_stream(seed, stream_tag::trajectories, 0);
    return sample_drop(cloud, geom, rng);
}

struct BinGrid {
    double origin_us{0.0};
    double dt_us{2.0};
    std::size_t n_bins{0};

    double start(std::size_t i) const { return origin_us + dt_us * static_cast<double>(i); }
    double center(std::size_t i) const { return start(i) + 0.5 * dt_us; }
};

struct BinTransmission {
    std::size_t bin{0};
    double t_us{0.0};  // bin center
    double t_f{0.0};   // average over the bin
};

using TransmissionModel = std::function<double(const SystemParams&)>;

// Vertical extent (in units of w_z) beyond which a transit is not evaluated.
inline constexpr double kTransitExtent = 6.0;

// Bin-averaged T_F along a trajectory with the probe on the cavity (Δ = 0).
// `params` carries Δ_AC, the cavity rates and γ; g_tw is replaced per sample.
inline std::vector<BinTransmission> transit_transmission(const AtomTrajectory& traj, const ModeGeometry& geom,
                                                         const SystemParams& params, const BinGrid& grid,
                                                         int sub_samples = 16,
                                                         const TransmissionModel& model = {}) {
    require(traj.valid && traj.velocity > 0.0 && traj.rho_nm >= 0.0, "transit_transmission: invalid trajectory");
    require(params.delta == 0.0, "transit_transmission: probe must be on the cavity resonance (delta = 0)");
    require(sub_samples >= 8, "transit_transmission: need at least 8 sub-samples per bin");
    require(grid.dt_us > 0.0, "transit_transmission: bin width must be positive");

    const double half_span_us = kTransitExtent * geom.w_z_um * 1e3 / (traj.velocity * 1e3);
    const double t_center = 1e3 * traj.t0_ms;
    const double lo = (t_center - half_span_us - grid.origin_us) / grid.dt_us;
    const double hi = (t_center + half_span_us - grid.origin_us) / grid.dt_us;
    std::vector<BinTransmission> out;
    if (hi < 0.0 || lo >= static_cast<double>(grid.n_bins)) return out;
    const std::size_t first = static_cast<std::size_t>(std::max(0.0, std::floor(lo)));
    const std::size_t last = std::min(grid.n_bins - 1, static_cast<std::size_t>(std::floor(hi)));

    SystemParams p = params;
    for (std::size_t b = first; b <= last; ++b) {
        double acc = 0.0;
        for (int s = 0; s < sub_samples; ++s) {
            const double t = grid.start(b) + grid.dt_us * (s + 0.5) / sub_samples;
            p.g_tw = coupling_at(geom, traj.position(t)).g_tw;
            acc += model ? model(p) : forward_transmission(p);
        }
        out.push_back({b, grid.center(b), acc / sub_samples});
    }
    return out;
}

enum class DeadTimeModel { non_paralyzable, paralyzable };

struct DetectionChain {
    double xi{0.70};              // taper-to-detector propagation efficiency
    double qe{0.5};               // detector quantum efficiency
    double dark_rate{50.0};       // counts/s per detector
    double dead_time_ns{50.0};
    double splitter{0.5};         // fraction sent to detector 1
    double bin_dt_us{2.0};
    double c_max{30.0};           // mean combined counts per bin far off resonance
    double background_mean{0.25}; // mean combined counts per bin at critical coupling
    DeadTimeModel dead_time_model{DeadTimeModel::non_paralyzable};
    double drift_rms{0.0};        // relative background drift, off by default
    double drift_corr_ms{1.0};

    void validate() const {
        require(xi >= 0.0 && xi <= 1.0 && qe >= 0.0 && qe <= 1.0, "DetectionChain: efficiencies must lie in [0,1]");
        require(splitter >= 0.0 && splitter <= 1.0, "DetectionChain: splitter must lie in [0,1]");
        require(bin_dt_us > 0.0, "DetectionChain: bin width must be positive");
        require(c_max > background_mean && background_mean >= 0.0,
                "DetectionChain: need c_max > background_mean >= 0");
        require(dark_rate >= 0.0 && dead_time_ns >= 0.0, "DetectionChain: dark rate and dead time must be >= 0");
        require(drift_rms >= 0.0 && drift_corr_ms > 0.0, "DetectionChain: invalid drift model");
    }

    // Registered mean combined counts in a bin of mean transmission t_f.
    double expected_counts(double t_f) const { return background_mean + t_f * (c_max - background_mean); }
};

// Mean counts per bin far off resonance implied by an intracavity photon
// number n0 (forward mode, empty cavity on resonance at critical coupling).
// Photon flux needs angular rates: |a_in|² = 2π|ε|²/(2κ_ex) photons/µs with ε, κ_ex in MHz.
inline double flux_counts_per_bin(const DetectionChain& chain, SystemParams empty_cavity, double n0) {
    empty_cavity.g_tw = 0.0;
    const double eps = calibrate_drive(empty_cavity.at_cavity(empty_cavity.delta_AC()), n0);
    const double flux_per_us = 2.0 * std::numbers::pi * eps * eps / (2.0 * empty_cavity.kappa_ex);
    return flux_per_us * chain.bin_dt_us * chain.xi * chain.qe;
}

inline constexpr double kCmaxConsistencyTolerance = 0.30;

inline bool c_max_consistent(const DetectionChain& chain, const SystemParams& empty_cavity, double n0) {
    const double predicted = flux_counts_per_bin(chain, empty_cavity, n0);
    return std::abs(predicted / chain.c_max - 1.0) <= kCmaxConsistencyTolerance;
}

namespace detail {

// Incident mean per bin that yields `registered` counts after dead time.
inline double incident_for_registered(double registered, double dt_us, double tau_us, DeadTimeModel model) {
    if (tau_us == 0.0 || registered == 0.0) return registered;
    const double r = registered / dt_us;
    if (model == DeadTimeModel::non_paralyzable) {
        require(r * tau_us < 1.0, "detect: registered rate exceeds the dead-time limit");
        return r / (1.0 - r * tau_us) * dt_us;
    }
    require(r * tau_us < std::exp(-1.0), "detect: registered rate exceeds the paralyzable maximum");
    double lo = r, hi = 1.0 / tau_us;  // λ e^{−λτ} increasing on [0, 1/τ]
    for (int i = 0; i < 100; ++i) {
        const double mid = 0.5 * (lo + hi);
        if (mid * std::exp(-mid * tau_us) < r) lo = mid; else hi = mid;
    }
    return 0.5 * (lo + hi) * dt_us;
}

struct DeadTimeState {
    double last_accept{-std::numeric_limits<double>::infinity()};
    double last_arrival{-std::numeric_limits<double>::infinity()};
};

inline int apply_dead_time(int n, double t_start, double dt, double tau, DeadTimeModel model, DeadTimeState& st,
                           Rng& rng, std::vector<double>& scratch) {
    if (n == 0) return 0;
    if (tau == 0.0) return n;
    std::uniform_real_distribution<double> u(t_start, t_start + dt);
    scratch.resize(static_cast<std::size_t>(n));
    for (auto& t : scratch) t = u(rng);
    std::sort(scratch.begin(), scratch.end());
    int kept = 0;
    for (double t : scratch) {
        if (model == DeadTimeModel::non_paralyzable) {
            if (t - st.last_accept >= tau) {
                st.last_accept = t;
                ++kept;
            }
        } else {
            if (t - st.last_arrival >= tau) ++kept;
            st.last_arrival = t;
        }
    }
    return kept;
}

}  // namespace detail

struct CountTimeSeries {
    std::vector<int> det1;
    std::vector<int> det2;
    double bin_dt_us{2.0};
    double origin_us{0.0};
    std::uint64_t seed{0};

    std::size_t size() const { return det1.size(); }
    int combined(std::size_t i) const { return det1[i] + det2[i]; }
    double time_us(std::size_t i) const { return origin_us + bin_dt_us * (static_cast<double>(i) + 0.5); }
};

// Per-bin counts for a series of bin-averaged transmissions.
inline CountTimeSeries detect(const std::vector<double>& t_f, const DetectionChain& chain, Rng& rng,
                              double origin_us = 0.0) {
    chain.validate();
    CountTimeSeries out;
    out.bin_dt_us = chain.bin_dt_us;
    out.origin_us = origin_us;
    out.det1.resize(t_f.size());
    out.det2.resize(t_f.size());

    const double dt = chain.bin_dt_us;
    const double tau = chain.dead_time_ns * 1e-3;
    const double dark = chain.dark_rate * 1e-6 * dt;
    const double s1 = chain.splitter, s2 = 1.0 - chain.splitter;
    const double rho = std::exp(-dt / (chain.drift_corr_ms * 1e3));
    std::normal_distribution<double> gauss(0.0, 1.0);
    double drift = chain.drift_rms > 0.0 ? gauss(rng) : 0.0;

    detail::DeadTimeState st1, st2;
    std::vector<double> scratch;
    for (std::size_t i = 0; i < t_f.size(); ++i) {
        double bg = chain.background_mean;
        if (chain.drift_rms > 0.0) {
            drift = rho * drift + std::sqrt(1.0 - rho * rho) * gauss(rng);
            bg *= std::max(0.0, 1.0 + chain.drift_rms * drift);
        }
        const double mu = bg + std::max(0.0, t_f[i]) * (chain.c_max - chain.background_mean);
        const double m1 = s1 * mu + dark, m2 = s2 * mu + dark;
        const double l1 = detail::incident_for_registered(m1, dt, tau, chain.dead_time_model);
        const double l2 = detail::incident_for_registered(m2, dt, tau, chain.dead_time_model);
        // split incident rates between signal and dark in proportion to the registered targets
        const double sig1 = m1 > 0.0 ? l1 * s1 * mu / m1 : 0.0;
        const double sig2 = m2 > 0.0 ? l2 * s2 * mu / m2 : 0.0;
        const double dark1 = l1 - sig1, dark2 = l2 - sig2;

        int n1 = 0, n2 = 0;
        const double total = sig1 + sig2;
        if (total > 0.0) {
            const int n = std::poisson_distribution<int>(total)(rng);
            if (n > 0) {
                n1 = std::binomial_distribution<int>(n, sig1 / total)(rng);
                n2 = n - n1;
            }
        }
        if (dark1 > 0.0) n1 += std::poisson_distribution<int>(dark1)(rng);
        if (dark2 > 0.0) n2 += std::poisson_distribution<int>(dark2)(rng);
        const double t0 = origin_us + dt * static_cast<double>(i);
        out.det1[i] = detail::apply_dead_time(n1, t0, dt, tau, chain.dead_time_model, st1, rng, scratch);
        out.det2[i] = detail::apply_dead_time(n2, t0, dt, tau, chain.dead_time_model, st2, rng, scratch);
    }
    return out;
}

inline CountTimeSeries detect(const std::vector<double>& t_f, const DetectionChain& chain, std::uint64_t seed,
                              double origin_us = 0.0) {
    Rng rng = make_stream(seed, stream_tag::detection, 0);
    CountTimeSeries s = detect(t_f, chain, rng, origin_us);
    s.seed = seed;
    return s;
}

struct TransitEvent {
    std::size_t first_bin{0};
    std::size_t last_bin{0};
    int peak_counts{0};
    int total_counts{0};
};

// Bins with combined counts >= c0; adjacent bins merge into one event.
inline std::vector<TransitEvent> threshold_events(const CountTimeSeries& series, int c0) {
    require(c0 >= 1, "threshold_events: c0 must be >= 1");
    std::vector<TransitEvent> out;
    for (std::size_t i = 0; i < series.size(); ++i) {
        const int c = series.combined(i);
        if (c < c0) continue;
        if (!out.empty() && out.back().last_bin + 1 == i) {
            out.back().last_bin = i;
            out.back().peak_counts = std::max(out.back().peak_counts, c);
            out.back().total_counts += c;
        } else {
            out.push_back({i, i, c, c});
        }
    }
    return out;
}

struct BinWindow {
    std::size_t first{0};
    std::size_t last{0};  // exclusive
};

inline double poisson_pmf(int k, double mean) {
    if (mean == 0.0) return k == 0 ? 1.0 : 0.0;
    return std::exp(k * std::log(mean) - mean - std::lgamma(k + 1.0));
}

// Distribution of combined counts per bin, accumulated over any number of series.
class CountHistogram {
public:
    void add(const CountTimeSeries& series, BinWindow w) {
        require(w.first < w.last && w.last <= series.size(), "count_histogram: empty or out-of-range window");
        for (std::size_t i = w.first; i < w.last; ++i) {
            const auto c = static_cast<std::size_t>(series.combined(i));
            if (c >= counts_.size()) counts_.resize(c + 1, 0);
            ++counts_[c];
            total_counts_ += static_cast<double>(c);
            ++n_bins_;
        }
    }
    void add(const CountTimeSeries& series) { add(series, {0, series.size()}); }

    std::uint64_t n_bins() const { return n_bins_; }
    const std::vector<std::uint64_t>& counts() const { return counts_; }
    double mean() const { return n_bins_ ? total_counts_ / static_cast<double>(n_bins_) : 0.0; }

    double probability(std::size_t c) const {
        require(n_bins_ > 0, "count_histogram: empty window");
        return c < counts_.size() ? static_cast<double>(counts_[c]) / static_cast<double>(n_bins_) : 0.0;
    }
    // Binomial (multinomial marginal) standard error of probability(c).
    double probability_error(std::size_t c) const {
        const double p = probability(c);
        return std::sqrt(p * (1.0 - p) / static_cast<double>(n_bins_));
    }
    double poisson(std::size_t c) const { return poisson_pmf(static_cast<int>(c), mean()); }

    double tail_probability(std::size_t c_min) const {
        double acc = 0.0;
        for (std::size_t c = c_min; c < counts_.size(); ++c) acc += static_cast<double>(counts_[c]);
        return acc / static_cast<double>(n_bins_);
    }
    double poisson_tail(std::size_t c_min) const {
        double below = 0.0;
        for (std::size_t c = 0; c < c_min; ++c) below += poisson(c);
        return std::max(0.0, 1.0 - below);
    }

private:
    std::vector<std::uint64_t> counts_;
    std::uint64_t n_bins_{0};
    double total_counts_{0.0};
};

inline CountHistogram count_histogram(const CountTimeSeries& series, BinWindow window) {
    CountHistogram h;
    h.add(series, window);
    return h;
}

struct CorrelationPoint {
    double lag_us{0.0};
    double gamma{0.0};
};

// Γ(τ) = ⟨C₁(t) C₂(t+τ)⟩ / (⟨C₁⟩⟨C₂⟩), pooled over any number of series.
class CrossCorrelator {
public:
    explicit CrossCorrelator(int max_lag_bins) : max_lag_(max_lag_bins) {
        require(max_lag_bins >= 0, "cross_correlation: max lag must be >= 0");
        products_.assign(static_cast<std::size_t>(2 * max_lag_ + 1), 0.0);
        pairs_.assign(products_.size(), 0.0);
    }

    void add(const CountTimeSeries& s, BinWindow w) {
        require(w.first < w.last && w.last <= s.size(), "cross_correlation: empty or out-of-range window");
        bin_dt_ = s.bin_dt_us;
        for (std::size_t i = w.first; i < w.last; ++i) {
            sum1_ += s.det1[i];
            sum2_ += s.det2[i];
        }
        n_ += static_cast<double>(w.last - w.first);
        const auto first = static_cast<long>(w.first), last = static_cast<long>(w.last);
        for (int lag = -max_lag_; lag <= max_lag_; ++lag) {
            double acc = 0.0;
            long lo = std::max(first, first - lag), hi = std::min(last, last - lag);
            for (long t = lo; t < hi; ++t)
                acc += static_cast<double>(s.det1[static_cast<std::size_t>(t)]) * s.det2[static_cast<std::size_t>(t + lag)];
            products_[static_cast<std::size_t>(lag + max_lag_)] += acc;
            pairs_[static_cast<std::size_t>(lag + max_lag_)] += static_cast<double>(std::max(0L, hi - lo));
        }
    }
    void add(const CountTimeSeries& s) { add(s, {0, s.size()}); }

    std::vector<CorrelationPoint> result() const {
        require(sum1_ > 0.0 && sum2_ > 0.0, "cross_correlation: a detector stream has zero mean");
        const double m1 = sum1_ / n_, m2 = sum2_ / n_;
        std::vector<CorrelationPoint> out;
        for (int lag = -max_lag_; lag <= max_lag_; ++lag) {
            const auto k = static_cast<std::size_t>(lag + max_lag_);
            out.push_back({lag * bin_dt_, pairs_[k] > 0 ? products_[k] / pairs_[k] / (m1 * m2) : 0.0});
        }
        return out;
    }

private:
    int max_lag_;
    double bin_dt_{2.0};
    double sum1_{0.0}, sum2_{0.0}, n_{0.0};
    std::vector<double> products_, pairs_;
};

inline std::vector<CorrelationPoint> cross_correlation(const CountTimeSeries& series, double max_lag_us) {
    require(max_lag_us >= 0.0, "cross_correlation: max lag must be >= 0");
    CrossCorrelator c(static_cast<int>(std::floor(max_lag_us / series.bin_dt_us + 1e-9)));
    c.add(series);
    return c.result();
}

// One drop of the cloud: trajectories → per-bin T_F → detector counts.
struct DropConfig {
    SystemParams system;  // cavity rates, γ and Δ_AC (probe on the cavity)
    ModeGeometry geometry;
    CloudParams cloud;
    DetectionChain chain;
    double window_ms{10.0};  // recorded window, centered on the mean arrival time
    int sub_samples{16};
    std::optional<double> fixed_rho_nm;  // every atom at this ρ (no radial averaging)
    bool atoms{true};                    // false: no-atom control cycle

    BinGrid grid() const {
        BinGrid g;
        g.dt_us = chain.bin_dt_us;
        g.n_bins = static_cast<std::size_t>(std::llround(window_ms * 1e3 / chain.bin_dt_us));
        g.origin_us = 1e3 * cloud.fall_time_ms() - 0.5 * static_cast<double>(g.n_bins) * g.dt_us;
        return g;
    }

    void validate() const {
        system.validate();
        geometry.validate();
        cloud.validate();
        chain.validate();
        require(window_ms > 0.0, "DropConfig: window must be positive");
        require(sub_samples >= 8, "DropConfig: need at least 8 sub-samples per bin");
    }
};

struct DropResult {
    std::vector<AtomTrajectory> transits;
    std::vector<double> t_f;  // per bin
    CountTimeSeries series;
};

// Bin-averaged T_F for all transits of a drop. Bins touched by several atoms
// keep the largest value.
inline std::vector<double> drop_transmission(const DropConfig& cfg, const std::vector<AtomTrajectory>& transits,
                                             const TransmissionModel& model = {}) {
    const BinGrid grid = cfg.grid();
    SystemParams at_cavity = cfg.system.at_cavity(cfg.system.delta_AC());
    SystemParams empty = at_cavity;
    empty.g_tw = 0.0;
    const double background = model ? model(empty) : forward_transmission(empty);
    std::vector<double> t_f(grid.n_bins, background);
    for (const auto& tr : transits) {
        for (const auto& b : transit_transmission(tr, cfg.geometry, at_cavity, grid, cfg.sub_samples, model))
            t_f[b.bin] = std::max(t_f[b.bin], b.t_f);
    }
    return t_f;
}

inline DropResult simulate_drop(const DropConfig& cfg, std::uint64_t seed, std::uint64_t drop_index,
                                std::uint64_t detection_stream = 0) {
    cfg.validate();
    DropResult r;
    if (cfg.atoms) {
        Rng traj_rng = make_stream(seed, stream_tag::trajectories, drop_index);
        r.transits = sample_drop(cfg.cloud, cfg.geometry, traj_rng);
        if (cfg.fixed_rho_nm)
            for (auto& t : r.transits) t.rho_nm = *cfg.fixed_rho_nm;
    }
    r.t_f = drop_transmission(cfg, r.transits);
    Rng det_rng = make_stream(seed ^ splitmix64(detection_stream), cfg.atoms ? stream_tag::detection : stream_tag::control,
                              drop_index);
    r.series = detect(r.t_f, cfg.chain, det_rng, cfg.grid().origin_us);
    r.series.seed = seed;
    return r;
}

}  // namespace toroidqed
