// Parameter extraction: empty-cavity spectra, detuning-curve widths, and the
// critical-coupling gate.

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "toroidqed/core_model.hpp"
#include "toroidqed/errors.hpp"
#include "toroidqed/levmar.hpp"
#include "toroidqed/sweep.hpp"

namespace toroidqed {

struct SpectrumTrace {
    std::vector<double> delta;  // MHz
    std::vector<double> t_f;
    std::vector<double> sigma;  // optional, same length when present

    void validate() const {
        require(delta.size() >= 8, "trace: need at least 8 points");
        require(t_f.size() == delta.size(), "trace: column lengths differ");
        require(sigma.empty() || sigma.size() == delta.size(), "trace: sigma column length differs");
        for (std::size_t i = 0; i < delta.size(); ++i) {
            require(std::isfinite(delta[i]) && std::isfinite(t_f[i]), "trace: non-finite sample");
            require(t_f[i] >= 0.0, "trace: transmission must be >= 0");
            if (!sigma.empty()) require(sigma[i] > 0.0, "trace: sigma must be positive");
        }
    }
};

struct FitParameter {
    std::string name;
    double value{0.0};
    double error{0.0};
    bool pinned{false};
};

struct FitResult {
    std::vector<FitParameter> params;
    double residual_norm{0.0};
    bool converged{false};
    int iterations{0};
    std::vector<std::string> flags;

    const FitParameter& at(const std::string& name) const {
        for (const auto& p : params)
            if (p.name == name) return p;
        throw ContractError("FitResult: no parameter '" + name + "'");
    }
    double value(const std::string& name) const { return at(name).value; }
    double error(const std::string& name) const { return at(name).error; }
    bool flagged(const std::string& f) const { return std::find(flags.begin(), flags.end(), f) != flags.end(); }
};

// ---- empty cavity --------------------------------------------------------

struct EmptyCavityModel {
    // p = (kappa_i, kappa_ex, h, offset, amplitude)
    static double value(const Eigen::VectorXd& p, double delta) {
        const cplx z(p[0] + p[1], delta - p[3]);
        const cplx f = 1.0 - 2.0 * p[1] * z / (z * z + p[2] * p[2]);
        return p[4] * std::norm(f);
    }

    static Eigen::RowVectorXd gradient(const Eigen::VectorXd& p, double delta) {
        const double kex = p[1], h = p[2];
        const cplx z(p[0] + p[1], delta - p[3]);
        const cplx D = z * z + h * h;
        const cplx f = 1.0 - 2.0 * kex * z / D;
        const cplx df_dz = -2.0 * kex * (h * h - z * z) / (D * D);
        const std::array<cplx, 4> df{df_dz, df_dz - 2.0 * z / D, 4.0 * kex * z * h / (D * D), cplx(0.0, -1.0) * df_dz};
        Eigen::RowVectorXd g(5);
        for (int j = 0; j < 4; ++j) g[j] = p[4] * 2.0 * (std::conj(f) * df[static_cast<std::size_t>(j)]).real();
        g[4] = std::norm(f);
        return g;
    }
};

struct EmptyCavityGuess {
    double kappa_i{0.0};
    double kappa_ex{0.0};
    double h{0.0};
    double offset{0.0};
    double amplitude{0.0};
};

struct EmptyCavityOptions {
    std::optional<EmptyCavityGuess> guess;  // otherwise estimated from the trace
    bool allow_pin_h{true};                 // pin h = 0 when it is unidentifiable
    LmOptions lm{};
};

namespace detail {

struct DipFeatures {
    double baseline{0.0};
    double kappa{0.0};
    double center{0.0};
    std::optional<double> half_split;
};

inline DipFeatures dip_features(const SpectrumTrace& tr) {
    std::vector<std::size_t> order(tr.delta.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return tr.delta[a] < tr.delta[b]; });
    std::vector<double> x, y;
    for (std::size_t i : order) {
        x.push_back(tr.delta[i]);
        y.push_back(tr.t_f[i]);
    }
    DipFeatures f;
    f.baseline = *std::max_element(y.begin(), y.end());
    const auto imin = static_cast<std::size_t>(std::min_element(y.begin(), y.end()) - y.begin());
    const double level = 0.5 * (f.baseline + y[imin]);
    std::size_t lo = imin, hi = imin;
    while (lo > 0 && y[lo] < level) --lo;
    while (hi + 1 < y.size() && y[hi] < level) ++hi;
    f.kappa = std::max(0.5 * (x[hi] - x[lo]), 1e-3 * (x.back() - x.front()));

    // local minima clearly below their surroundings
    std::vector<std::size_t> minima;
    for (std::size_t i = 1; i + 1 < y.size(); ++i)
        if (y[i] < y[i - 1] && y[i] <= y[i + 1] && y[i] < level) minima.push_back(i);
    if (minima.size() >= 2) {
        std::sort(minima.begin(), minima.end(), [&](std::size_t a, std::size_t b) { return y[a] < y[b]; });
        const std::size_t a = std::min(minima[0], minima[1]), b = std::max(minima[0], minima[1]);
        const double peak = *std::max_element(y.begin() + static_cast<long>(a), y.begin() + static_cast<long>(b) + 1);
        // the bump between the two dips must stand out from the noise
        if (peak - std::max(y[a], y[b]) > 0.05 * (f.baseline - y[imin])) {
            f.half_split = 0.5 * (x[b] - x[a]);
            f.center = 0.5 * (x[a] + x[b]);
            f.kappa = std::max(f.kappa - *f.half_split, 0.25 * f.kappa);
            return f;
        }
    }
    f.center = x[imin];
    return f;
}

}  // namespace detail

// Least-squares fit of A·|1 − 2κ_ex(κ+iΔ')/((κ+iΔ')²+h²)|², Δ' = Δ − offset.
inline FitResult fit_empty_cavity(const SpectrumTrace& trace, const EmptyCavityOptions& opt = {}) {
    trace.validate();
    const auto feat = detail::dip_features(trace);
    const double span = *std::max_element(trace.delta.begin(), trace.delta.end()) -
                        *std::min_element(trace.delta.begin(), trace.delta.end());
    require(span >= 4.0 * feat.kappa, "fit_empty_cavity: trace must span at least 4 kappa");
    if (feat.baseline <= 0.0) throw DegenerateParameters("fit_empty_cavity: trace is identically zero");

    const auto m = static_cast<Eigen::Index>(trace.delta.size());
    auto weight = [&](Eigen::Index i) {
        return trace.sigma.empty() ? 1.0 : 1.0 / trace.sigma[static_cast<std::size_t>(i)];
    };
    LmProblem prob;
    prob.residuals = [&](const Eigen::VectorXd& p) {
        Eigen::VectorXd r(m);
        for (Eigen::Index i = 0; i < m; ++i)
            r[i] = weight(i) * (EmptyCavityModel::value(p, trace.delta[static_cast<std::size_t>(i)]) -
                                trace.t_f[static_cast<std::size_t>(i)]);
        return r;
    };
    prob.jacobian = [&](const Eigen::VectorXd& p) {
        Eigen::MatrixXd J(m, 5);
        for (Eigen::Index i = 0; i < m; ++i)
            J.row(i) = weight(i) * EmptyCavityModel::gradient(p, trace.delta[static_cast<std::size_t>(i)]);
        return J;
    };
    prob.lower = Eigen::VectorXd::Constant(5, -std::numeric_limits<double>::infinity());
    prob.upper = Eigen::VectorXd::Constant(5, std::numeric_limits<double>::infinity());
    prob.lower[0] = 1e-9;
    prob.lower[1] = 1e-9;
    prob.lower[4] = 0.0;
    prob.absolute_sigma = !trace.sigma.empty();

    // Starting points: the supplied guess plus both coupling regimes with several h.
    std::vector<Eigen::VectorXd> starts;
    if (opt.guess) {
        const auto& g = *opt.guess;
        starts.push_back((Eigen::VectorXd(5) << g.kappa_i, g.kappa_ex, g.h, g.offset, g.amplitude).finished());
    }
    const double k = feat.kappa;
    const std::vector<double> hs = feat.half_split ? std::vector<double>{*feat.half_split}
                                                   : std::vector<double>{0.25 * k, 0.6 * k};
    for (double h : hs)
        for (double frac : {0.6, 0.4, 0.5})
            starts.push_back((Eigen::VectorXd(5) << frac * k, (1.0 - frac) * k, h, feat.center, feat.baseline)
                                 .finished());

    std::optional<LmResult> best;
    for (const auto& s : starts) {
        LmResult r = levenberg_marquardt(prob, s, opt.lm);
        // h = 0 is stationary for any κ_i, κ_ex; a run that stalls there gets one kick off it
        const double kr = r.params[0] + r.params[1];
        if (std::abs(r.params[2]) < 1e-4 * kr) {
            Eigen::VectorXd kicked = r.params;
            kicked[2] = 0.5 * kr;
            LmResult again = levenberg_marquardt(prob, kicked, opt.lm);
            if (again.residual_norm < r.residual_norm) r = again;
        }
        if (!best || r.residual_norm < best->residual_norm) best = r;
    }

    best->params[2] = std::abs(best->params[2]);  // T is even in h
    const double kappa_fit = best->params[0] + best->params[1];
    const bool h_unidentified = best->rank_deficient || best->params[2] < 1e-4 * kappa_fit;
    std::vector<std::string> flags;
    if (h_unidentified) {
        if (!opt.allow_pin_h)
            throw DegenerateParameters("fit_empty_cavity: rank-deficient Jacobian, h is not identifiable");
        prob.pinned = {false, false, true, false, false};
        Eigen::VectorXd s = best->params;
        s[2] = 0.0;
        best = levenberg_marquardt(prob, s, opt.lm);
        // with h = 0 the line shape is symmetric under κ_i ↔ κ_ex; report the under-coupled branch
        if (best->params[1] > best->params[0]) {
            std::swap(best->params[0], best->params[1]);
            std::swap(best->errors[0], best->errors[1]);
            flags.push_back("coupling_regime_ambiguous");
        }
        flags.push_back("h_pinned");
        if (best->rank_deficient) throw DegenerateParameters("fit_empty_cavity: rank-deficient Jacobian");
    }
    if (!best->converged) throw NumericalFailure("fit_empty_cavity: no convergence within the iteration limit");

    FitResult out;
    const std::array<const char*, 5> names{"kappa_i", "kappa_ex", "h", "offset", "amplitude"};
    for (std::size_t j = 0; j < 5; ++j) {
        const auto J = static_cast<Eigen::Index>(j);
        out.params.push_back({names[j], best->params[J], best->errors[J], h_unidentified && j == 2});
    }
    out.residual_norm = best->residual_norm;
    out.converged = best->converged;
    out.iterations = best->iterations;
    out.flags = flags;
    return out;
}

// ---- detuning curves -----------------------------------------------------

struct DetuningCurve {
    std::vector<double> delta_AC;
    std::vector<double> value;
    std::vector<double> sigma;  // optional

    void validate() const {
        require(delta_AC.size() >= 5, "detuning curve: need at least 5 points");
        require(value.size() == delta_AC.size(), "detuning curve: column lengths differ");
        require(sigma.empty() || sigma.size() == delta_AC.size(), "detuning curve: sigma column length differs");
        for (std::size_t i = 0; i < value.size(); ++i) {
            require(std::isfinite(delta_AC[i]) && std::isfinite(value[i]), "detuning curve: non-finite sample");
            if (!sigma.empty()) require(sigma[i] > 0.0, "detuning curve: sigma must be positive");
        }
    }
};

struct WidthFitOptions {
    std::optional<double> fixed_center;
    bool fit_offset{false};
    LmOptions lm{};
};

struct WidthFit {
    FitResult fit;        // amplitude, center, width (HWHM about the center), offset
    double beta{0.0};     // blue-side half-maximum detuning: center + width
    double beta_err{0.0};
};

// y = A·W²/((Δ−c)² + W²) [+ B]
inline WidthFit fit_detuning_width(const DetuningCurve& curve, const WidthFitOptions& opt = {}) {
    curve.validate();
    const auto [mn, mx] = std::minmax_element(curve.value.begin(), curve.value.end());
    double noise = 0.0;
    for (double s : curve.sigma) noise = std::max(noise, s);
    if (*mx - *mn <= std::max(noise, 1e-12 * std::max(std::abs(*mx), 1.0)))
        throw DegenerateParameters("fit_detuning_width: width unresolvable, curve is flat within errors");

    const auto n = static_cast<Eigen::Index>(curve.value.size());
    const auto top = static_cast<std::size_t>(mx - curve.value.begin());
    const double span = *std::max_element(curve.delta_AC.begin(), curve.delta_AC.end()) -
                        *std::min_element(curve.delta_AC.begin(), curve.delta_AC.end());
    double w0 = 0.25 * span;
    {
        std::vector<CurvePoint> pts;
        std::vector<std::size_t> order(curve.delta_AC.size());
        for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
        std::sort(order.begin(), order.end(), [&](auto a, auto b) { return curve.delta_AC[a] < curve.delta_AC[b]; });
        for (std::size_t i : order) pts.push_back({curve.delta_AC[i], curve.value[i] - (opt.fit_offset ? *mn : 0.0)});
        if (auto x = half_max_crossing(pts)) w0 = std::max(*x - curve.delta_AC[top], 1e-3 * span);
    }

    auto weight = [&](Eigen::Index i) { return curve.sigma.empty() ? 1.0 : 1.0 / curve.sigma[static_cast<std::size_t>(i)]; };
    // p = (A, c, W, B)
    LmProblem prob;
    prob.residuals = [&](const Eigen::VectorXd& p) {
        Eigen::VectorXd r(n);
        for (Eigen::Index i = 0; i < n; ++i) {
            const double d = curve.delta_AC[static_cast<std::size_t>(i)] - p[1];
            r[i] = weight(i) * (p[0] * p[2] * p[2] / (d * d + p[2] * p[2]) + p[3] - curve.value[static_cast<std::size_t>(i)]);
        }
        return r;
    };
    prob.jacobian = [&](const Eigen::VectorXd& p) {
        Eigen::MatrixXd J(n, 4);
        for (Eigen::Index i = 0; i < n; ++i) {
            const double d = curve.delta_AC[static_cast<std::size_t>(i)] - p[1];
            const double w2 = p[2] * p[2], den = d * d + w2;
            J(i, 0) = w2 / den;
            J(i, 1) = p[0] * w2 * 2.0 * d / (den * den);
            J(i, 2) = p[0] * 2.0 * p[2] * d * d / (den * den);
            J(i, 3) = 1.0;
            J.row(i) *= weight(i);
        }
        return J;
    };
    prob.lower = (Eigen::VectorXd(4) << -std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity(),
                  1e-9, -std::numeric_limits<double>::infinity())
                     .finished();
    prob.pinned = {false, opt.fixed_center.has_value(), false, !opt.fit_offset};
    prob.absolute_sigma = !curve.sigma.empty();
    Eigen::VectorXd x0(4);
    x0 << *mx - (opt.fit_offset ? *mn : 0.0), opt.fixed_center.value_or(curve.delta_AC[top]), w0,
        opt.fit_offset ? *mn : 0.0;
    const LmResult r = levenberg_marquardt(prob, x0, opt.lm);
    if (r.rank_deficient) throw DegenerateParameters("fit_detuning_width: width unresolvable (rank-deficient fit)");
    if (!r.converged) throw NumericalFailure("fit_detuning_width: no convergence within the iteration limit");
    if (r.params[2] > 10.0 * span)
        throw DegenerateParameters("fit_detuning_width: width unresolvable, exceeds the detuning span tenfold");

    WidthFit out;
    const std::array<const char*, 4> names{"amplitude", "center", "width", "offset"};
    for (Eigen::Index j = 0; j < 4; ++j)
        out.fit.params.push_back({names[static_cast<std::size_t>(j)], r.params[j], r.errors[j],
                                  prob.pinned[static_cast<std::size_t>(j)]});
    out.fit.residual_norm = r.residual_norm;
    out.fit.converged = r.converged;
    out.fit.iterations = r.iterations;
    out.beta = r.params[1] + r.params[2];
    out.beta_err = std::sqrt(std::max(0.0, r.covariance(1, 1) + r.covariance(2, 2) + 2.0 * r.covariance(1, 2)));
    return out;
}

struct CouplingFromWidth {
    double g_tw_abs{0.0};  // |g_tw|
    double re_g2{0.0};     // Re(g_tw²)
    double g0{0.0};        // normal-mode coupling magnitude √(g_A² + g_B²) = √2·|g_tw|
};

// Invert the Lorentzian center and half-width for the traveling-wave coupling
// at a fixed atom position. width is the HWHM about the center.
inline CouplingFromWidth invert_width(double center, double width, double kappa, double h, double gamma) {
    require(kappa > 0.0, "invert_width: kappa must be positive");
    if (width <= gamma)
        throw DegenerateParameters("invert_width: half-width does not exceed gamma, no coupling resolvable");
    const double q = h * h + kappa * kappa;
    CouplingFromWidth out;
    const double g2 = (width - gamma) * q / (2.0 * kappa);
    out.g_tw_abs = std::sqrt(g2);
    out.re_g2 = h != 0.0 ? center * q / (2.0 * h) : 0.0;
    out.g0 = std::sqrt(2.0 * g2);
    return out;
}

// β_effective of the fully averaged theory curve as a function of g0m, fitted
// with the same Lorentzian estimator on a fixed detuning grid.
struct CalibrationTable {
    std::vector<double> detunings;
    std::vector<double> g0m;
    std::vector<double> beta;

    double invert(double b) const {
        require(g0m.size() >= 2, "calibration table: needs at least two entries");
        for (std::size_t i = 0; i + 1 < beta.size(); ++i)
            require(beta[i + 1] > beta[i], "calibration table: beta is not increasing in g0m");
        if (b < beta.front() || b > beta.back())
            throw DegenerateParameters("calibration table: beta outside the tabulated range");
        const auto it = std::upper_bound(beta.begin(), beta.end(), b);
        const std::size_t i = std::min<std::size_t>(static_cast<std::size_t>(it - beta.begin()), beta.size() - 1);
        const double f = (b - beta[i - 1]) / (beta[i] - beta[i - 1]);
        return g0m[i - 1] + f * (g0m[i] - g0m[i - 1]);
    }
};

inline CalibrationTable build_calibration(const std::vector<double>& detunings, const std::vector<double>& g0m_grid,
                                          const SystemParams& cavity, const ModeGeometry& geometry = {},
                                          const CloudParams& cloud = {}, double bin_dt_us = 2.0,
                                          const WidthFitOptions& opt = {}) {
    require(g0m_grid.size() >= 2, "build_calibration: need at least two g0m values");
    CalibrationTable t;
    t.detunings = detunings;
    for (double g : g0m_grid) {
        const auto curve = theory_sweep(detunings, g, Averaging::x_rho_t, cavity, geometry, cloud, bin_dt_us);
        DetuningCurve c;
        for (const auto& p : curve) {
            c.delta_AC.push_back(p.delta_AC);
            c.value.push_back(p.value);
        }
        t.g0m.push_back(g);
        t.beta.push_back(fit_detuning_width(c, opt).beta);
    }
    return t;
}

// ---- critical-coupling gate ----------------------------------------------

inline constexpr double kCriticalGateThreshold = 0.01;

inline bool critical_gate(double on_resonance, double off_resonance) {
    require(off_resonance > 0.0, "critical_gate: off-resonance level must be positive");
    return on_resonance < kCriticalGateThreshold * off_resonance;
}

// On-resonance level is the trace minimum, off-resonance level its maximum.
inline bool critical_gate(const SpectrumTrace& trace) {
    trace.validate();
    const auto [mn, mx] = std::minmax_element(trace.t_f.begin(), trace.t_f.end());
    return critical_gate(*mn, *mx);
}

}  // namespace toroidqed
