#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "toroidqed/fitting.hpp"

using namespace toroidqed;

namespace {

SpectrumTrace synthetic(double ki, double kex, double h, double lo, double hi, int n, double noise = 0.0,
                        unsigned seed = 1, double amplitude = 1.0, double offset = 0.0) {
    SpectrumTrace t;
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    SystemParams p;
    p.kappa_i = ki;
    p.kappa_ex = kex;
    p.h = h;
    for (int i = 0; i < n; ++i) {
        const double d = lo + (hi - lo) * i / (n - 1);
        p.delta = d - offset;
        p.delta_A = p.delta;
        const double clean = amplitude * forward_transmission(p);
        t.delta.push_back(d);
        t.t_f.push_back(std::max(0.0, clean * (1.0 + noise * gauss(rng))));
    }
    return t;
}

double rel(double a, double b) { return std::abs(a - b) / std::abs(b); }

SystemParams reference_cavity() {
    SystemParams p;
    auto [ki, kex] = critical_split(17.9, 4.9);
    p.kappa_i = ki;
    p.kappa_ex = kex;
    p.h = 4.9;
    p.gamma = 2.6;
    return p;
}

}  // namespace

TEST(EmptyCavityModel, MatchesSolverAndGradient) {
    Eigen::VectorXd p(5);
    p << 8.28, 9.62, 4.9, 1.5, 0.8;
    for (double d : {-40.0, -3.0, 0.0, 7.0, 33.0}) {
        SystemParams s;
        s.kappa_i = p[0];
        s.kappa_ex = p[1];
        s.h = p[2];
        s.delta = s.delta_A = d - p[3];
        EXPECT_NEAR(EmptyCavityModel::value(p, d), p[4] * forward_transmission(s), 1e-14);
        const Eigen::RowVectorXd g = EmptyCavityModel::gradient(p, d);
        for (int j = 0; j < 5; ++j) {
            Eigen::VectorXd a = p, b = p;
            a[j] += 1e-6;
            b[j] -= 1e-6;
            const double fd = (EmptyCavityModel::value(a, d) - EmptyCavityModel::value(b, d)) / 2e-6;
            EXPECT_NEAR(g[j], fd, 1e-7) << j << " " << d;
        }
    }
}

TEST(FitEmptyCavity, NoiselessRecovery) {
    const auto tr = synthetic(8.28, 9.62, 4.9, -80, 80, 321);
    const auto f = fit_empty_cavity(tr);
    EXPECT_TRUE(f.converged);
    EXPECT_LT(rel(f.value("kappa_i"), 8.28), 1e-6);
    EXPECT_LT(rel(f.value("kappa_ex"), 9.62), 1e-6);
    EXPECT_LT(rel(f.value("h"), 4.9), 1e-6);
    EXPECT_FALSE(f.flagged("h_pinned"));
}

TEST(FitEmptyCavity, OnePercentNoise) {
    for (unsigned seed : {1u, 2u, 3u, 4u, 5u}) {
        auto tr = synthetic(8.28, 9.62, 4.9, -80, 80, 641, 0.01, seed);
        const auto clean = synthetic(8.28, 9.62, 4.9, -80, 80, 641);
        for (double t : clean.t_f) tr.sigma.push_back(std::max(0.01 * t, 1e-6));
        const auto f = fit_empty_cavity(tr);
        EXPECT_LT(rel(f.value("kappa_i"), 8.28), 0.02) << seed;
        EXPECT_LT(rel(f.value("kappa_ex"), 9.62), 0.02) << seed;
        EXPECT_LT(rel(f.value("h"), 4.9), 0.02) << seed;
        for (const auto& p : f.params) EXPECT_GE(p.error, 0.0);
    }
}

TEST(FitEmptyCavity, UnweightedNoisyFitStaysNearTruth) {
    // without per-point σ the near-critical κ_i / κ_ex split is only loosely constrained
    const auto f = fit_empty_cavity(synthetic(8.28, 9.62, 4.9, -80, 80, 641, 0.01, 1));
    EXPECT_NEAR(f.value("kappa_i") + f.value("kappa_ex"), 17.9, 0.02 * 17.9);
    EXPECT_LT(rel(f.value("h"), 4.9), 0.1);
}

TEST(FitEmptyCavity, ConvergesFromFactorThreeGuesses) {
    const auto tr = synthetic(8.28, 9.62, 4.9, -80, 80, 321);
    for (double s : {1.0 / 3.0, 3.0}) {
        EmptyCavityOptions opt;
        opt.guess = EmptyCavityGuess{8.28 * s, 9.62 * s, 4.9 * s, 0.0, 1.0};
        const auto f = fit_empty_cavity(tr, opt);
        EXPECT_LT(rel(f.value("kappa_i"), 8.28), 1e-6) << s;
        EXPECT_LT(rel(f.value("kappa_ex"), 9.62), 1e-6) << s;
        EXPECT_LT(rel(f.value("h"), 4.9), 1e-6) << s;
    }
}

TEST(FitEmptyCavity, PinsUnresolvedSplitting) {
    const auto tr = synthetic(12.0, 5.0, 0.0, -80, 80, 201);
    const auto f = fit_empty_cavity(tr);
    EXPECT_TRUE(f.flagged("h_pinned"));
    EXPECT_TRUE(f.at("h").pinned);
    EXPECT_EQ(f.value("h"), 0.0);
    EXPECT_LT(rel(f.value("kappa_i"), 12.0), 1e-6);
    EXPECT_LT(rel(f.value("kappa_ex"), 5.0), 1e-6);
    EmptyCavityOptions strict;
    strict.allow_pin_h = false;
    EXPECT_THROW(fit_empty_cavity(tr, strict), DegenerateParameters);
}

TEST(FitEmptyCavity, RandomDoubletRoundTrips) {
    std::mt19937_64 rng(17);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    int checked = 0;
    while (checked < 100) {
        const double ki = 3.0 + 17.0 * u(rng);
        const double kex = ki * (0.2 + 0.75 * u(rng));
        const double kappa = ki + kex;
        const double h = kappa * (0.25 + 1.25 * u(rng));
        const double reach = 4.0 * (kappa + h);
        const auto tr = synthetic(ki, kex, h, -reach, reach, 201);
        const auto f = fit_empty_cavity(tr);
        EXPECT_LT(rel(f.value("kappa_i"), ki), 1e-5) << ki << " " << kex << " " << h;
        EXPECT_LT(rel(f.value("kappa_ex"), kex), 1e-5) << ki << " " << kex << " " << h;
        EXPECT_LT(rel(f.value("h"), h), 1e-5) << ki << " " << kex << " " << h;
        ++checked;
    }
}

TEST(FitEmptyCavity, AmplitudeScalingInvariance) {
    const auto a = fit_empty_cavity(synthetic(8.28, 9.62, 4.9, -80, 80, 321, 0.01, 4));
    const auto b = fit_empty_cavity(synthetic(8.28, 9.62, 4.9, -80, 80, 321, 0.01, 4, 37.0));
    for (const char* k : {"kappa_i", "kappa_ex", "h", "offset"}) EXPECT_LT(std::abs(a.value(k) - b.value(k)), 1e-8) << k;
    EXPECT_NEAR(b.value("amplitude") / a.value("amplitude"), 37.0, 1e-8);
}

TEST(FitEmptyCavity, UncertaintiesScaleWithNoiseAndPoints) {
    auto err = [](int n, double noise) {
        double acc = 0.0;
        for (unsigned s = 0; s < 10; ++s)
            acc += fit_empty_cavity(synthetic(8.28, 9.62, 4.9, -80, 80, n, noise, 100 + s)).error("h");
        return acc / 10.0;
    };
    const double base = err(100, 0.01);
    const double more_points = err(400, 0.01);
    const double more_noise = err(100, 0.02);
    EXPECT_NEAR(base / more_points, 2.0, 1.0);
    EXPECT_NEAR(more_noise / base, 2.0, 1.0);

    // reported errors track the empirical scatter
    std::vector<double> hs;
    for (unsigned s = 0; s < 40; ++s) hs.push_back(fit_empty_cavity(synthetic(8.28, 9.62, 4.9, -80, 80, 100, 0.01, 500 + s)).value("h"));
    double m = 0.0, v = 0.0;
    for (double h : hs) m += h / hs.size();
    for (double h : hs) v += (h - m) * (h - m) / (hs.size() - 1);
    EXPECT_GT(base, 0.5 * std::sqrt(v));
    EXPECT_LT(base, 2.0 * std::sqrt(v));
}

TEST(FitEmptyCavity, RejectsBadTraces) {
    SpectrumTrace tiny;
    tiny.delta = {0, 1, 2};
    tiny.t_f = {1, 0, 1};
    EXPECT_THROW(fit_empty_cavity(tiny), ContractError);
    auto narrow = synthetic(8.28, 9.62, 4.9, -10, 10, 50);
    EXPECT_THROW(fit_empty_cavity(narrow), ContractError);
    auto neg = synthetic(8.28, 9.62, 4.9, -80, 80, 50);
    neg.t_f[3] = -0.1;
    EXPECT_THROW(fit_empty_cavity(neg), ContractError);
}

TEST(FitDetuningWidth, FixedPositionMatchesPrintedHalfWidth) {
    const SystemParams c = reference_cavity();
    for (double kx : {0.0, 0.3, std::numbers::pi / 4.0}) {
        const cplx g = traveling_wave_coupling(50.0, 1.0, kx);
        DetuningCurve curve;
        for (double d = -300.0; d <= 300.0; d += 5.0) {
            curve.delta_AC.push_back(d);
            curve.value.push_back(on_resonance_transmission(g, c.h, c.kappa_i, c.kappa_ex, c.gamma, d));
        }
        const auto w = fit_detuning_width(curve);
        const double beta = lorentzian_halfwidth(g, c.h, c.kappa(), c.gamma);
        EXPECT_LT(rel(w.beta, beta), 1e-4) << kx;
        EXPECT_NEAR(w.fit.value("center"), lorentzian_center(g, c.h, c.kappa()), 1e-4 * beta);
        const auto inv = invert_width(w.fit.value("center"), w.fit.value("width"), c.kappa(), c.h, c.gamma);
        EXPECT_NEAR(inv.g_tw_abs, std::abs(g), 1e-4 * std::abs(g));
        EXPECT_NEAR(inv.g0, 50.0, 5e-3);
        EXPECT_NEAR(inv.re_g2, (g * g).real(), 1e-3 * std::norm(g));
    }
}

TEST(FitDetuningWidth, FixedCenterOption) {
    DetuningCurve curve;
    for (double d = 0.0; d <= 60.0; d += 10.0) {
        curve.delta_AC.push_back(d);
        curve.value.push_back(400.0 / (d * d + 400.0));
    }
    WidthFitOptions opt;
    opt.fixed_center = 0.0;
    const auto w = fit_detuning_width(curve, opt);
    EXPECT_NEAR(w.fit.value("width"), 20.0, 1e-6);
    EXPECT_TRUE(w.fit.at("center").pinned);
    EXPECT_NEAR(w.beta, 20.0, 1e-6);
}

TEST(FitDetuningWidth, FlatCurveIsUnresolvable) {
    DetuningCurve curve;
    curve.delta_AC = {0, 10, 20, 30, 40, 50};
    curve.value = {1, 1, 1, 1, 1, 1};
    EXPECT_THROW(fit_detuning_width(curve), DegenerateParameters);
    curve.value = {1.0, 1.01, 0.99, 1.0, 1.0, 1.0};
    curve.sigma = {0.05, 0.05, 0.05, 0.05, 0.05, 0.05};
    EXPECT_THROW(fit_detuning_width(curve), DegenerateParameters);
    curve.value = {1, 1, 1};
    EXPECT_THROW(fit_detuning_width(curve), ContractError);
}

TEST(FitDetuningWidth, AveragedCalibrationRoundTrip) {
    const SystemParams c = reference_cavity();
    std::vector<double> det;
    for (double d = 0.0; d <= 120.0; d += 10.0) det.push_back(d);
    std::vector<double> table_g;
    for (double g = 20.0; g <= 90.0; g += 10.0) table_g.push_back(g);
    // one-sided data: the averaged curve peaks at Δ_AC = 0, so the center is held there
    WidthFitOptions opt;
    opt.fixed_center = 0.0;
    const auto table = build_calibration(det, table_g, c, {}, {}, 2.0, opt);
    double prev = 0.0;
    for (double g : {35.0, 50.0, 65.0}) {
        DetuningCurve curve;
        for (const auto& p : theory_sweep(det, g, Averaging::x_rho_t, c)) {
            curve.delta_AC.push_back(p.delta_AC);
            curve.value.push_back(p.value);
        }
        const double recovered = table.invert(fit_detuning_width(curve, opt).beta);
        EXPECT_NEAR(recovered, g, 0.15 * g);
        EXPECT_GT(recovered, prev);
        prev = recovered;
    }
    EXPECT_THROW(table.invert(1e4), DegenerateParameters);
}

TEST(CriticalGate, Examples) {
    EXPECT_TRUE(critical_gate(0.005, 1.0));
    EXPECT_FALSE(critical_gate(0.02, 1.0));
    auto [ki, kex] = critical_split(17.9, 4.9);
    EXPECT_TRUE(critical_gate(synthetic(ki, kex, 4.9, -80, 80, 161)));
    EXPECT_FALSE(critical_gate(synthetic(12.0, 5.0, 4.9, -80, 80, 161)));
    EXPECT_THROW(critical_gate(0.0, 0.0), ContractError);
}

TEST(LevenbergMarquardt, PinnedAndBounded) {
    LmProblem prob;
    prob.residuals = [](const Eigen::VectorXd& p) {
        Eigen::VectorXd r(3);
        r << p[0] - 2.0, p[1] + 1.0, p[0] * p[1];
        return r;
    };
    prob.pinned = {false, true};
    Eigen::VectorXd x0(2);
    x0 << 0.0, 0.5;
    const auto r = levenberg_marquardt(prob, x0);
    EXPECT_EQ(r.params[1], 0.5);
    EXPECT_NEAR(r.params[0], 2.0 / 1.25, 1e-8);
    EXPECT_EQ(r.errors[1], 0.0);
    prob.pinned = {};
    prob.lower = Eigen::VectorXd::Constant(2, 0.0);
    prob.upper = Eigen::VectorXd::Constant(2, 1.0);
    const auto b = levenberg_marquardt(prob, x0);
    EXPECT_LE(b.params[0], 1.0);
    EXPECT_GE(b.params[1], 0.0);
}
