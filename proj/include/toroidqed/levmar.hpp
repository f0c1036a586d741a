// Bounded Levenberg–Marquardt with pinned parameters and a linearized covariance.

#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <functional>
#include <limits>
#include <string>
#include <vector>

#include "toroidqed/errors.hpp"

namespace toroidqed {

struct LmOptions {
    int max_iterations{200};
    double xtol{1e-9};      // relative step size in the scaled norm
    double gtol{1e-14};     // scaled gradient
    double lambda0{1e-3};
    double rank_tolerance{1e-10};  // reciprocal condition number of JᵀJ (free block)
};

struct LmProblem {
    std::function<Eigen::VectorXd(const Eigen::VectorXd&)> residuals;
    std::function<Eigen::MatrixXd(const Eigen::VectorXd&)> jacobian;  // empty: forward differences
    Eigen::VectorXd lower, upper;  // empty: unbounded
    std::vector<bool> pinned;      // empty: all free
    bool absolute_sigma{false};    // residuals already divided by known σ
};

struct LmResult {
    Eigen::VectorXd params;
    Eigen::VectorXd errors;       // 1σ, zero for pinned parameters
    Eigen::MatrixXd covariance;
    double residual_norm{0.0};
    bool converged{false};
    bool rank_deficient{false};
    int iterations{0};
};

namespace detail {

inline Eigen::MatrixXd forward_difference(const std::function<Eigen::VectorXd(const Eigen::VectorXd&)>& f,
                                          const Eigen::VectorXd& x, const Eigen::VectorXd& f0) {
    Eigen::MatrixXd J(f0.size(), x.size());
    for (Eigen::Index j = 0; j < x.size(); ++j) {
        Eigen::VectorXd xp = x;
        const double step = 1e-7 * std::max(1.0, std::abs(x[j]));
        xp[j] += step;
        J.col(j) = (f(xp) - f0) / step;
    }
    return J;
}

}  // namespace detail

inline LmResult levenberg_marquardt(const LmProblem& prob, Eigen::VectorXd x, const LmOptions& opt = {}) {
    const Eigen::Index n = x.size();
    std::vector<Eigen::Index> free;
    for (Eigen::Index j = 0; j < n; ++j)
        if (prob.pinned.empty() || !prob.pinned[static_cast<std::size_t>(j)]) free.push_back(j);
    require(!free.empty(), "levenberg_marquardt: no free parameters");
    const auto k = static_cast<Eigen::Index>(free.size());

    auto clamp = [&](Eigen::VectorXd v) {
        for (Eigen::Index j = 0; j < n; ++j) {
            if (prob.lower.size()) v[j] = std::max(v[j], prob.lower[j]);
            if (prob.upper.size()) v[j] = std::min(v[j], prob.upper[j]);
        }
        return v;
    };
    auto jac = [&](const Eigen::VectorXd& p, const Eigen::VectorXd& r) {
        Eigen::MatrixXd full = prob.jacobian ? prob.jacobian(p) : detail::forward_difference(prob.residuals, p, r);
        Eigen::MatrixXd J(full.rows(), k);
        for (Eigen::Index c = 0; c < k; ++c) J.col(c) = full.col(free[static_cast<std::size_t>(c)]);
        return J;
    };

    x = clamp(x);
    Eigen::VectorXd r = prob.residuals(x);
    require(r.size() >= k, "levenberg_marquardt: fewer residuals than free parameters");
    if (!r.allFinite()) throw NumericalFailure("levenberg_marquardt: non-finite residuals at the initial guess");
    double cost = r.squaredNorm();
    Eigen::MatrixXd J = jac(x, r);
    double lambda = opt.lambda0;
    double nu = 2.0;

    LmResult res;
    for (int it = 1; it <= opt.max_iterations; ++it) {
        res.iterations = it;
        const Eigen::MatrixXd A = J.transpose() * J;
        const Eigen::VectorXd g = J.transpose() * r;
        if (g.cwiseAbs().maxCoeff() <= opt.gtol * std::max(cost, 1e-300) || cost == 0.0) {
            res.converged = true;
            break;
        }
        bool accepted = false;
        bool small_step = false;
        for (int tries = 0; tries < 30 && !accepted; ++tries) {
            Eigen::MatrixXd M = A;
            for (Eigen::Index c = 0; c < k; ++c) M(c, c) += lambda * std::max(A(c, c), 1e-12);
            const Eigen::VectorXd step = M.ldlt().solve(-g);
            Eigen::VectorXd trial = x;
            for (Eigen::Index c = 0; c < k; ++c) trial[free[static_cast<std::size_t>(c)]] += step[c];
            trial = clamp(trial);
            const Eigen::VectorXd rt = prob.residuals(trial);
            const double ct = rt.allFinite() ? rt.squaredNorm() : std::numeric_limits<double>::infinity();
            // step measured in the Jacobian column scaling, so it is invariant to parameter units
            double step_norm = 0.0, x_norm = 0.0;
            for (Eigen::Index c = 0; c < k; ++c) {
                const double dj = std::sqrt(A(c, c));
                const Eigen::Index j = free[static_cast<std::size_t>(c)];
                step_norm += std::pow(dj * (trial[j] - x[j]), 2);
                x_norm += std::pow(dj * x[j], 2);
            }
            const bool tiny = std::sqrt(step_norm) <= opt.xtol * (std::sqrt(x_norm) + opt.xtol);
            if (ct < cost) {
                // gain ratio against the linear model (Nielsen's damping update)
                Eigen::VectorXd damp(k);
                for (Eigen::Index c = 0; c < k; ++c) damp[c] = lambda * std::max(A(c, c), 1e-12) * step[c];
                const double predicted = step.dot(damp - g);
                const double rho = predicted > 0.0 ? (cost - ct) / predicted : 0.0;
                small_step = tiny;
                x = trial;
                r = rt;
                cost = ct;
                J = jac(x, r);
                lambda = std::max(lambda * std::max(1.0 / 3.0, 1.0 - std::pow(2.0 * rho - 1.0, 3)), 1e-15);
                nu = 2.0;
                accepted = true;
            } else {
                lambda *= nu;
                nu *= 2.0;
                if (tiny) {
                    small_step = true;
                    break;
                }
            }
        }
        if (small_step || !accepted) {
            res.converged = small_step;
            break;
        }
    }

    res.params = x;
    res.residual_norm = std::sqrt(cost);
    const Eigen::MatrixXd A = J.transpose() * J;
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(A);
    const auto& sv = svd.singularValues();
    res.rank_deficient = !(sv.size() > 0 && sv(0) > 0.0 && sv(sv.size() - 1) / sv(0) > opt.rank_tolerance);
    res.covariance = Eigen::MatrixXd::Zero(n, n);
    res.errors = Eigen::VectorXd::Zero(n);
    if (!res.rank_deficient) {
        const auto m = static_cast<double>(r.size());
        const double s2 = prob.absolute_sigma ? 1.0 : (m > static_cast<double>(k) ? cost / (m - static_cast<double>(k)) : 0.0);
        const Eigen::MatrixXd cov = s2 * A.inverse();
        for (Eigen::Index a = 0; a < k; ++a)
            for (Eigen::Index b = 0; b < k; ++b)
                res.covariance(free[static_cast<std::size_t>(a)], free[static_cast<std::size_t>(b)]) = cov(a, b);
        for (Eigen::Index j = 0; j < n; ++j) res.errors[j] = std::sqrt(std::max(0.0, res.covariance(j, j)));
    }
    return res;
}

}  // namespace toroidqed
