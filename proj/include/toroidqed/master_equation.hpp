// master_equation.hpp — steady state of the full Lindblad master equation for
// the atom + two-mode Hamiltonian in a truncated Fock basis. Used as an
// independent oracle for the linear (weak-excitation) model.

#pragma once

#include <cmath>
#include <complex>
#include <vector>

#include <Eigen/Sparse>
#include <Eigen/IterativeLinearSolvers>
#include <Eigen/SparseLU>

#include "toroidqed/core_model.hpp"

namespace toroidqed {

struct MasterEquationResult {
    double t_f{0.0};
    double n_a{0.0};
    double n_b{0.0};
    double excited_population{0.0};
    cplx amp_a{};
    double top_level_population{0.0};  // weight on n_a = n_max or n_b = n_max
    // n̄ within 10% of the cutoff, or more than 1% of the state on the top Fock level
    bool cutoff_warning{false};
};

inline constexpr int kDefaultFockCutoff = 4;

namespace detail {

using SpMat = Eigen::SparseMatrix<cplx>;

inline SpMat sparse_identity(int n) {
    SpMat I(n, n);
    I.setIdentity();
    return I;
}

inline SpMat kron(const SpMat& A, const SpMat& B) {
    SpMat out(A.rows() * B.rows(), A.cols() * B.cols());
    std::vector<Eigen::Triplet<cplx>> trip;
    trip.reserve(static_cast<std::size_t>(A.nonZeros() * B.nonZeros()));
    for (int ka = 0; ka < A.outerSize(); ++ka)
        for (SpMat::InnerIterator ia(A, ka); ia; ++ia)
            for (int kb = 0; kb < B.outerSize(); ++kb)
                for (SpMat::InnerIterator ib(B, kb); ib; ++ib)
                    trip.emplace_back(ia.row() * B.rows() + ib.row(),
                                      ia.col() * B.cols() + ib.col(), ia.value() * ib.value());
    out.setFromTriplets(trip.begin(), trip.end());
    return out;
}

// Operators on atom ⊗ mode a ⊗ mode b, index = s·N² + n_a·N + n_b.
struct FockOperators {
    int levels;  // N = n_max + 1
    int dim;
    SpMat a, b, sm;

    explicit FockOperators(int n_max) : levels(n_max + 1), dim(2 * levels * levels) {
        std::vector<Eigen::Triplet<cplx>> ta, tb, ts;
        auto idx = [&](int s, int na, int nb) { return s * levels * levels + na * levels + nb; };
        for (int s = 0; s < 2; ++s)
            for (int na = 0; na < levels; ++na)
                for (int nb = 0; nb < levels; ++nb) {
                    if (na > 0) ta.emplace_back(idx(s, na - 1, nb), idx(s, na, nb), std::sqrt(double(na)));
                    if (nb > 0) tb.emplace_back(idx(s, na, nb - 1), idx(s, na, nb), std::sqrt(double(nb)));
                    if (s == 1) ts.emplace_back(idx(0, na, nb), idx(1, na, nb), 1.0);
                }
        a.resize(dim, dim);
        b.resize(dim, dim);
        sm.resize(dim, dim);
        a.setFromTriplets(ta.begin(), ta.end());
        b.setFromTriplets(tb.begin(), tb.end());
        sm.setFromTriplets(ts.begin(), ts.end());
    }
};

inline SpMat dagger(const SpMat& m) { return SpMat(m.adjoint()); }

inline cplx expectation(const SpMat& op, const Eigen::MatrixXcd& rho) {
    cplx acc{0.0, 0.0};
    for (int k = 0; k < op.outerSize(); ++k)
        for (SpMat::InnerIterator it(op, k); it; ++it) acc += it.value() * rho(it.col(), it.row());
    return acc;
}

}  // namespace detail

inline MasterEquationResult master_equation_oracle(const SystemParams& p,
                                                   int n_max = kDefaultFockCutoff) {
    using detail::SpMat;
    p.validate();
    require(n_max >= 1 && n_max <= 6, "master_equation_oracle: n_max must be in [1, 6]");
    require(p.eps_p != cplx{0.0, 0.0}, "master_equation_oracle: zero drive");
    require(p.kappa() > 0.0 && p.gamma > 0.0,
            "master_equation_oracle: needs non-zero cavity and atomic decay");

    const detail::FockOperators ops(n_max);
    const int D = ops.dim;
    const SpMat ad = detail::dagger(ops.a);
    const SpMat bd = detail::dagger(ops.b);
    const SpMat sp = detail::dagger(ops.sm);
    const cplx I{0.0, 1.0};
    const cplx g = p.g_tw;
    const cplx drive = -I * p.eps_p;  // Hamiltonian drive term E with -iE = -eps_p

    SpMat H = p.delta_A * (sp * ops.sm) + p.delta * (ad * ops.a + bd * ops.b) -
              p.h * (ad * ops.b + bd * ops.a) + std::conj(g) * (ad * ops.sm) + g * (sp * ops.a) +
              g * (bd * ops.sm) + std::conj(g) * (sp * ops.b) + std::conj(drive) * ops.a +
              drive * ad;

    const SpMat Id = detail::sparse_identity(D);
    const SpMat Ht = SpMat(H.transpose());
    SpMat L = (-I) * detail::kron(Id, H) + I * detail::kron(Ht, Id);

    auto add_dissipator = [&](const SpMat& c, double rate) {
        const SpMat cd = detail::dagger(c);
        const SpMat cdc = cd * c;
        const SpMat cconj = SpMat(c.conjugate());
        L += rate * (detail::kron(cconj, c) - 0.5 * detail::kron(Id, cdc) -
                     0.5 * detail::kron(SpMat(cdc.transpose()), Id));
    };
    add_dissipator(ops.a, 2.0 * p.kappa());
    add_dissipator(ops.b, 2.0 * p.kappa());
    add_dissipator(ops.sm, 2.0 * p.gamma);

    // Replace the first equation with tr ρ = 1.
    L.prune([](Eigen::Index row, Eigen::Index, const cplx&) { return row != 0; });
    std::vector<Eigen::Triplet<cplx>> trace;
    for (int i = 0; i < D; ++i) trace.emplace_back(0, i * D + i, 1.0);
    SpMat T(D * D, D * D);
    T.setFromTriplets(trace.begin(), trace.end());
    L += T;
    L.makeCompressed();

    Eigen::VectorXcd rhs = Eigen::VectorXcd::Zero(D * D);
    rhs(0) = 1.0;
    // BiCGSTAB with a sparse ILU is ~10x faster than a direct LU at n_max ≥ 5;
    // fall back to SparseLU if it stalls.
    Eigen::VectorXcd x;
    {
        Eigen::BiCGSTAB<SpMat, Eigen::IncompleteLUT<cplx>> it;
        it.preconditioner().setDroptol(1e-3);
        it.preconditioner().setFillfactor(4);
        it.setTolerance(1e-13);
        it.setMaxIterations(500);
        it.compute(L);
        if (it.info() == Eigen::Success) x = it.solve(rhs);
        if (it.info() != Eigen::Success) {
            Eigen::SparseLU<SpMat> lu;
            lu.compute(L);
            if (lu.info() != Eigen::Success)
                throw NumericalFailure("master_equation_oracle: Liouvillian factorization failed");
            x = lu.solve(rhs);
            if (lu.info() != Eigen::Success)
                throw NumericalFailure("master_equation_oracle: steady-state solve failed");
        }
    }
    const Eigen::MatrixXcd rho = Eigen::Map<const Eigen::MatrixXcd>(x.data(), D, D);

    MasterEquationResult r;
    r.amp_a = detail::expectation(ops.a, rho);
    r.n_a = detail::expectation(SpMat(ad * ops.a), rho).real();
    r.n_b = detail::expectation(SpMat(bd * ops.b), rho).real();
    r.excited_population = detail::expectation(SpMat(sp * ops.sm), rho).real();
    const double kex2 = 2.0 * p.kappa_ex;
    // ⟨a_out† a_out⟩ / |a_in|² with a_in = eps_p / sqrt(2κ_ex)
    r.t_f = 1.0 + 2.0 * (kex2 * r.amp_a / p.eps_p).real() + kex2 * kex2 * r.n_a / std::norm(p.eps_p);
    const int N = ops.levels;
    for (int s = 0; s < 2; ++s)
        for (int na = 0; na < N; ++na)
            for (int nb = 0; nb < N; ++nb)
                if (na == n_max || nb == n_max) {
                    const int i = s * N * N + na * N + nb;
                    r.top_level_population += rho(i, i).real();
                }
    r.cutoff_warning = std::max(r.n_a, r.n_b) >= 0.9 * n_max || r.top_level_population > 0.01;
    return r;
}

}  // namespace toroidqed
