// core_model.hpp — steady-state linear response of a two-level atom coupled to
// the two counter-propagating modes (a, b) of a fiber-coupled WGM resonator.
//
// All rates and detunings are frequencies ν = ω/2π in MHz. The equations are
// homogeneous in the rates, so nothing here converts to angular units.

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "toroidqed/errors.hpp"

namespace toroidqed {

using cplx = std::complex<double>;

struct SystemParams {
    double delta_A{0.0};   // ω_A − ω_p
    double delta{0.0};     // ω_C − ω_p
    double h{0.0};         // intermode scattering
    double kappa_i{0.0};   // intrinsic field decay
    double kappa_ex{0.0};  // taper (extrinsic) field decay
    double gamma{2.6};     // atomic dipole decay; population decays at 2γ
    cplx eps_p{1.0, 0.0};  // drive, eps_p = sqrt(2 κ_ex)·a_in
    cplx g_tw{0.0, 0.0};   // traveling-wave coupling at the atom

    double kappa() const { return kappa_i + kappa_ex; }
    // Δ_AC = ω_C − ω_A
    double delta_AC() const { return delta - delta_A; }

    // Probe at detuning Δ from the cavity, atom held at fixed Δ_AC.
    SystemParams with_probe(double probe_delta) const {
        SystemParams p = *this;
        const double dac = delta_AC();
        p.delta = probe_delta;
        p.delta_A = probe_delta - dac;
        return p;
    }

    // Probe on the cavity (Δ = 0) with the given atom–cavity detuning.
    SystemParams at_cavity(double dac) const {
        SystemParams p = *this;
        p.delta = 0.0;
        p.delta_A = -dac;
        return p;
    }

    // h may be negative: its sign is the scattering phase (see reciprocity).
    void validate() const {
        auto finite = [](double v) { return std::isfinite(v); };
        require(finite(delta_A) && finite(delta) && finite(h) && finite(kappa_i) &&
                    finite(kappa_ex) && finite(gamma) && finite(eps_p.real()) &&
                    finite(eps_p.imag()) && finite(g_tw.real()) && finite(g_tw.imag()),
                "SystemParams: all fields must be finite");
        require(kappa_i >= 0.0 && kappa_ex >= 0.0 && gamma >= 0.0,
                "SystemParams: decay rates must be non-negative");
    }
};

struct SteadyState {
    cplx sigma_minus{};
    cplx amp_a{};
    cplx amp_b{};
    cplx amp_A{};  // (a + b)/√2
    cplx amp_B{};  // (a − b)/√2
};

struct SpectrumPoint {
    double delta{0.0};
    double t_f{0.0};
};

struct Spectrum {
    std::vector<SpectrumPoint> points;
    SystemParams metadata;
};

enum class EigenCharacter { atom, mode_A, mode_B, unlabeled };

inline std::string to_string(EigenCharacter c) {
    switch (c) {
        case EigenCharacter::atom: return "atom";
        case EigenCharacter::mode_A: return "mode_A";
        case EigenCharacter::mode_B: return "mode_B";
        case EigenCharacter::unlabeled: break;
    }
    return "";
}

struct Eigenmode {
    double frequency{0.0};  // relative to the probe frame
    double decay{0.0};      // amplitude decay rate, ≥ 0
    EigenCharacter label{EigenCharacter::unlabeled};
    // weights |⟨A|v⟩|², |⟨B|v⟩|², |⟨σ|v⟩|², normalized to 1
    std::array<double, 3> weights{};
    Eigen::Vector3cd vector;  // in the (a, b, σ) basis, unit norm
};

struct EigenSet {
    std::array<Eigenmode, 3> modes;  // ascending frequency
};

// κ_ex at which the empty-cavity forward transmission vanishes on resonance.
inline double critical_kappa_ex(double kappa_i, double h) {
    require(kappa_i >= 0.0 && h >= 0.0, "critical_kappa_ex: kappa_i and h must be >= 0");
    return std::hypot(kappa_i, h);
}

// Split a total κ into (κ_i, κ_ex) at critical coupling: κ_i + sqrt(κ_i² + h²) = κ.
inline std::pair<double, double> critical_split(double kappa, double h) {
    require(kappa > 0.0 && h >= 0.0 && h < kappa, "critical_split: need 0 <= h < kappa");
    const double ki = (kappa * kappa - h * h) / (2.0 * kappa);
    return {ki, kappa - ki};
}

namespace detail {

// Effective non-Hermitian Hamiltonian of the homogeneous linear equations in
// the (a, b, σ⁻) basis: d x/dt = −i H_eff x − drive. Eigenvalues are ω − iΓ.
inline Eigen::Matrix3cd effective_hamiltonian(const SystemParams& p) {
    const cplx I{0.0, 1.0};
    const double k = p.kappa();
    Eigen::Matrix3cd H;
    // Scattering enters with −h; this is the sign under which the closed-form
    // on-resonance transmission holds with Δ_AC = Δ − Δ_A.
    H << p.delta - I * k, -p.h, std::conj(p.g_tw),
        -p.h, p.delta - I * k, p.g_tw,
        p.g_tw, std::conj(p.g_tw), p.delta_A - I * p.gamma;
    return H;
}

}  // namespace detail

inline SteadyState steady_state(const SystemParams& p) {
    p.validate();
    SteadyState s;
    if (p.eps_p == cplx{0.0, 0.0}) return s;

    const cplx I{0.0, 1.0};
    const Eigen::Matrix3cd M = I * detail::effective_hamiltonian(p);
    Eigen::Vector3cd rhs(-p.eps_p, 0.0, 0.0);

    Eigen::FullPivLU<Eigen::Matrix3cd> lu(M);
    if (!lu.isInvertible())
        throw DegenerateParameters("steady_state: singular response matrix");
    const Eigen::Vector3cd x = lu.solve(rhs);

    s.amp_a = x(0);
    s.amp_b = x(1);
    s.sigma_minus = x(2);
    s.amp_A = (s.amp_a + s.amp_b) / std::sqrt(2.0);
    s.amp_B = (s.amp_a - s.amp_b) / std::sqrt(2.0);
    return s;
}

// T_F = |⟨a_out⟩ / a_in|² with a_out = a_in + sqrt(2κ_ex)·a.
inline double forward_transmission(const SystemParams& p) {
    require(p.eps_p != cplx{0.0, 0.0}, "forward_transmission: zero drive");
    const SteadyState s = steady_state(p);
    const cplx t = 1.0 + 2.0 * p.kappa_ex * s.amp_a / p.eps_p;
    return std::norm(t);
}

// Backward flux relative to the input, |sqrt(2κ_ex)·b / a_in|².
inline double backward_transmission(const SystemParams& p) {
    require(p.eps_p != cplx{0.0, 0.0}, "backward_transmission: zero drive");
    const SteadyState s = steady_state(p);
    return std::norm(2.0 * p.kappa_ex * s.amp_b / p.eps_p);
}

// Sweep the probe over [lo, hi] keeping Δ_AC fixed.
inline Spectrum transmission_spectrum(const SystemParams& p, double lo, double hi,
                                      std::size_t n_points) {
    require(n_points >= 2, "transmission_spectrum: need at least 2 points");
    require(std::isfinite(lo) && std::isfinite(hi) && lo < hi,
            "transmission_spectrum: invalid range");
    Spectrum out;
    out.metadata = p;
    out.points.reserve(n_points);
    const double step = (hi - lo) / static_cast<double>(n_points - 1);
    for (std::size_t i = 0; i < n_points; ++i) {
        const double d = (i + 1 == n_points) ? hi : lo + step * static_cast<double>(i);
        out.points.push_back({d, forward_transmission(p.with_probe(d))});
    }
    return out;
}

// Relative tolerance on κ_ex for the closed form below.
inline constexpr double kCriticalTolerance = 1e-3;

// Forward transmission at ω_p = ω_C, valid only at critical coupling.
inline double on_resonance_transmission(cplx g_tw, double h, double kappa_i, double kappa_ex,
                                        double gamma, double delta_AC) {
    const double kcr = critical_kappa_ex(kappa_i, h);
    require(std::abs(kappa_ex - kcr) <= kCriticalTolerance * std::max(kcr, 1e-300),
            "on_resonance_transmission: kappa_ex is not at critical coupling");
    const double k = kappa_i + kappa_ex;
    const double g2 = std::norm(g_tw);
    const double s = 2.0 * (g_tw * g_tw).real();  // g² + g*²
    const double hk = h * h + k * k;
    const double num = 4.0 * kappa_i * kappa_i * g2 * g2 + h * h * s * s;
    const double re = gamma * hk + 2.0 * k * g2;
    const double im = delta_AC * hk - h * s;
    const double den = re * re + im * im;
    if (den == 0.0) return 0.0;
    return num / den;
}

inline double lorentzian_center(cplx g_tw, double h, double kappa) {
    const double s = 2.0 * (g_tw * g_tw).real();
    return h * s / (h * h + kappa * kappa);
}

// Half-width as printed: γ + (2κ|g|² + h(g²+g*²))/(h²+κ²). This is the
// Δ_AC of the blue-side half-maximum point, i.e. center + intrinsic HWHM.
inline double lorentzian_halfwidth(cplx g_tw, double h, double kappa, double gamma) {
    const double s = 2.0 * (g_tw * g_tw).real();
    return gamma + (2.0 * kappa * std::norm(g_tw) + h * s) / (h * h + kappa * kappa);
}

// HWHM of the on-resonance Lorentzian about its own center.
inline double lorentzian_intrinsic_halfwidth(cplx g_tw, double h, double kappa, double gamma) {
    return gamma + 2.0 * kappa * std::norm(g_tw) / (h * h + kappa * kappa);
}

// β ≃ 2|g_tw|²/κ = |g₀|²/κ for 2|g_tw|²/κ ≫ γ and h ≪ κ.
inline double lorentzian_halfwidth_approx(double g0, double kappa) { return g0 * g0 / kappa; }

inline double jc_transmission(cplx g_tw, double kappa, double gamma, double delta_AC) {
    const double c = std::norm(g_tw) / kappa;
    const double den = (gamma + c) * (gamma + c) + delta_AC * delta_AC;
    if (den == 0.0) return 0.0;
    return c * c / den;
}

namespace detail {

inline std::array<double, 3> normal_mode_weights(const Eigen::Vector3cd& v) {
    const double inv = 1.0 / std::sqrt(2.0);
    const double wA = std::norm((v(0) + v(1)) * inv);
    const double wB = std::norm((v(0) - v(1)) * inv);
    const double wS = std::norm(v(2));
    const double tot = wA + wB + wS;
    return {wA / tot, wB / tot, wS / tot};
}

}  // namespace detail

// Relative closeness below which two eigenvalues count as degenerate.
inline constexpr double kDegenerateEigenTolerance = 1e-9;

inline EigenSet eigenvalues(const SystemParams& p) {
    p.validate();
    Eigen::ComplexEigenSolver<Eigen::Matrix3cd> es(detail::effective_hamiltonian(p));
    if (es.info() != Eigen::Success) throw NumericalFailure("eigenvalues: solver failed");

    EigenSet out;
    for (int i = 0; i < 3; ++i) {
        Eigenmode& m = out.modes[static_cast<std::size_t>(i)];
        const cplx e = es.eigenvalues()(i);
        m.frequency = e.real();
        m.decay = -e.imag();
        m.vector = es.eigenvectors().col(i).normalized();
        m.weights = detail::normal_mode_weights(m.vector);
        constexpr std::array<EigenCharacter, 3> by_index{
            EigenCharacter::mode_A, EigenCharacter::mode_B, EigenCharacter::atom};
        const auto it = std::max_element(m.weights.begin(), m.weights.end());
        m.label = by_index[static_cast<std::size_t>(std::distance(m.weights.begin(), it))];
    }
    std::sort(out.modes.begin(), out.modes.end(),
              [](const Eigenmode& a, const Eigenmode& b) { return a.frequency < b.frequency; });

    double scale = std::abs(p.delta) + std::abs(p.delta_A) + std::abs(p.h) + p.kappa() +
                   p.gamma + std::abs(p.g_tw);
    if (scale == 0.0) scale = 1.0;
    for (std::size_t i = 0; i < 3; ++i) {
        for (std::size_t j = i + 1; j < 3; ++j) {
            const cplx ei{out.modes[i].frequency, out.modes[i].decay};
            const cplx ej{out.modes[j].frequency, out.modes[j].decay};
            if (std::abs(ei - ej) <= kDegenerateEigenTolerance * scale) {
                out.modes[i].label = EigenCharacter::unlabeled;
                out.modes[j].label = EigenCharacter::unlabeled;
            }
        }
    }
    return out;
}

struct PhotonNumbers {
    double n_a{0.0};
    double n_b{0.0};
};

inline PhotonNumbers intracavity_photons(const SystemParams& p) {
    const SteadyState s = steady_state(p);
    return {std::norm(s.amp_a), std::norm(s.amp_b)};
}

// Drive amplitude (real, positive) giving ⟨a†a⟩ = n0 for the given parameters.
// The response is linear in eps_p, so the 1-D inversion is a rescaling.
inline double calibrate_drive(SystemParams p, double n0) {
    require(n0 >= 0.0, "calibrate_drive: n0 must be >= 0");
    p.eps_p = 1.0;
    const double unit = intracavity_photons(p).n_a;
    require(unit > 0.0, "calibrate_drive: mode a is not driven for these parameters");
    return std::sqrt(n0 / unit);
}

}  // namespace toroidqed
