// geometry.hpp — toroid geometry, evanescent mode functions and the
// position-dependent atom–mode coupling.

#pragma once

#include <cmath>
#include <complex>
#include <numbers>
#include <string>
#include <string_view>

#include "toroidqed/errors.hpp"

namespace toroidqed {

struct ModeGeometry {
    double D_um{44.0};          // major diameter
    double d_um{6.0};           // minor diameter
    double lambda_nm{852.36};   // Cs D2
    double w_z_um{0.40};        // vertical 1/e half-width of f(ρ,z); calibrated to a ~2 µs transit
    double g0_surface{70.0};    // normal-mode coupling at ρ = 0, MHz

    // ƛ = λ/2π, the evanescent decay length (nm)
    double alpha_inv_nm() const { return lambda_nm / (2.0 * std::numbers::pi); }
    // circumferential wavenumber (1/nm)
    double k_per_nm() const { return 2.0 * std::numbers::pi / lambda_nm; }
    double circumference_nm() const { return std::numbers::pi * D_um * 1e3; }

    void validate() const {
        require(D_um > d_um && d_um > 0.0, "ModeGeometry: need D > d > 0");
        require(w_z_um > 0.0, "ModeGeometry: w_z must be positive");
        require(g0_surface >= 0.0, "ModeGeometry: g0_surface must be >= 0");
        require(lambda_nm > 0.0, "ModeGeometry: wavelength must be positive");
    }

    // Surface coupling that makes the coupling at ρ = rho_nm equal to g.
    static double surface_coupling_for(double g_at_rho, double rho_nm, double lambda_nm = 852.36) {
        return g_at_rho * std::exp(rho_nm * 2.0 * std::numbers::pi / lambda_nm);
    }
};

// Cycling-transition preset: g₀ᵗʷ = 80 MHz, so g₀ = √2·80.
inline ModeGeometry cycling_transition_geometry() {
    ModeGeometry g;
    g.g0_surface = std::sqrt(2.0) * 80.0;
    return g;
}

struct AtomPosition {
    double rho_nm{0.0};  // radial distance from the toroid surface
    double x_nm{0.0};    // along the circumference
    double z_nm{0.0};    // vertical, relative to the mode center
};

inline double mode_profile(const ModeGeometry& geom, const AtomPosition& pos) {
    require(pos.rho_nm >= 0.0, "mode_profile: rho must be >= 0");
    const double wz = geom.w_z_um * 1e3;
    return std::exp(-pos.rho_nm / geom.alpha_inv_nm()) * std::exp(-pos.z_nm * pos.z_nm / (2.0 * wz * wz));
}

struct NormalModeFunctions {
    double psi_A{0.0};  // f·cos(kx)
    double psi_B{0.0};  // f·sin(kx)
};

inline NormalModeFunctions normal_mode_functions(const ModeGeometry& geom, const AtomPosition& pos) {
    const double f = mode_profile(geom, pos);
    const double kx = geom.k_per_nm() * pos.x_nm;
    return {f * std::cos(kx), f * std::sin(kx)};
}

struct Coupling {
    double g_A{0.0};
    double g_B{0.0};
    std::complex<double> g_tw{};  // (g₀/√2)·f·e^{ikx}
};

inline Coupling coupling_at(const ModeGeometry& geom, const AtomPosition& pos) {
    const NormalModeFunctions psi = normal_mode_functions(geom, pos);
    Coupling c;
    c.g_A = geom.g0_surface * psi.psi_A;
    c.g_B = geom.g0_surface * psi.psi_B;
    c.g_tw = std::complex<double>(c.g_A, c.g_B) / std::sqrt(2.0);
    return c;
}

// Coupling for a given kx directly (radial/vertical profile factored in as f).
inline std::complex<double> traveling_wave_coupling(double g0, double f, double kx) {
    return (g0 * f / std::sqrt(2.0)) * std::polar(1.0, kx);
}

enum class CgMethod {
    quoted_ratio,        // quoted 70/80
    quoted_normal_mode,  // 70 / (√2·80): the same numbers with g₀ = √2 g₀ᵗʷ
    rms_pi,             // sqrt of mean |CG|² over π transitions, m_F = −4..4
    mean_pi,            // mean |CG| over π transitions
    stretched           // reference cycling transition
};

inline CgMethod parse_cg_method(std::string_view s) {
    if (s == "quoted-ratio") return CgMethod::quoted_ratio;
    if (s == "quoted-normal-mode") return CgMethod::quoted_normal_mode;
    if (s == "rms-pi") return CgMethod::rms_pi;
    if (s == "mean-pi") return CgMethod::mean_pi;
    if (s == "stretched") return CgMethod::stretched;
    throw ContractError("cg_average: unknown method '" + std::string(s) + "'");
}

// Factor relative to the stretched F=4, m=4 → F'=5, m'=5 transition. For
// F → F+1 π transitions |⟨F m; 1 0 | F+1 m⟩|² = ((F+1)² − m²)/((F+1)(2F+1)).
inline double cg_average(CgMethod method) {
    constexpr int F = 4;
    auto cg2 = [](int m) { return double((F + 1) * (F + 1) - m * m) / double((F + 1) * (2 * F + 1)); };
    switch (method) {
        case CgMethod::quoted_ratio: return 70.0 / 80.0;
        case CgMethod::quoted_normal_mode: return 70.0 / (std::sqrt(2.0) * 80.0);
        case CgMethod::stretched: return 1.0;
        case CgMethod::rms_pi: {
            double acc = 0.0;
            for (int m = -F; m <= F; ++m) acc += cg2(m);
            return std::sqrt(acc / (2 * F + 1));
        }
        case CgMethod::mean_pi: {
            double acc = 0.0;
            for (int m = -F; m <= F; ++m) acc += std::sqrt(cg2(m));
            return acc / (2 * F + 1);
        }
    }
    throw ContractError("cg_average: unknown method");
}

inline double cg_average(std::string_view method) { return cg_average(parse_cg_method(method)); }

// Atoms entering closer than rho_min are pulled onto the surface.
struct VdwCutoff {
    double rho_min_nm{45.0};

    bool valid(const AtomPosition& pos) const { return pos.rho_nm >= rho_min_nm; }
    bool valid(double rho_nm) const { return rho_nm >= rho_min_nm; }

    // Largest |g| (normal-mode units) an admitted atom can reach.
    double max_coupling(const ModeGeometry& geom) const {
        return geom.g0_surface * std::exp(-rho_min_nm / geom.alpha_inv_nm());
    }
};

inline VdwCutoff vdw_cutoff(const ModeGeometry& geom, double rho_min_nm = 45.0) {
    geom.validate();
    require(rho_min_nm >= 0.0, "vdw_cutoff: rho_min must be >= 0");
    return VdwCutoff{rho_min_nm};
}

}  // namespace toroidqed
