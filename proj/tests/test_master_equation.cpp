#include <gtest/gtest.h>

#include <numbers>

#include "toroidqed/geometry.hpp"
#include "toroidqed/master_equation.hpp"

using namespace toroidqed;

namespace {

SystemParams coupled(double g0, double kx, double dac) {
    SystemParams p;
    auto [ki, kex] = critical_split(17.9, 4.9);
    p.kappa_i = ki;
    p.kappa_ex = kex;
    p.h = 4.9;
    p.gamma = 2.6;
    p.g_tw = traveling_wave_coupling(g0, 1.0, kx);
    return p.at_cavity(dac);
}

// Drive for a target forward-mode occupation of the empty, critically coupled cavity.
double drive_for(double n0) {
    SystemParams empty = coupled(0.0, 0.0, 0.0);
    return calibrate_drive(empty, n0);
}

}  // namespace

TEST(MasterEquation, WeakDriveMatchesLinearModel) {
    for (int n_max : {3, 4}) {
        for (double kx : {0.0, std::numbers::pi / 4.0, 1.1}) {
            for (double dac : {0.0, 40.0}) {
                SystemParams p = coupled(50.0, kx, dac);
                p.eps_p = drive_for(0.005);
                const MasterEquationResult me = master_equation_oracle(p, n_max);
                const double lin = forward_transmission(p);
                EXPECT_LT(me.n_a, 0.01);
                EXPECT_NEAR(me.t_f, lin, 0.01 * lin) << "n_max=" << n_max << " kx=" << kx;
                EXPECT_FALSE(me.cutoff_warning);
            }
        }
    }
}

TEST(MasterEquation, ExcitedPopulationNegligibleAtOperatingPhotonNumber) {
    for (double g0 : {50.0, 70.0}) {
        for (double kx : {0.0, std::numbers::pi / 4.0}) {
            SystemParams p = coupled(g0, kx, 0.0);
            p.eps_p = drive_for(0.3);
            const MasterEquationResult me = master_equation_oracle(p);
            EXPECT_LT(me.excited_population, 0.05) << g0 << " " << kx;
        }
    }
}

TEST(MasterEquation, ContrastDropsWhenSaturated) {
    SystemParams p = coupled(50.0, 0.0, 0.0);
    p.eps_p = drive_for(0.3);
    const double weak = master_equation_oracle(p, 5).t_f;
    p.eps_p = drive_for(2.0);
    const MasterEquationResult strong = master_equation_oracle(p, 5);
    EXPECT_LT(strong.top_level_population, 0.05);
    // Empty-cavity background is ~0 at critical coupling, so T_F is the contrast.
    EXPECT_LT(strong.t_f, weak);
}

TEST(MasterEquation, CutoffWarningAndBadInputs) {
    SystemParams p = coupled(0.0, 0.0, 0.0);
    p.eps_p = drive_for(3.0);
    EXPECT_TRUE(master_equation_oracle(p, 1).cutoff_warning);
    EXPECT_THROW(master_equation_oracle(p, 0), ContractError);
    EXPECT_THROW(master_equation_oracle(p, 7), ContractError);
    p.eps_p = 0.0;
    EXPECT_THROW(master_equation_oracle(p, 2), ContractError);
}
