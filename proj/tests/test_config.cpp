#include <gtest/gtest.h>

#include <sstream>

#include "toroidqed/config.hpp"

using namespace toroidqed;

TEST(Config, DefaultsRoundTripExactly) {
    const RunConfig c;
    const std::string text = serialize(c);
    EXPECT_EQ(serialize(parse_config(text)), text);
    EXPECT_NO_THROW(validate(parse_config(text)));
}

TEST(Config, NonDefaultValuesRoundTrip) {
    RunConfig c;
    c.system.h = 0.1 + 0.2;  // not representable in short decimal
    c.geometry.w_z_um = 1.0 / 3.0;
    c.drop.fixed_rho_nm = 45.0;
    c.sweep.detunings = {-20.0, 0.0, 12.5};
    c.sweep.thresholds = {3, 9};
    c.detection.dead_time_model = DeadTimeModel::paralyzable;
    c.fit.model = "width";
    c.run.seed = 18446744073709551615ULL;
    const RunConfig d = parse_config(serialize(c));
    EXPECT_EQ(d.system.h, c.system.h);
    EXPECT_EQ(d.geometry.w_z_um, c.geometry.w_z_um);
    EXPECT_EQ(d.drop.fixed_rho_nm, c.drop.fixed_rho_nm);
    EXPECT_EQ(d.sweep.detunings, c.sweep.detunings);
    EXPECT_EQ(d.sweep.thresholds, c.sweep.thresholds);
    EXPECT_EQ(d.detection.dead_time_model, DeadTimeModel::paralyzable);
    EXPECT_EQ(d.run.seed, c.run.seed);
    EXPECT_EQ(serialize(d), serialize(c));
}

TEST(Config, DetuningKeyIsAtomCavityDetuning) {
    const RunConfig c = parse_config("[system]\ndelta_AC = 25\n");
    EXPECT_DOUBLE_EQ(c.system.delta_AC(), 25.0);
    EXPECT_DOUBLE_EQ(c.system.delta, 0.0);
}

TEST(Config, CommentsAndBlankLines) {
    const RunConfig c = parse_config("# header\n\n[atom]  # trailing\n  g = 12.5   # MHz\n");
    EXPECT_DOUBLE_EQ(c.atom.g, 12.5);
}

TEST(Config, RejectsUnknownAndMalformed) {
    auto error_of = [](const std::string& text) {
        try {
            parse_config(text);
        } catch (const ConfigError& e) {
            return std::string(e.what());
        }
        return std::string();
    };
    EXPECT_NE(error_of("[nope]\n").find("line 1"), std::string::npos);
    EXPECT_NE(error_of("[atom]\ng = 1\nbogus = 2\n").find("line 3"), std::string::npos);
    EXPECT_NE(error_of("[atom]\ng = 1\ng = 2\n").find("duplicate"), std::string::npos);
    EXPECT_FALSE(error_of("g = 1\n").empty());
    EXPECT_FALSE(error_of("[atom]\ng = fast\n").empty());
    EXPECT_FALSE(error_of("[atom]\ng = 1e999\n").empty());
    EXPECT_FALSE(error_of("[atom\n").empty());
    EXPECT_FALSE(error_of("[drop]\natoms = yes\n").empty());
    EXPECT_FALSE(error_of("[run]\njobs = -2\n").empty());
    EXPECT_FALSE(error_of("[detection]\ndead_time_model = sometimes\n").empty());
}

TEST(Config, Overrides) {
    RunConfig c;
    apply_override(c, "sweep.g0m=40, 60");
    apply_override(c, " atom.g = 7 ");
    EXPECT_EQ(c.sweep.g0m, (std::vector<double>{40.0, 60.0}));
    EXPECT_DOUBLE_EQ(c.atom.g, 7.0);
    EXPECT_THROW(apply_override(c, "atom.g"), ConfigError);
    EXPECT_THROW(apply_override(c, "g=1"), ConfigError);
    EXPECT_THROW(apply_override(c, "atom.q=1"), ConfigError);
}

TEST(Config, SemanticValidation) {
    RunConfig c;
    c.sweep.detunings = {0.0, 250.0};
    EXPECT_THROW(validate(c), ConfigError);
    c = {};
    c.system.kappa_i = -1.0;
    EXPECT_THROW(validate(c), ConfigError);
    c = {};
    c.fit.model = "voigt";
    EXPECT_THROW(validate(c), ConfigError);
    c = {};
    c.spectrum.hi = c.spectrum.lo;
    EXPECT_THROW(validate(c), ConfigError);
    c = {};
    c.sweep.thresholds = {0};
    EXPECT_THROW(validate(c), ConfigError);
}
