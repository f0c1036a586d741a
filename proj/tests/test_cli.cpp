#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "toroidqed/cli.hpp"

using namespace toroidqed;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
    const fs::path p = fs::temp_directory_path() / ("toroidqed_cli_" + name + "_" + std::to_string(::getpid()));
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

int run(const std::string& args) {
    const std::string cmd = std::string(TOROIDQED_CLI) + " " + args + " >/dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

const OutputFile& file(const Outputs& o, const std::string& name) {
    for (const auto& f : o)
        if (f.name == name) return f;
    throw std::runtime_error("missing " + name);
}

}  // namespace

TEST(Cli, SpectrumMatchesSolver) {
    RunConfig c;
    c.spectrum = {-40.0, 40.0, 5};
    const auto table = parse_csv(file(run_spectrum(c), "spectrum.csv").content);
    ASSERT_EQ(table.rows.size(), 5u);
    EXPECT_EQ(table.columns, (std::vector<std::string>{"delta_mhz", "t_f", "t_b"}));
    SystemParams p = c.system;
    p.g_tw = traveling_wave_coupling(c.atom.g, 1.0, c.atom.kx);
    for (const auto& r : table.rows) EXPECT_NEAR(r[1], forward_transmission(p.with_probe(r[0])), 1e-11);
}

TEST(Cli, EigenBranchesAreContinuous) {
    RunConfig c;
    c.eigen = {-100.0, 100.0, 201};
    const auto j = nlohmann::json::parse(file(run_eigen(c), "eigen.json").content);
    const auto& pts = j["points"];
    ASSERT_EQ(pts.size(), 201u);
    // complex eigenvalues move by at most the detuning step per point along each tracked branch
    for (std::size_t i = 1; i < pts.size(); ++i)
        for (int b = 0; b < 3; ++b) {
            const auto& u = pts[i - 1]["branches"][b];
            const auto& v = pts[i]["branches"][b];
            const double jump = std::hypot(u["frequency"].get<double>() - v["frequency"].get<double>(),
                                           u["decay"].get<double>() - v["decay"].get<double>());
            EXPECT_LE(jump, 1.0 + 1e-9) << "point " << i << " branch " << b;
        }
    // far from resonance one branch sits at the bare atom frequency
    for (const auto* end : {&pts.front(), &pts.back()}) {
        const double dac = (*end)["delta_AC"].get<double>();
        bool found = false;
        for (const auto& br : (*end)["branches"])
            if (br["label"] == "atom") {
                found = true;
                EXPECT_NEAR(br["frequency"].get<double>(), -dac, 0.3 * std::abs(dac));
            }
        EXPECT_TRUE(found);
    }
}

TEST(Cli, DropOutputsAreConsistent) {
    RunConfig c;
    c.drop.window_ms = 2.0;
    const Outputs o = run_drop(c);
    const auto counts = parse_csv(file(o, "counts.csv").content);
    const auto hist = parse_csv(file(o, "histogram.csv").content);
    ASSERT_EQ(counts.rows.size(), 1000u);
    double bins = 0.0;
    for (const auto& r : hist.rows) bins += r[1];
    EXPECT_EQ(bins, 1000.0);
    const auto j = nlohmann::json::parse(file(o, "summary.json").content);
    EXPECT_EQ(j["bins"], 1000);
    EXPECT_EQ(j["schema"], "toroidqed.drop/1");
    EXPECT_EQ(file(o, "correlation.csv").content.rfind("# schema: toroidqed.correlation/1", 0), 0u);
}

TEST(Cli, FitReadsSpectrumOutput) {
    RunConfig c;
    c.atom.g = 0.0;
    const std::string spectrum = file(run_spectrum(c), "spectrum.csv").content;
    const auto j = nlohmann::json::parse(file(run_fit(c, spectrum, "s.csv"), "fit.json").content);
    EXPECT_NEAR(j["params"]["h"]["value"].get<double>(), 4.9, 1e-6);
    EXPECT_NEAR(j["kappa"].get<double>(), 17.9, 1e-6);
    EXPECT_EQ(j["input_digest"], hex64(fnv1a(spectrum)));
    EXPECT_TRUE(j["critical_gate"].get<bool>());
}

TEST(Cli, FitRejectsBadInput) {
    RunConfig c;
    EXPECT_THROW(run_fit(c, "a,b\n1,2\n", "x"), ContractError);
    EXPECT_THROW(run_fit(c, "delta,t_f\n1,oops\n", "x"), ContractError);
    EXPECT_THROW(run_fit(c, "", "x"), ContractError);
    c.fit.model = "width";
    EXPECT_THROW(run_fit(c, "delta_AC,value\n0,1\n10,1\n20,1\n30,1\n40,1\n", "x"), DegenerateParameters);
}

TEST(Cli, BinaryIsDeterministicAcrossJobs) {
    const fs::path dir = scratch("jobs");
    const std::string common = " --seed 11 --set sweep.drops=6 --set sweep.detunings=0,20,40 --set sweep.g0m=40,60";
    ASSERT_EQ(run("sweep -o " + (dir / "a").string() + " -j 1" + common), 0);
    ASSERT_EQ(run("sweep -o " + (dir / "b").string() + " -j 3" + common), 0);
    for (const char* f : {"sweep.csv", "sweep_summary.json"}) {
        const std::string a = slurp(dir / "a" / f);
        EXPECT_FALSE(a.empty());
        EXPECT_EQ(a, slurp(dir / "b" / f)) << f;
    }
    ASSERT_EQ(run("drop -o " + (dir / "c").string() + " -j 1 --seed 5"), 0);
    ASSERT_EQ(run("drop -o " + (dir / "d").string() + " -j 4 --seed 5"), 0);
    for (const char* f : {"counts.csv", "histogram.csv", "correlation.csv", "summary.json"})
        EXPECT_EQ(slurp(dir / "c" / f), slurp(dir / "d" / f)) << f;
    fs::remove_all(dir);
}

TEST(Cli, ConfigErrorsExitTwoWithoutOutput) {
    const fs::path dir = scratch("bad");
    const fs::path cfg = dir / "bad.ini";
    std::ofstream(cfg) << "[atom]\ng = 1\nwhat = 3\n";
    EXPECT_EQ(run("spectrum -c " + cfg.string() + " -o " + (dir / "o1").string()), 2);
    EXPECT_FALSE(fs::exists(dir / "o1"));
    EXPECT_EQ(run("spectrum --set atom.g=abc -o " + (dir / "o2").string()), 2);
    EXPECT_FALSE(fs::exists(dir / "o2"));
    EXPECT_EQ(run("sweep --set sweep.detunings=0,300 -o " + (dir / "o3").string()), 2);
    EXPECT_FALSE(fs::exists(dir / "o3"));
    EXPECT_EQ(run("fit -i " + (dir / "missing.csv").string() + " -o " + (dir / "o4").string()), 2);
    EXPECT_EQ(run("nonsense"), 2);
    fs::remove_all(dir);
}

TEST(Cli, ConfigFileAndPrintedConfigAgree) {
    const fs::path dir = scratch("cfg");
    RunConfig c;
    c.atom.g = 33.0;
    c.spectrum.points = 11;
    std::ofstream(dir / "run.ini") << serialize(c);
    ASSERT_EQ(run("spectrum -c " + (dir / "run.ini").string() + " -o " + (dir / "o").string()), 0);
    c.run.out = (dir / "o").string();
    EXPECT_EQ(slurp(dir / "o" / "spectrum.csv"), file(run_spectrum(c), "spectrum.csv").content);
    fs::remove_all(dir);
}

TEST(Cli, NumericalFailureExitsThreeWithDiagnostic) {
    const fs::path dir = scratch("num");
    std::ofstream(dir / "flat.csv") << "delta_AC,value\n0,1\n10,1\n20,1\n30,1\n40,1\n";
    EXPECT_EQ(run("fit -m width -i " + (dir / "flat.csv").string() + " -o " + (dir / "o").string()), 3);
    const auto j = nlohmann::json::parse(slurp(dir / "o" / "fit_error.json"));
    EXPECT_EQ(j["kind"], "degenerate_parameters");
    EXPECT_FALSE(fs::exists(dir / "o" / "fit.json"));
    fs::remove_all(dir);
}

TEST(Cli, WriteOutputsLeavesNoTemporaries) {
    const fs::path dir = scratch("atomic");
    write_outputs(dir / "x", {{"a.txt", "one"}, {"b.txt", "two"}});
    int n = 0;
    for ([[maybe_unused]] const auto& e : fs::directory_iterator(dir / "x")) ++n;
    EXPECT_EQ(n, 2);
    EXPECT_EQ(slurp(dir / "x" / "b.txt"), "two");
    fs::remove_all(dir);
}
