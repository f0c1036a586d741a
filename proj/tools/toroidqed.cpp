#include <fstream>
#include <iostream>
#include <iterator>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "toroidqed/cli.hpp"

using namespace toroidqed;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInput = 2;
constexpr int kExitNumerical = 3;

struct Options {
    std::string config_path;
    std::vector<std::string> sets;
    std::optional<std::string> out;
    std::optional<std::uint64_t> seed;
    std::optional<unsigned> jobs;
    std::string input;
};

RunConfig resolve(const Options& o) {
    RunConfig c = o.config_path.empty() ? RunConfig{} : load_config(o.config_path);
    for (const auto& s : o.sets) apply_override(c, s);
    if (o.out) c.run.out = *o.out;
    if (o.seed) c.run.seed = *o.seed;
    if (o.jobs) c.run.jobs = *o.jobs;
    validate(c);
    return c;
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot read input file '" + path + "'");
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_diagnostic(const RunConfig& cfg, const std::string& command, const std::string& kind,
                      const std::string& message) {
    nlohmann::ordered_json j;
    j["schema"] = "toroidqed.error/1";
    j["command"] = command;
    j["kind"] = kind;
    j["message"] = message;
    j["config_digest"] = config_digest(cfg);
    try {
        write_outputs(cfg.run.out, {{command + "_error.json", j.dump(2) + "\n"}});
    } catch (const std::exception& e) {
        std::cerr << "toroidqed: could not write diagnostic: " << e.what() << "\n";
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Cavity QED with a toroidal microresonator: spectra, transits, sweeps and fits"};
    app.require_subcommand(1);
    Options opt;

    auto add_common = [&](CLI::App* sub) {
        sub->add_option("-c,--config", opt.config_path, "configuration file")->check(CLI::ExistingFile);
        sub->add_option("--set", opt.sets, "override, section.key=value (repeatable)");
        sub->add_option("-o,--out", opt.out, "output directory");
        sub->add_option("--seed", opt.seed, "master seed");
        sub->add_option("-j,--jobs", opt.jobs, "worker threads")->check(CLI::PositiveNumber);
    };
    auto* spectrum = app.add_subcommand("spectrum", "forward and backward transmission versus probe detuning");
    auto* eigen = app.add_subcommand("eigen", "eigenvalues versus atom-cavity detuning");
    auto* drop = app.add_subcommand("drop", "one simulated cloud drop: counts, histogram, correlation");
    auto* sweep = app.add_subcommand("sweep", "event rate versus atom-cavity detuning");
    auto* fit = app.add_subcommand("fit", "fit a measured spectrum or detuning curve");
    auto* config = app.add_subcommand("config", "print the effective configuration");
    for (auto* s : {spectrum, eigen, drop, sweep, fit, config}) add_common(s);
    fit->add_option("-i,--input", opt.input, "CSV input")->required();
    std::string model;
    fit->add_option("-m,--model", model, "empty or width")->check(CLI::IsMember({"empty", "width"}));

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? kExitOk : kExitInput;
    }
    const std::string command = app.get_subcommands().front()->get_name();
    if (!model.empty()) opt.sets.push_back("fit.model=" + model);

    RunConfig cfg;
    try {
        cfg = resolve(opt);
    } catch (const std::exception& e) {
        std::cerr << "toroidqed: " << e.what() << "\n";
        return kExitInput;
    }
    if (command == "config") {
        std::cout << serialize(cfg);
        return kExitOk;
    }

    try {
        Outputs files;
        if (command == "spectrum") files = run_spectrum(cfg);
        else if (command == "eigen") files = run_eigen(cfg);
        else if (command == "drop") files = run_drop(cfg);
        else if (command == "sweep") files = run_sweep(cfg);
        else files = run_fit(cfg, read_file(opt.input), opt.input);
        write_outputs(cfg.run.out, files);
        for (const auto& f : files) std::cout << (std::filesystem::path(cfg.run.out) / f.name).string() << "\n";
    } catch (const DegenerateParameters& e) {
        std::cerr << "toroidqed: " << e.what() << "\n";
        write_diagnostic(cfg, command, "degenerate_parameters", e.what());
        return kExitNumerical;
    } catch (const NumericalFailure& e) {
        std::cerr << "toroidqed: " << e.what() << "\n";
        write_diagnostic(cfg, command, "numerical_failure", e.what());
        return kExitNumerical;
    } catch (const std::exception& e) {
        std::cerr << "toroidqed: " << e.what() << "\n";
        return kExitInput;
    }
    return kExitOk;
}
