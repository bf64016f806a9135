#include "eitnet/config.hpp"
#include "eitnet/error.hpp"
#include "eitnet/study.hpp"

#include <CLI11.hpp>

#include <cstdint>
#include <iostream>
#include <optional>

namespace {

int validate_file(const std::string& path) {
    try {
        const eitnet::ExperimentConfig cfg = eitnet::load_config(path);
        const auto errors = cfg.validate();
        for (const auto& e : errors) std::cerr << path << ": " << e << "\n";
        if (!errors.empty()) return 2;
    } catch (const eitnet::ConfigError& e) {
        std::cerr << path << ": " << e.what() << "\n";
        return 2;
    }
    std::cout << path << ": ok\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"EIT resistor-network inversion and noise studies"};
    app.set_version_flag("--version", eitnet::software_version());
    app.require_subcommand(1);

    std::string config_path, output_dir = "out";
    std::optional<std::uint64_t> seed;
    int threads = 1;

    CLI::App* run = app.add_subcommand("run", "run the study described by a config (or manifest) file");
    run->add_option("-c,--config", config_path, "config file (JSON)")->required()->check(CLI::ExistingFile);
    run->add_option("-o,--output", output_dir, "artifact directory")->capture_default_str();
    run->add_option("-s,--seed", seed, "replaces noise.seed");
    run->add_option("-j,--threads", threads, "worker threads for Monte Carlo loops")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();

    CLI::App* validate = app.add_subcommand("validate", "check a config file without running it");
    validate->add_option("-c,--config", config_path, "config file (JSON)")->required()->check(CLI::ExistingFile);

    app.add_subcommand("list-studies", "print the available study kinds");

    CLI11_PARSE(app, argc, argv);

    if (app.got_subcommand("list-studies")) {
        for (const auto& [name, what] : eitnet::study_catalog()) std::cout << name << "\t" << what << "\n";
        return 0;
    }
    if (app.got_subcommand("validate")) return validate_file(config_path);

    try {
        const eitnet::ExperimentConfig cfg = eitnet::load_config(config_path);
        eitnet::RunOptions opts;
        opts.output_dir = output_dir;
        opts.seed = seed;
        opts.threads = threads;
        const eitnet::RunOutcome r = eitnet::run_study(cfg, opts);
        std::cout << "wrote " << r.manifest["artifacts"].size() + 1 << " files to " << output_dir << "\n";
        if (r.failures > 0) std::cout << r.failures << " samples failed (see manifest.json)\n";
    } catch (const eitnet::ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "fatal: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
