#include <cstdint>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "plastafem/run.hpp"

int main(int argc, char** argv) {
    CLI::App app{"Adaptive finite elements for elastoplasticity with hardening"};
    app.require_subcommand(1);

    CLI::App* run = app.add_subcommand("run", "Run a configured problem");
    std::string config_path;
    std::string mode = "adaptive";
    std::optional<std::string> out_dir;
    std::optional<std::uint64_t> seed;
    run->add_option("config", config_path, "Problem configuration file")->required()->check(CLI::ExistingFile);
    run->add_option("--mode", mode, "adaptive, uniform or verify")
        ->check(CLI::IsMember({"adaptive", "uniform", "verify"}));
    run->add_option("--out", out_dir, "Output directory (overrides output.dir)");
    run->add_option("--seed", seed, "Seed for randomized diagnostics (overrides diagnostics.seed)");

    CLI11_PARSE(app, argc, argv);

    plastafem::ProblemConfig config;
    try {
        config = plastafem::load_config(config_path);
    } catch (const plastafem::ConfigError& e) {
        std::cerr << "error: config: " << e.what() << '\n';
        return 2;
    }
    const std::uint64_t s = seed.value_or(config.seed);
    const std::filesystem::path dir = out_dir ? std::filesystem::path(*out_dir) : std::filesystem::path(config.output_dir);
    return plastafem::run_command(config, plastafem::parse_run_mode(mode), dir, s, std::cout, std::cerr);
}
