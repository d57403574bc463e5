// Command-line entry point: validate and execute run-configuration files.

#include <exception>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "beltrami/runner.hpp"

int main(int argc, char** argv) {
    CLI::App app{"Beltrami equation solver, variation checks, and extremal search"};
    app.require_subcommand(1);

    std::string config_path;
    std::string out_override;
    unsigned threads = 0;

    CLI::App* run_cmd = app.add_subcommand("run", "execute a run configuration");
    run_cmd->add_option("config", config_path, "path to the configuration file")->required();
    run_cmd->add_option("--out", out_override, "override the configured output directory");
    run_cmd->add_option("--threads", threads, "worker threads for transforms");

    CLI::App* validate_cmd = app.add_subcommand("validate", "check a configuration without running");
    validate_cmd->add_option("config", config_path, "path to the configuration file")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (validate_cmd->parsed()) {
            const beltrami::RunConfig cfg = beltrami::parse_config_file(config_path);
            const std::vector<std::string> diags = beltrami::validate(cfg);
            for (const std::string& d : diags) std::cout << "diagnostic: " << d << "\n";
            if (diags.empty()) {
                std::cout << "config ok\n";
                return 0;
            }
            return 2;
        }

        beltrami::RunConfig cfg = beltrami::parse_config_file(config_path);
        if (!out_override.empty()) cfg.out_dir = out_override;
        if (threads > 0) cfg.threads = threads;
        const beltrami::RunOutcome outcome = beltrami::run(cfg);
        for (const std::string& line : outcome.summary) std::cout << line << "\n";
        return outcome.exit_code;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return beltrami::classify_error_exit(e);
    }
}
