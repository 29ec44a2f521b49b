#include <exception>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "casolv/experiment.hpp"

int main(int argc, char** argv) {
    CLI::App app{"Casoratian identity verification and dhLV simulation"};
    app.require_subcommand(1);

    std::string config_path;
    std::string out_dir = "out";
    std::string mode_override;
    bool quiet = false;

    auto* run = app.add_subcommand("run", "Run one experiment config");
    run->add_option("config", config_path, "Experiment config (JSON)")->required();
    run->add_option("--out-dir", out_dir, "Report output directory");
    run->add_option("--mode", mode_override, "Arithmetic mode override")
        ->check(CLI::IsMember({"exact", "float"}));
    run->add_flag("--quiet", quiet, "Suppress the per-check summary");

    CLI11_PARSE(app, argc, argv);

    try {
        auto config = casolv::ExperimentConfig::from_file(config_path);
        if (!mode_override.empty()) {
            config.mode = mode_override == "float" ? casolv::ArithmeticMode::Float
                                                   : casolv::ArithmeticMode::Exact;
            config.echo["mode"] = mode_override;
        }
        auto result = casolv::run_experiment(config);
        casolv::write_report(result, out_dir);
        if (!quiet) {
            for (const auto& check : result.checks)
                std::cout << (check.pass ? "PASS " : "FAIL ") << check.name
                          << (check.detail.empty() ? "" : "  (" + check.detail + ")") << "\n";
            std::cout << (result.all_pass ? "all checks passed" : "some checks FAILED") << "\n";
        }
        return result.all_pass ? 0 : 1;
    } catch (const casolv::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
}
