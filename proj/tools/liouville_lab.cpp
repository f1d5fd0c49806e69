// Batch experiment runner for the Liouville boundary-expansion laboratory.
//
//   liouville_lab run <config.toml> [--jobs N] [--out DIR]
//   liouville_lab report <DIR>
//   liouville_lab schema

#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "liouville/run/runner.hpp"

int main(int argc, char** argv) {
    CLI::App app{"liouville-lab: Liouville blow-up solver and boundary-rate experiments"};
    app.require_subcommand(1);

    std::string config_path, out_dir, report_dir;
    int jobs = 0;

    auto* run_cmd = app.add_subcommand("run", "execute the experiments of a config file");
    run_cmd->add_option("config", config_path, "TOML config path")->required();
    run_cmd->add_option("--jobs", jobs, "worker pool size (overrides config)");
    run_cmd->add_option("--out", out_dir, "output directory (overrides config)");

    auto* report_cmd = app.add_subcommand("report", "summarize a finished run directory");
    report_cmd->add_option("dir", report_dir, "run directory with manifest.json")->required();

    app.add_subcommand("schema", "print the config file schema");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (run_cmd->parsed()) {
            std::ifstream in(config_path);
            if (!in) {
                std::cerr << "error: cannot open config '" << config_path << "'\n";
                return 2;
            }
            std::stringstream ss;
            ss << in.rdbuf();
            liouville::run::RunConfig cfg;
            try {
                cfg = liouville::run::parse_config(ss.str());
            } catch (const liouville::run::ConfigError& e) {
                std::cerr << "config error: " << e.what() << "\n";
                return 2;
            }
            auto outcome = liouville::run::run_all(cfg, out_dir, jobs, std::cout);
            return outcome.exit_code;
        }
        if (report_cmd->parsed()) {
            return liouville::run::report_run(report_dir, std::cout);
        }
        std::cout << liouville::run::config_schema();
        return 0;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
