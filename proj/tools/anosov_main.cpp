// Command-line front end: four subcommands sharing one config format.
//
//   anosov bounds      --config cfg.ini [--out DIR] [--seed S] [--threads T]
//   anosov spectrum    ...
//   anosov determinant ...
//   anosov lynorm      ...
//
// Results land in <out>/<hash>/ named by the content hash of the config,
// seed, and subcommand.  Exit: 0 checks pass, 1 check failure, 2 usage,
// 3 resource refusal.
#include <cstdio>
#include <string>

#include "CLI11.hpp"
#include "anosov/driver.hpp"
#include "anosov/run_config.hpp"

int main(int argc, char** argv) {
    CLI::App app{"anisotropic transfer-operator toolkit"};
    app.require_subcommand(1);

    std::string config_path;
    std::string out_dir;
    std::uint64_t seed = 0;
    int threads = 0;
    bool seed_set = false;

    app.add_option("--config", config_path, "run configuration file")
        ->required()
        ->check(CLI::ExistingFile);
    app.add_option("--out", out_dir, "output base directory (overrides config)");
    auto* seed_opt = app.add_option("--seed", seed, "random seed (overrides config)");
    app.add_option("--threads", threads, "worker threads (overrides config)");

    for (const char* name : {"bounds", "spectrum", "determinant", "lynorm"})
        app.add_subcommand(name)->fallthrough();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }
    seed_set = seed_opt->count() > 0;

    std::string subcommand = app.get_subcommands().front()->get_name();

    anosov::RunConfig cfg;
    try {
        cfg = anosov::load_config(config_path);
    } catch (const std::exception& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return 2;
    }

    anosov::CliOverrides ov;
    ov.out_base = out_dir;
    ov.seed = seed;
    ov.seed_set = seed_set;
    ov.threads = threads;

    anosov::DriverResult res = anosov::run_subcommand(subcommand, cfg, ov);
    if (!res.run_dir.empty()) std::printf("%s\n", res.run_dir.c_str());
    return res.exit_code;
}
