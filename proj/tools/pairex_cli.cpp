// pairex run|validate --config PATH [--out DIR] [--serial] [--seed INT]

#include "pairex/runner.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>

using pairex::cli::json;

namespace {

bool load(const std::string& path, json& doc) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        std::cerr << "config error: cannot open " << path << "\n";
        return false;
    }
    try {
        doc = json::parse(in);
    } catch (const json::parse_error& e) {
        std::cerr << "config error: " << path << " is not valid JSON: " << e.what() << "\n";
        return false;
    }
    return true;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"pair-excitation corrections to mean-field Bose dynamics"};
    app.require_subcommand(1);

    std::string config, out = "out";
    bool serial = false;
    std::uint64_t seed = 0;

    auto* run = app.add_subcommand("run", "run a scenario and write CSV/JSON outputs");
    run->add_option("--config", config, "JSON config")->required();
    run->add_option("--out", out, "output directory");
    run->add_flag("--serial", serial, "no worker threads");
    auto* seed_opt = run->add_option("--seed", seed, "overrides initial.seed");

    auto* val = app.add_subcommand("validate", "check a config without running it");
    val->add_option("--config", config, "JSON config")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? 0 : pairex::cli::kConfigError;
    }

    json doc;
    if (!load(config, doc)) return pairex::cli::kConfigError;

    if (*val) {
        auto rep = pairex::cli::validate(doc);
        for (const auto& n : rep.notes) std::cout << "note: " << n << "\n";
        if (!rep.ok) {
            for (const auto& e : rep.errors) std::cout << "error: " << e << "\n";
            return pairex::cli::kConfigError;
        }
        std::cout << "ok\n" << rep.derived.dump(2) << "\n";
        return pairex::cli::kOk;
    }

    pairex::cli::RunOptions opt;
    opt.out_dir = out;
    opt.serial = serial;
    if (*seed_opt) opt.seed = seed;
    for (int i = 0; i < argc; ++i) opt.command_line += (i ? " " : "") + std::string(argv[i]);
    try {
        return pairex::cli::run(doc, opt, std::cerr);
    } catch (const std::exception& e) {
        std::cerr << "numeric failure: " << e.what() << "\n";
        return pairex::cli::kNumericFailure;
    }
}
