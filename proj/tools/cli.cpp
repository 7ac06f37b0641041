// Copyright 2026 The gradphi Authors
// SPDX-License-Identifier: Apache-2.0
#include "cli.hpp"

#include <chrono>
#include <fstream>
#include <ostream>

#include <CLI11.hpp>

#include "gradphi/error.hpp"
#include "gradphi/experiments.hpp"

namespace gradphi {

int run_cli(int argc, char** argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Simulations of stochastic gradient interface dynamics", "gradphi"};
    app.set_version_flag("--version", std::string(version()));
    app.require_subcommand(1);

    std::string config_path, out_dir;
    int threads = -1;
    long long seed = -1;
    for (const auto& name : experiment_names()) {
        auto* sub = app.add_subcommand(name, "run the " + name + " experiment");
        sub->add_option("--config", config_path, "JSON configuration file")->required();
        sub->add_option("--out", out_dir, "output directory (default ./out)");
        sub->add_option("--threads", threads, "worker threads, 0 = all cores");
        sub->add_option("--seed", seed, "override the configured seed");
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        out << app.help();
        return 0;
    } catch (const CLI::CallForVersion& e) {
        out << version() << '\n';
        return 0;
    } catch (const CLI::ParseError& e) {
        err << "gradphi: " << e.what() << '\n';
        return 2;
    }
    const std::string name = app.get_subcommands().front()->get_name();

    ExperimentConfig cfg;
    try {
        std::ifstream f(config_path);
        if (!f) throw ConfigError("cannot open " + config_path);
        nlohmann::json j;
        try {
            f >> j;
        } catch (const nlohmann::json::exception& e) {
            throw ConfigError(std::string("invalid JSON: ") + e.what());
        }
        cfg = ExperimentConfig::from_json(j);
        if (!cfg.experiment.empty() && cfg.experiment != name) {
            throw ConfigError("config is for '" + cfg.experiment + "', not '" + name + "'");
        }
        cfg.experiment = name;
        if (!out_dir.empty()) cfg.out_dir = out_dir;
        if (threads >= 0) cfg.threads = threads;
        if (seed >= 0) cfg.seed = std::uint64_t(seed);
    } catch (const ConfigError& e) {
        err << "gradphi: " << e.what() << '\n';
        return 2;
    }

    try {
        const auto t0 = std::chrono::steady_clock::now();
        const ExperimentOutput res = run_experiment(cfg);
        const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        write_outputs(cfg, res, wall);
        for (const auto& [k, v] : res.checks.items()) {
            out << (v.get<bool>() ? "PASS " : "FAIL ") << k << '\n';
        }
        out << "wrote " << cfg.out_dir << '/' << res.csv_name << '\n';
        return res.ok() ? 0 : 1;
    } catch (const ConfigError& e) {
        err << "gradphi: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        err << "gradphi: " << e.what() << '\n';
        return 1;
    }
}

}  // namespace gradphi
