// Copyright 2026 The vqfie Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Command-line front end: vqfie <subcommand> [--config PATH] [--seed INT]
// [--workers INT] [--out PATH] [--shots].
//
// Exit codes: 0 success, 2 configuration or input error, 3 numerical
// invariant violation.

#include <iostream>
#include <map>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "vqfie/experiments.hpp"
#include "vqfie/plot.hpp"

namespace {

struct CommonFlags {
    std::string config;
    std::optional<long long> seed;
    std::optional<int> workers;
    std::string out;
    bool shots = false;
    std::string csv;
    std::string kind;
};

void add_common(CLI::App *sub, CommonFlags &f) {
    sub->add_option("--config", f.config, "INI configuration file");
    sub->add_option("--seed", f.seed, "base seed (overrides run.seed)");
    sub->add_option("--workers", f.workers, "worker threads (overrides run.workers)");
    sub->add_option("--out", f.out, "output path (overrides run.out)");
    sub->add_flag("--shots", f.shots, "sampled readout instead of exact expectation values");
}

std::map<std::string, std::string> overrides_from(const CommonFlags &f) {
    std::map<std::string, std::string> o;
    if (f.seed) {
        o["run.seed"] = std::to_string(*f.seed);
    }
    if (f.workers) {
        o["run.workers"] = std::to_string(*f.workers);
    }
    if (!f.out.empty()) {
        o["run.out"] = f.out;
    }
    if (f.shots) {
        o["run.shots"] = "true";
    }
    if (!f.csv.empty()) {
        o["plot.input"] = f.csv;
    }
    if (!f.kind.empty()) {
        o["plot.kind"] = f.kind;
    }
    return o;
}

int run(const std::string &name, const CommonFlags &flags) {
    const auto file = flags.config.empty() ? std::map<std::string, std::string>{}
                                           : vqfie::read_config_file(flags.config);
    const vqfie::ExperimentConfig cfg = vqfie::build_config(name, file, overrides_from(flags));
    if (name == "plot") {
        if (cfg.plot_input.empty()) {
            throw vqfie::ConfigError("plot.input (or --csv) is required");
        }
        const std::string out = flags.out.empty() ? cfg.plot_input + ".svg" : flags.out;
        vqfie::plot(cfg.plot_input, cfg.plot_kind, out);
        std::cout << "wrote " << out << '\n';
        return 0;
    }
    const vqfie::ExperimentOutput result = vqfie::run_experiment(cfg);
    for (const std::string &path : vqfie::write_outputs(cfg, result)) {
        std::cout << "wrote " << path << '\n';
    }
    if (!result.invariant_violations.empty()) {
        for (const std::string &v : result.invariant_violations) {
            std::cerr << "invariant violation: " << v << '\n';
        }
        return 3;
    }
    return 0;
}

} // namespace

int main(int argc, char **argv) {
    CLI::App app{"variational QFI bound estimation"};
    app.require_subcommand(1);
    CommonFlags flags;
    std::string chosen;
    for (const std::string &name : vqfie::experiment_names()) {
        CLI::App *sub = app.add_subcommand(name);
        add_common(sub, flags);
        if (name == "plot") {
            sub->add_option("--csv", flags.csv, "input CSV");
            sub->add_option("--kind", flags.kind, "cost, bounds or variance");
        }
        sub->callback([&chosen, name] { chosen = name; });
    }
    app.add_subcommand("defaults", "print the default configuration")->callback([&chosen] {
        chosen = "defaults";
    });
    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError &e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }
    if (chosen == "defaults") {
        std::cout << vqfie::default_config_text();
        return 0;
    }
    try {
        return run(chosen, flags);
    } catch (const vqfie::Error &e) {
        std::cerr << "error: " << e.what() << '\n';
        return vqfie::exit_code_for(e);
    } catch (const std::exception &e) {
        std::cerr << "error: " << e.what() << '\n';
        return 3;
    }
}
