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

/**
 * @file experiments.hpp
 * Experiment configuration, runners and CSV output used by the command-line
 * tool.
 *
 * Configuration is INI-style text with one section per module. Every key has
 * a default (see default_config_text()); unknown keys are rejected. Each
 * output CSV starts with a '#' metadata block echoing the effective
 * configuration, followed by a header row and the data rows. Work units are
 * seeded with derive_seed(seed, unit) and written in unit order, so the body
 * does not depend on the worker count.
 */
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <map>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "optimize.hpp"
#include "qfi.hpp"
#include "vqse.hpp"

#ifndef VQFIE_VERSION
#define VQFIE_VERSION "0.1.0"
#endif

namespace vqfie {

inline std::string version_string() { return std::string("vqfie ") + VQFIE_VERSION; }

/// Default configuration, one "section.key" per entry.
inline const std::map<std::string, std::string> &default_settings() {
    static const std::map<std::string, std::string> d = {
        {"run.seed", "1"},
        {"run.workers", "1"},
        {"run.out", "vqfie.csv"},
        {"run.shots", "false"},
        {"run.n_runs", "1000000"},
        {"state.n", "4"},
        {"state.input", "random"},
        {"state.purity", "0.95"},
        {"state.theta", "0.3"},
        {"state.trials", "1"},
        {"bounds.delta", "0.1"},
        {"bounds.m", "4"},
        {"bounds.log_base", "e"},
        {"ansatz.layers", "3"},
        {"optimizer.method", "cobyla"},
        {"optimizer.max_iters", "200"},
        {"optimizer.restarts", "30"},
        {"optimizer.initial_step", "0.5"},
        {"optimizer.shrink", "0.5"},
        {"optimizer.learning_rate", "0.1"},
        {"optimizer.convergence_tol", "1e-8"},
        {"vqse.eigensolver", "exact"},
        {"vqse.layers", "2"},
        {"vqse.iterations", "200"},
        {"vqse.restarts", "30"},
        {"variance.n_min", "2"},
        {"variance.n_max", "8"},
        {"variance.deltas", "0.1,0.5,1.0"},
        {"variance.samples", "200"},
        {"compare.sizes", "4,6"},
        {"compare.points", "12"},
        {"compare.dx2", "0.1"},
        {"compare.t", "200"},
        {"compare.spectrum", "random"},
        {"plot.input", ""},
        {"plot.kind", "cost"},
    };
    return d;
}

/// Experiment-specific defaults layered over default_settings().
inline std::map<std::string, std::string> experiment_defaults(const std::string &experiment) {
    if (experiment == "m-sweep") {
        return {{"bounds.m", "1,2,3,4"}};
    }
    if (experiment == "purity-sweep") {
        return {{"state.purity", "0.75,0.80,0.85,0.90,0.95"}};
    }
    if (experiment == "optimize") {
        return {{"state.purity", "1"}};
    }
    return {};
}

inline const std::vector<std::string> &experiment_names() {
    static const std::vector<std::string> names = {
        "estimate", "optimize", "m-sweep", "purity-sweep", "variance-scan", "bound-compare", "plot"};
    return names;
}

inline std::string default_config_text() {
    std::ostringstream os;
    std::string section;
    for (const auto &[key, value] : default_settings()) {
        const std::string sec = key.substr(0, key.find('.'));
        if (sec != section) {
            os << (section.empty() ? "" : "\n") << '[' << sec << "]\n";
            section = sec;
        }
        os << key.substr(key.find('.') + 1) << " = " << value << '\n';
    }
    return os.str();
}

enum class InputKind { random, zero, ghz, maximally_mixed };
enum class SpectrumModel { random, depolarized };

/// Validated, typed view of the effective settings.
struct ExperimentConfig {
    std::string experiment = "estimate";
    std::map<std::string, std::string> settings;

    std::uint64_t seed = 1;
    int workers = 1;
    std::string out_path;
    bool shots_mode = false;
    std::int64_t n_runs = 1000000;

    int n = 4;
    InputKind input = InputKind::random;
    std::vector<double> purities;
    double theta = 0.3;
    int trials = 1;

    double delta = 0.1;
    std::vector<int> m_values;
    LogBase log_base = LogBase::natural;

    int layers = 3;
    OptimizerConfig optimizer;

    bool vqse_eigensolver = false;
    int vqse_layers = 2;
    int vqse_iterations = 200;
    int vqse_restarts = 30;

    int var_n_min = 2;
    int var_n_max = 8;
    std::vector<double> var_deltas;
    int var_samples = 200;

    std::vector<int> compare_sizes;
    int compare_points = 12;
    double compare_dx2 = 0.1;
    int compare_t = 200;
    SpectrumModel compare_spectrum = SpectrumModel::random;

    std::string plot_input;
    std::string plot_kind;
};

namespace detail {

inline std::string trim(const std::string &s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) {
        return {};
    }
    return s.substr(b, s.find_last_not_of(" \t\r\n") - b + 1);
}

inline std::vector<std::string> split_list(const std::string &s) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (!item.empty()) {
            out.push_back(item);
        }
    }
    return out;
}

class Reader {
  public:
    explicit Reader(const std::map<std::string, std::string> &s) : s_(s) {}

    const std::string &raw(const std::string &key) const { return s_.at(key); }

    double real(const std::string &key) const {
        try {
            std::size_t pos = 0;
            const double v = std::stod(raw(key), &pos);
            if (pos != raw(key).size() || !std::isfinite(v)) {
                throw std::invalid_argument(key);
            }
            return v;
        } catch (const std::exception &) {
            throw ConfigError(key + ": expected a real number, got '" + raw(key) + "'");
        }
    }

    long long integer(const std::string &key) const {
        try {
            std::size_t pos = 0;
            const long long v = std::stoll(raw(key), &pos);
            if (pos != raw(key).size()) {
                throw std::invalid_argument(key);
            }
            return v;
        } catch (const std::exception &) {
            throw ConfigError(key + ": expected an integer, got '" + raw(key) + "'");
        }
    }

    bool boolean(const std::string &key) const {
        const std::string &v = raw(key);
        if (v == "true" || v == "1" || v == "yes") {
            return true;
        }
        if (v == "false" || v == "0" || v == "no") {
            return false;
        }
        throw ConfigError(key + ": expected true/false, got '" + v + "'");
    }

    std::vector<double> reals(const std::string &key) const {
        std::vector<double> out;
        for (const std::string &item : split_list(raw(key))) {
            try {
                out.push_back(std::stod(item));
            } catch (const std::exception &) {
                throw ConfigError(key + ": bad list entry '" + item + "'");
            }
        }
        if (out.empty()) {
            throw ConfigError(key + ": list is empty");
        }
        return out;
    }

    std::vector<int> integers(const std::string &key) const {
        std::vector<int> out;
        for (const std::string &item : split_list(raw(key))) {
            try {
                out.push_back(std::stoi(item));
            } catch (const std::exception &) {
                throw ConfigError(key + ": bad list entry '" + item + "'");
            }
        }
        if (out.empty()) {
            throw ConfigError(key + ": list is empty");
        }
        return out;
    }

  private:
    const std::map<std::string, std::string> &s_;
};

inline void require(bool ok, const std::string &message) {
    if (!ok) {
        throw ConfigError(message);
    }
}

} // namespace detail

/// Parse INI text into "section.key" settings. Unknown keys are errors.
inline std::map<std::string, std::string> parse_config_text(const std::string &text) {
    boost::property_tree::ptree tree;
    std::istringstream is(text);
    try {
        boost::property_tree::ini_parser::read_ini(is, tree);
    } catch (const boost::property_tree::ini_parser_error &e) {
        throw ConfigError(std::string("config: ") + e.what());
    }
    std::map<std::string, std::string> out;
    for (const auto &[section, body] : tree) {
        if (body.empty()) {
            throw ConfigError("config: key '" + section + "' must live inside a [section]");
        }
        for (const auto &[key, value] : body) {
            const std::string full = section + "." + key;
            if (!default_settings().contains(full)) {
                throw ConfigError("config: unknown key '" + full + "'");
            }
            out[full] = detail::trim(value.data());
        }
    }
    return out;
}

inline std::map<std::string, std::string> read_config_file(const std::string &path) {
    std::ifstream in(path);
    if (!in) {
        throw ConfigError("config: cannot open '" + path + "'");
    }
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config_text(ss.str());
}

/// Defaults, then experiment defaults, then file values, then overrides.
inline ExperimentConfig build_config(const std::string &experiment,
                                     const std::map<std::string, std::string> &file_values,
                                     const std::map<std::string, std::string> &overrides = {}) {
    using detail::require;
    ExperimentConfig c;
    c.experiment = experiment;
    c.settings = default_settings();
    for (const auto &[k, v] : experiment_defaults(experiment)) {
        c.settings[k] = v;
    }
    for (const auto &[k, v] : file_values) {
        c.settings[k] = v;
    }
    for (const auto &[k, v] : overrides) {
        require(default_settings().contains(k), "unknown override '" + k + "'");
        c.settings[k] = v;
    }
    const detail::Reader r(c.settings);

    const long long seed = r.integer("run.seed");
    require(seed >= 0, "run.seed must be >= 0");
    c.seed = static_cast<std::uint64_t>(seed);
    c.workers = static_cast<int>(r.integer("run.workers"));
    require(c.workers >= 1, "run.workers must be >= 1");
    c.out_path = r.raw("run.out");
    c.shots_mode = r.boolean("run.shots");
    c.n_runs = r.integer("run.n_runs");
    require(c.n_runs >= 1, "run.n_runs must be >= 1");

    c.n = static_cast<int>(r.integer("state.n"));
    require(c.n >= 1 && c.n <= 10, "state.n must be in [1, 10]");
    const std::string &input = r.raw("state.input");
    if (input == "random") {
        c.input = InputKind::random;
    } else if (input == "zero") {
        c.input = InputKind::zero;
    } else if (input == "ghz") {
        c.input = InputKind::ghz;
    } else if (input == "maximally_mixed") {
        c.input = InputKind::maximally_mixed;
    } else {
        throw ConfigError("state.input must be random, zero, ghz or maximally_mixed");
    }
    c.purities = r.reals("state.purity");
    for (double p : c.purities) {
        require(p > 0.0 && p <= 1.0, "state.purity entries must be in (0, 1]");
    }
    c.theta = r.real("state.theta");
    c.trials = static_cast<int>(r.integer("state.trials"));
    require(c.trials >= 1, "state.trials must be >= 1");

    c.delta = r.real("bounds.delta");
    require(c.delta != 0.0, "bounds.delta must be nonzero");
    c.m_values = r.integers("bounds.m");
    const std::string &lb = r.raw("bounds.log_base");
    require(lb == "e" || lb == "2", "bounds.log_base must be e or 2");
    c.log_base = lb == "e" ? LogBase::natural : LogBase::two;

    c.layers = static_cast<int>(r.integer("ansatz.layers"));
    require(c.layers >= 1, "ansatz.layers must be >= 1");
    try {
        c.optimizer.method = parse_method(r.raw("optimizer.method"));
    } catch (const InvalidArgument &) {
        throw ConfigError("optimizer.method must be cobyla, nelder_mead or grad_descent");
    }
    c.optimizer.max_iters = static_cast<int>(r.integer("optimizer.max_iters"));
    c.optimizer.restarts = static_cast<int>(r.integer("optimizer.restarts"));
    c.optimizer.initial_step = r.real("optimizer.initial_step");
    c.optimizer.shrink = r.real("optimizer.shrink");
    c.optimizer.learning_rate = r.real("optimizer.learning_rate");
    c.optimizer.convergence_tol = r.real("optimizer.convergence_tol");
    c.optimizer.seed = c.seed;
    c.optimizer.workers = c.workers;
    try {
        c.optimizer.validate();
    } catch (const InvalidArgument &e) {
        throw ConfigError(e.what());
    }

    const std::string &es = r.raw("vqse.eigensolver");
    require(es == "exact" || es == "vqse", "vqse.eigensolver must be exact or vqse");
    c.vqse_eigensolver = es == "vqse";
    c.vqse_layers = static_cast<int>(r.integer("vqse.layers"));
    c.vqse_iterations = static_cast<int>(r.integer("vqse.iterations"));
    c.vqse_restarts = static_cast<int>(r.integer("vqse.restarts"));
    require(c.vqse_layers >= 1 && c.vqse_iterations >= 1 && c.vqse_restarts >= 1,
            "vqse.layers, vqse.iterations and vqse.restarts must be >= 1");

    c.var_n_min = static_cast<int>(r.integer("variance.n_min"));
    c.var_n_max = static_cast<int>(r.integer("variance.n_max"));
    require(c.var_n_min >= 2 && c.var_n_max >= c.var_n_min && c.var_n_max <= 10,
            "variance.n_min/n_max must satisfy 2 <= n_min <= n_max <= 10");
    c.var_deltas = r.reals("variance.deltas");
    c.var_samples = static_cast<int>(r.integer("variance.samples"));
    require(c.var_samples >= 2, "variance.samples must be >= 2");

    c.compare_sizes = r.integers("compare.sizes");
    for (int s : c.compare_sizes) {
        require(s >= 2 && s <= 8, "compare.sizes entries must be in [2, 8]");
    }
    c.compare_points = static_cast<int>(r.integer("compare.points"));
    require(c.compare_points >= 1, "compare.points must be >= 1");
    c.compare_dx2 = r.real("compare.dx2");
    require(c.compare_dx2 > 0.0, "compare.dx2 must be > 0");
    c.compare_t = static_cast<int>(r.integer("compare.t"));
    require(c.compare_t >= 0, "compare.t must be >= 0");
    const std::string &sm = r.raw("compare.spectrum");
    require(sm == "random" || sm == "depolarized", "compare.spectrum must be random or depolarized");
    c.compare_spectrum = sm == "random" ? SpectrumModel::random : SpectrumModel::depolarized;

    c.plot_input = r.raw("plot.input");
    c.plot_kind = r.raw("plot.kind");

    // Cross-field checks for the experiment that will run.
    const bool uses_state = experiment == "estimate" || experiment == "optimize" ||
                            experiment == "m-sweep" || experiment == "purity-sweep";
    if (uses_state) {
        const int d = 1 << c.n;
        for (int m : c.m_values) {
            require(m >= 1 && m <= d, "bounds.m entries must be in [1, 2^n]");
        }
        for (double p : c.purities) {
            require(p >= 1.0 / d - 1e-12, "state.purity entries must be >= 1/2^n");
        }
    }
    if (experiment != "estimate" && experiment != "plot" && experiment != "variance-scan" &&
        experiment != "bound-compare") {
        require(c.n >= 2, "state.n must be >= 2 for the ansatz");
    }
    if (experiment == "variance-scan" || experiment == "bound-compare") {
        for (int m : c.m_values) {
            require(m >= 1 && m <= 4, "bounds.m entries must be in [1, 4] for scans over n");
        }
    }
    return c;
}

/// A CSV table: header plus already-formatted rows.
struct Table {
    std::vector<std::string> header;
    std::vector<std::string> rows;
};

inline std::string metadata_block(const ExperimentConfig &c) {
    std::ostringstream os;
    os << "# version: " << version_string() << '\n';
    os << "# experiment: " << c.experiment << '\n';
    os << "# seed: " << c.seed << '\n';
    os << "# log_base.strata_count: " << to_string(c.log_base) << '\n';
    os << "# log_base.scan_layers: 2 (ceil(log2 n))\n";
    os << "# iteration: one objective evaluation for cobyla/nelder_mead, one step for "
          "grad_descent\n";
    os << "# readout: " << (c.shots_mode ? "shots n_runs=" + std::to_string(c.n_runs) : "exact")
       << '\n';
    for (const auto &[k, v] : c.settings) {
        os << "# config." << k << " = " << v << '\n';
    }
    return os.str();
}

inline std::string render_csv(const ExperimentConfig &c, const Table &t) {
    std::ostringstream os;
    os << metadata_block(c);
    for (std::size_t i = 0; i < t.header.size(); ++i) {
        os << (i ? "," : "") << t.header[i];
    }
    os << '\n';
    for (const std::string &row : t.rows) {
        os << row << '\n';
    }
    return os.str();
}

inline void write_text(const std::string &path, const std::string &body) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw ConfigError("cannot write '" + path + "'");
    }
    out << body;
}

/// "dir/name.csv" -> "dir/name.<tag>.csv".
inline std::string sibling_path(const std::string &path, const std::string &tag) {
    const auto slash = path.find_last_of('/');
    const auto dot = path.find_last_of('.');
    if (dot == std::string::npos || (slash != std::string::npos && dot < slash)) {
        return path + "." + tag;
    }
    return path.substr(0, dot) + "." + tag + path.substr(dot);
}

struct ExperimentOutput {
    Table main;
    std::vector<std::pair<std::string, Table>> extra; ///< (tag, table)
    std::vector<std::string> invariant_violations;
};

namespace detail {

inline std::vector<std::string> split_header(const char *h) { return split_list(h); }

inline std::string join_header(std::initializer_list<const char *> parts) {
    std::string out;
    for (const char *p : parts) {
        out += out.empty() ? "" : ",";
        out += p;
    }
    return out;
}

inline DensityMatrix make_input(const ExperimentConfig &c, int n, double purity,
                                std::uint64_t seed) {
    switch (c.input) {
    case InputKind::zero:
        return basis_state(n, 0);
    case InputKind::ghz:
        return ghz(n);
    case InputKind::maximally_mixed:
        return maximally_mixed(n);
    case InputKind::random:
        break;
    }
    if (purity >= 1.0 - 1e-12) {
        return random_state_with_rank(n, 1, seed);
    }
    return random_state_with_purity(n, purity, seed);
}

/// Spectrum (1 - w) e_1 + w / d with the requested purity.
inline std::vector<double> depolarized_spectrum(std::size_t d, double purity) {
    const double c = static_cast<double>(d - 1) / static_cast<double>(d);
    const double w = 1.0 - std::sqrt(std::max(0.0, 1.0 - (1.0 - purity) / c));
    std::vector<double> out(d, w / static_cast<double>(d));
    out[0] += 1.0 - w;
    return out;
}

inline std::string fmt(double v) { return csv::num(v); }

} // namespace detail

/// One row per (state, m) with the full bounds report.
inline ExperimentOutput run_estimate(const ExperimentConfig &c) {
    const Generator g = collective_z(c.n);
    const auto units = c.purities.size() * static_cast<std::size_t>(c.trials);
    std::vector<std::vector<std::string>> rows(units);
    std::vector<std::vector<std::string>> violations(units);
    parallel_for(units, c.workers, [&](std::size_t u) {
        const double target = c.purities[u / static_cast<std::size_t>(c.trials)];
        const std::uint64_t seed = derive_seed(c.seed, u);
        const DensityMatrix probe = detail::make_input(c, c.n, target, seed);
        const DensityMatrix rt = encode_phase(probe, g, c.theta);
        const DensityMatrix re = encode_phase(probe, g, c.theta + c.delta);
        const SpectralDecomposition spec = spectrum(rt);
        const double f = fidelity(rt, re);
        TraceFunctionals tf = trace_functionals(rt, re);
        if (c.shots_mode) {
            auto est = [&](SwapKind kind, const DensityMatrix &a, const DensityMatrix &b,
                           std::uint64_t k) {
                const double v =
                    swap_test_estimate(kind, a, b, c.n_runs, derive_seed(seed, k)).estimate;
                return std::clamp(v, 0.0, 1.0);
            };
            const double overlap = est(SwapKind::pair, rt, re, 1);
            const double quartic = std::min(est(SwapKind::quartic, rt, re, 2), overlap * overlap);
            tf = trace_functionals_from_values(overlap, quartic, est(SwapKind::purity, rt, re, 3),
                                               est(SwapKind::purity, re, rt, 4));
        }
        std::optional<VqseResult> vq;
        for (int m : c.m_values) {
            FidelityBounds fb;
            if (c.vqse_eigensolver) {
                if (!vq || static_cast<int>(vq->labels.size()) < m) {
                    VqseConfig vc;
                    vc.optimizer.max_iters = c.vqse_iterations;
                    vc.optimizer.restarts = c.vqse_restarts;
                    vc.readout = c.shots_mode ? Readout::shots : Readout::exact;
                    vc.n_runs = c.n_runs;
                    const int mmax = *std::max_element(c.m_values.begin(), c.m_values.end());
                    vq = run_vqse(rt, mmax, build_hw_efficient(std::max(2, c.n), c.vqse_layers),
                                  vc, derive_seed(seed, 5));
                }
                VqseResult head = *vq;
                head.eigenvalue_estimates.resize(static_cast<std::size_t>(m));
                head.eigenvectors = vq->eigenvectors.leftCols(m);
                fb = vqse_fidelity_bounds(head, re);
            } else {
                fb = tmatrix_fidelity(build_tmatrix(spec, re, m));
            }
            fb.lower = std::clamp(fb.lower, 0.0, 1.0);
            fb.upper = std::clamp(fb.upper, 0.0, 1.0);
            BoundsReport rep = make_report(c.delta, m, spec.rank, f, fb, tf);
            rep.exact_qfi = exact_qfi(spec, g.matrix);
            rows[u].push_back(std::to_string(u) + "," + detail::fmt(purity(probe)) + "," +
                              to_csv_row(rep));
            if (!c.shots_mode && !c.vqse_eigensolver && !rep.sandwich_holds(1e-8)) {
                violations[u].push_back("unit " + std::to_string(u) + " m=" + std::to_string(m) +
                                        ": H <= I <= J violated");
            }
        }
    });
    ExperimentOutput out;
    out.main.header = detail::split_list(std::string("unit,purity,") + bounds_csv_header());
    for (std::size_t u = 0; u < units; ++u) {
        out.main.rows.insert(out.main.rows.end(), rows[u].begin(), rows[u].end());
        out.invariant_violations.insert(out.invariant_violations.end(), violations[u].begin(),
                                        violations[u].end());
    }
    return out;
}

/// Result of training one probe circuit.
struct VqfieRun {
    OptResult opt;
    BoundsReport at_optimum;
    double ceiling = 0.0; ///< largest QFI reachable from the input spectrum
    double input_purity = 0.0;
};

/// Maximize H_delta over ansatz parameters for one input state and m.
inline VqfieRun train_probe(const DensityMatrix &input, const Generator &g, int layers, int m,
                            double theta, double delta, const OptimizerConfig &oc) {
    const Ansatz ansatz = build_hw_efficient(input.n_qubits(), layers);
    const Objective cost = [&](std::span<const double> alpha) {
        const DensityMatrix probe = apply(ansatz, alpha, input);
        return h_delta(encode_phase(probe, g, theta), encode_phase(probe, g, theta + delta), m,
                       delta);
    };
    VqfieRun run;
    run.opt = maximize(cost, static_cast<std::size_t>(ansatz.param_count()), oc);
    const DensityMatrix probe = apply(ansatz, run.opt.best_params, input);
    run.at_optimum = compute_bounds(encode_phase(probe, g, theta),
                                    encode_phase(probe, g, theta + delta), m, delta, &g);
    const SpectralDecomposition spec = spectrum(input);
    std::vector<double> lam(spec.eigenvalues.data(),
                            spec.eigenvalues.data() + spec.eigenvalues.size());
    const double total = std::accumulate(lam.begin(), lam.end(), 0.0);
    for (double &x : lam) {
        x /= total;
    }
    run.ceiling = max_qfi_mixed(lam, g.matrix);
    run.input_purity = purity(input);
    return run;
}

/// Probe training over every (purity, m) pair: optimize, m-sweep and
/// purity-sweep differ only in their defaults.
inline ExperimentOutput run_optimize(const ExperimentConfig &c) {
    const Generator g = collective_z(c.n);
    ExperimentOutput out;
    out.main.header = detail::split_list("unit,purity,m,restart,iteration,cost");
    Table summary;
    summary.header = detail::split_list(
        std::string("unit,purity,m,best_cost,ceiling,restart_index,objective_calls,") +
        bounds_csv_header());
    std::size_t unit = 0;
    for (double target : c.purities) {
        // One input per purity, shared by every m so the m-sweep compares
        // like with like.
        const DensityMatrix input = target >= 1.0 - 1e-12 && c.input == InputKind::random
                                        ? basis_state(c.n, 0)
                                        : detail::make_input(c, c.n, target, c.seed);
        for (int m : c.m_values) {
            OptimizerConfig oc = c.optimizer;
            oc.seed = derive_seed(c.seed, unit);
            const VqfieRun run = train_probe(input, g, c.layers, m, c.theta, c.delta, oc);
            const std::string prefix =
                std::to_string(unit) + "," + detail::fmt(run.input_purity) + "," + std::to_string(m);
            const std::string hist = history_csv_rows(run.opt);
            std::istringstream lines(hist);
            std::string line;
            while (std::getline(lines, line)) {
                out.main.rows.push_back(prefix + "," + line);
            }
            summary.rows.push_back(prefix + "," + detail::fmt(run.opt.best_value) + "," +
                                   detail::fmt(run.ceiling) + "," +
                                   std::to_string(run.opt.restart_index) + "," +
                                   std::to_string(run.opt.objective_calls) + "," +
                                   to_csv_row(run.at_optimum));
            if (!run.at_optimum.sandwich_holds(1e-8)) {
                out.invariant_violations.push_back("unit " + std::to_string(unit) +
                                                   ": H <= I <= J violated at the optimum");
            }
            if (run.opt.best_value > run.ceiling + 1e-6) {
                out.invariant_violations.push_back("unit " + std::to_string(unit) +
                                                   ": cost exceeds the spectral ceiling");
            }
            ++unit;
        }
    }
    out.extra.emplace_back("summary", std::move(summary));
    return out;
}

struct VarianceCell {
    int n = 0;
    double delta = 0.0;
    double variance = 0.0;
    double mean = 0.0;
};

/// Var[(C(a) - C(a'))/n^2] for uniform parameter pairs, C the TQFI lower
/// bound with input |0...0>. The same pairs are used for every delta.
inline std::vector<VarianceCell> variance_scan(int n_min, int n_max, std::span<const double> deltas,
                                               int samples, int m, double theta,
                                               std::uint64_t seed, int workers) {
    std::vector<VarianceCell> cells;
    for (int n = n_min; n <= n_max; ++n) {
        const Ansatz ansatz = build_hw_efficient(n, log2_layers(n));
        const Generator g = collective_z(n);
        const DensityMatrix input = basis_state(n, 0);
        const auto p = static_cast<std::size_t>(ansatz.param_count());
        const int mm = std::min(m, 1 << n);
        // diffs[s][k]: sample s, delta k.
        std::vector<std::vector<double>> diffs(static_cast<std::size_t>(samples));
        parallel_for(diffs.size(), workers, [&](std::size_t s) {
            const std::uint64_t unit = (static_cast<std::uint64_t>(n) << 32) | s;
            const std::vector<double> a = initial_params(2 * p, seed, unit);
            const std::span<const double> alpha(a.data(), p);
            const std::span<const double> alpha2(a.data() + p, p);
            const DensityMatrix r1 = encode_phase(apply(ansatz, alpha, input), g, theta);
            const DensityMatrix r2 = encode_phase(apply(ansatz, alpha2, input), g, theta);
            const SpectralDecomposition s1 = spectrum(r1);
            const SpectralDecomposition s2 = spectrum(r2);
            for (double d : deltas) {
                const double c1 = tqfi_bounds(s1, encode_phase(r1, g, d), mm, d).lower;
                const double c2 = tqfi_bounds(s2, encode_phase(r2, g, d), mm, d).lower;
                diffs[s].push_back((c1 - c2) / (static_cast<double>(n) * n));
            }
        });
        for (std::size_t k = 0; k < deltas.size(); ++k) {
            double mean = 0.0;
            for (const auto &row : diffs) {
                mean += row[k];
            }
            mean /= static_cast<double>(samples);
            double var = 0.0;
            for (const auto &row : diffs) {
                var += (row[k] - mean) * (row[k] - mean);
            }
            var /= static_cast<double>(samples - 1);
            cells.push_back({n, deltas[k], var, mean});
        }
    }
    return cells;
}

/// Least-squares slope of y against x.
inline double fitted_slope(std::span<const double> x, std::span<const double> y) {
    const auto k = static_cast<double>(x.size());
    const double mx = std::accumulate(x.begin(), x.end(), 0.0) / k;
    const double my = std::accumulate(y.begin(), y.end(), 0.0) / k;
    double sxy = 0.0;
    double sxx = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxy += (x[i] - mx) * (y[i] - my);
        sxx += (x[i] - mx) * (x[i] - mx);
    }
    return sxy / sxx;
}

inline ExperimentOutput run_variance_scan(const ExperimentConfig &c) {
    const auto cells = variance_scan(c.var_n_min, c.var_n_max, c.var_deltas, c.var_samples,
                                     c.m_values.front(), c.theta, c.seed, c.workers);
    ExperimentOutput out;
    out.main.header = detail::split_list("n,delta,var_delta_C_over_n2,log_var,mean_delta_C_over_n2");
    for (const auto &cell : cells) {
        out.main.rows.push_back(std::to_string(cell.n) + "," + detail::fmt(cell.delta) + "," +
                                detail::fmt(cell.variance) + "," +
                                detail::fmt(std::log(cell.variance)) + "," +
                                detail::fmt(cell.mean));
    }
    Table slopes;
    slopes.header = detail::split_list("delta,slope_log_var_vs_n");
    for (double d : c.var_deltas) {
        std::vector<double> xs;
        std::vector<double> ys;
        for (const auto &cell : cells) {
            if (cell.delta == d) {
                xs.push_back(cell.n);
                ys.push_back(std::log(cell.variance));
            }
        }
        slopes.rows.push_back(detail::fmt(d) + "," +
                              (xs.size() >= 2 ? detail::fmt(fitted_slope(xs, ys)) : "nan"));
    }
    out.extra.emplace_back("slopes", std::move(slopes));
    return out;
}

struct CompareRow {
    int n = 0;
    double purity = 0.0;
    BoundsReport bounds;
    PurityLossReport loss;
    double exact = 0.0;
};

/// Bounds at the optimal mixed probe for one (n, purity) point.
inline CompareRow compare_point(int n, double target_purity, SpectrumModel model, double theta,
                                double dx2, int m, int strata, std::uint64_t seed) {
    const auto d = std::size_t{1} << n;
    std::vector<double> lam;
    if (model == SpectrumModel::random) {
        Rng rng(seed);
        lam = spectrum_with_purity(d, target_purity, rng);
    } else {
        lam = detail::depolarized_spectrum(d, target_purity);
    }
    const Generator g = collective_z(n);
    const DensityMatrix probe = optimal_mixed_probe(lam, g.matrix);
    CompareRow row;
    row.n = n;
    row.purity = purity(probe);
    // delta = (Delta x)^2.
    row.bounds = compute_bounds(encode_phase(probe, g, theta), encode_phase(probe, g, theta + dx2),
                                std::min<int>(m, static_cast<int>(d)), dx2, &g);
    row.loss = purity_loss_bound(probe, g, theta, dx2, strata);
    row.exact = *row.bounds.exact_qfi;
    return row;
}

/// Purity grid strictly inside (1/n, 1).
inline std::vector<double> compare_purities(int n, int points) {
    const double lo = 1.0 / n;
    std::vector<double> out;
    for (int k = 0; k < points; ++k) {
        out.push_back(lo + (1.0 - lo) * (k + 0.5) / points);
    }
    return out;
}

inline ExperimentOutput run_bound_compare(const ExperimentConfig &c) {
    struct Unit {
        int n;
        double purity;
    };
    std::vector<Unit> units;
    for (int n : c.compare_sizes) {
        for (double p : compare_purities(n, c.compare_points)) {
            units.push_back({n, p});
        }
    }
    std::vector<CompareRow> rows(units.size());
    parallel_for(units.size(), c.workers, [&](std::size_t u) {
        const int strata = strata_count(units[u].n, c.compare_t, c.log_base);
        rows[u] = compare_point(units[u].n, units[u].purity, c.compare_spectrum, c.theta,
                                c.compare_dx2, c.m_values.front(), strata, derive_seed(c.seed, u));
    });
    ExperimentOutput out;
    out.main.header = detail::split_list(
        "n,purity,tqfi_lower,ssqfi_lower,H,J,purity_loss,exact,L_exact,strata,tqfi_upper,"
        "ssqfi_upper");
    for (std::size_t u = 0; u < rows.size(); ++u) {
        const CompareRow &r = rows[u];
        out.main.rows.push_back(
            std::to_string(r.n) + "," + detail::fmt(r.purity) + "," +
            detail::fmt(r.bounds.tqfi_lower) + "," + detail::fmt(r.bounds.ssqfi_lower) + "," +
            detail::fmt(r.bounds.H_delta) + "," + detail::fmt(r.bounds.J_delta) + "," +
            detail::fmt(r.loss.L_stratified) + "," + detail::fmt(r.exact) + "," +
            detail::fmt(r.loss.L_exact) + "," + std::to_string(r.loss.strata) + "," +
            detail::fmt(r.bounds.tqfi_upper) + "," + detail::fmt(r.bounds.ssqfi_upper));
        if (!r.bounds.sandwich_holds(1e-8)) {
            out.invariant_violations.push_back("point " + std::to_string(u) +
                                               ": H <= I <= J violated");
        }
    }
    return out;
}

/// Dispatch on c.experiment (plot is handled separately).
inline ExperimentOutput run_experiment(const ExperimentConfig &c) {
    if (c.experiment == "estimate") {
        return run_estimate(c);
    }
    if (c.experiment == "optimize" || c.experiment == "m-sweep" || c.experiment == "purity-sweep") {
        return run_optimize(c);
    }
    if (c.experiment == "variance-scan") {
        return run_variance_scan(c);
    }
    if (c.experiment == "bound-compare") {
        return run_bound_compare(c);
    }
    throw ConfigError("unknown experiment '" + c.experiment + "'");
}

/// Write the main table to c.out_path and extras next to it. Returns the
/// paths written.
inline std::vector<std::string> write_outputs(const ExperimentConfig &c, const ExperimentOutput &o) {
    std::vector<std::string> paths{c.out_path};
    write_text(c.out_path, render_csv(c, o.main));
    for (const auto &[tag, table] : o.extra) {
        paths.push_back(sibling_path(c.out_path, tag));
        write_text(paths.back(), render_csv(c, table));
    }
    return paths;
}

/// Lines of a CSV after the metadata block.
inline std::string csv_body(const std::string &text) {
    std::istringstream is(text);
    std::ostringstream os;
    std::string line;
    while (std::getline(is, line)) {
        if (!line.starts_with('#')) {
            os << line << '\n';
        }
    }
    return os.str();
}

/// Process exit code for an error: 2 for bad input, 3 for numerics.
inline int exit_code_for(const Error &e) {
    if (dynamic_cast<const ConfigError *>(&e) || dynamic_cast<const InvalidArgument *>(&e) ||
        dynamic_cast<const MalformedCSV *>(&e) || dynamic_cast<const MOutOfRange *>(&e) ||
        dynamic_cast<const DimMismatch *>(&e) || dynamic_cast<const PurityOutOfRange *>(&e) ||
        dynamic_cast<const ParamLengthMismatch *>(&e)) {
        return 2;
    }
    return 3;
}

} // namespace vqfie
