#include <CLI11.hpp>
#include <chrono>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include "timino/bench.hpp"
#include "timino/datagen.hpp"
#include "timino/discovery.hpp"
#include "timino/granger.hpp"
#include "timino/panel.hpp"

namespace {

using namespace timino;

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.6g", v);
    return buf;
}

Backend backend_from_string(const std::string& name) {
    if (name == "linear") return Backend::Linear;
    if (name == "gam") return Backend::Additive;
    if (name == "gp") return Backend::GP;
    throw CLI::ValidationError("--model must be linear, gam or gp");
}

IndepTest indep_from_string(const std::string& name) {
    if (name == "hsic") return IndepTest::HSIC;
    if (name == "crosscorr") return IndepTest::CrossCorr;
    throw CLI::ValidationError("--indep must be hsic or crosscorr");
}

std::string partial_dot(const SummaryGraph& graph, const std::vector<std::string>& names,
                        const std::set<int>& excluded) {
    std::ostringstream out;
    out << "digraph summary {\n";
    for (int i = 0; i < graph.node_count; ++i) {
        if (!excluded.count(i)) out << "  \"" << names[static_cast<size_t>(i)] << "\";\n";
    }
    for (const auto& [u, v] : graph.edges) {
        out << "  \"" << names[static_cast<size_t>(u)] << "\" -> \""
            << names[static_cast<size_t>(v)] << "\";\n";
    }
    out << "}\n";
    return out.str();
}

void print_rounds(const TimeSeriesPanel& panel, const DiscoveryResult& result) {
    std::cout << "# diagnostics (per elimination round)\n";
    for (size_t r = 0; r < result.rounds.size(); ++r) {
        const RoundRecord& round = result.rounds[r];
        std::cout << "#  round " << (r + 1) << ": active = {";
        for (size_t i = 0; i < round.active.size(); ++i) {
            std::cout << (i ? "," : "") << panel.names[static_cast<size_t>(round.active[i])];
        }
        std::cout << "}, chosen sink = "
                  << (round.chosen >= 0 ? panel.names[static_cast<size_t>(round.chosen)]
                                        : std::string("none"))
                  << "\n";
        for (const CandidateRecord& c : round.candidates) {
            std::cout << "#    " << panel.names[static_cast<size_t>(c.node)] << ": ";
            if (!c.feasible) {
                std::cout << "fit failed (" << c.note << ")\n";
            } else {
                std::cout << (c.accepted ? "accepted" : "rejected")
                          << ", min adjusted p = " << fmt(c.min_adjusted_p)
                          << ", order = " << c.order << "\n";
            }
        }
    }
}

int cmd_discover(const std::string& csv_path, DiscoveryConfig config) {
    const auto t0 = std::chrono::steady_clock::now();
    const TimeSeriesPanel panel = read_csv_file(csv_path);
    std::cout << "# timino discover: model=" << backend_name(config.backend)
              << " indep=" << (config.indep_method == IndepTest::HSIC ? "hsic" : "crosscorr")
              << " max-lag=" << config.max_lag << " alpha=" << fmt(config.alpha)
              << " instantaneous=" << (config.instantaneous ? "on" : "off")
              << " partial=" << config.partial_max_exclude << " seed=" << config.seed << "\n";

    const DiscoveryResult result = config.partial_max_exclude > 0
                                       ? discover_partial(panel, config)
                                       : discover_full(panel, config);
    switch (result.verdict) {
        case DiscoveryVerdict::Decided:
            std::cout << "verdict: decided\n" << to_dot(result.graph, panel.names);
            break;
        case DiscoveryVerdict::Undecided:
            std::cout << "verdict: undecided: " << result.reason << "\n";
            break;
        case DiscoveryVerdict::Partial: {
            std::cout << "verdict: partial (excluded:";
            for (int e : result.excluded) {
                std::cout << ' ' << panel.names[static_cast<size_t>(e)];
            }
            std::cout << ")\n" << partial_dot(result.graph, panel.names, result.excluded);
            for (const auto& [w, s] : result.unresolved) {
                std::cout << "# unresolved: " << panel.names[static_cast<size_t>(w)] << " ?- "
                          << panel.names[static_cast<size_t>(s)] << "\n";
            }
            break;
        }
    }
    print_rounds(panel, result);
    const std::chrono::duration<double> dt = std::chrono::steady_clock::now() - t0;
    std::cout << "# wall-clock seconds: " << fmt(dt.count()) << "\n";
    return 0;
}

int cmd_granger(const std::string& csv_path, const std::string& method, int max_lag, double alpha,
                bool pairwise_report) {
    const auto t0 = std::chrono::steady_clock::now();
    const TimeSeriesPanel panel = read_csv_file(csv_path);
    std::cout << "# timino granger: method=" << method << " max-lag=" << max_lag
              << " alpha=" << fmt(alpha) << "\n";
    GrangerResult result;
    if (method == "linear") {
        result = granger_linear(panel, max_lag, alpha);
    } else if (method == "nonlinear") {
        result = granger_nonlinear_graph(panel, max_lag, alpha);
    } else {
        throw CLI::ValidationError("--method must be linear or nonlinear");
    }
    std::cout << to_dot(result.graph, panel.names);
    if (pairwise_report || method == "nonlinear") {
        for (const GrangerVerdict& v : result.verdicts) {
            std::cout << "# " << panel.names[static_cast<size_t>(v.pair.first)] << " -> "
                      << panel.names[static_cast<size_t>(v.pair.second)] << ": ";
            if (v.degenerate) {
                std::cout << "degenerate fit, reported as no edge\n";
            } else {
                std::cout << "F = " << fmt(v.statistic) << ", p = " << fmt(v.p_value) << ", "
                          << (v.causes ? "edge" : "no edge") << "\n";
            }
        }
    }
    const std::chrono::duration<double> dt = std::chrono::steady_clock::now() - t0;
    std::cout << "# wall-clock seconds: " << fmt(dt.count()) << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"TiMINo causal discovery for multivariate time series"};
    app.require_subcommand(1);

    // shared flags
    std::string model = "linear", indep = "hsic", instantaneous = "on", confirm = "off";
    int max_lag = 2, partial = 0, threads = 0;
    double alpha = 0.05;
    std::uint64_t seed = 0;

    auto add_common = [&](CLI::App* cmd, bool with_confirm) {
        cmd->add_option("--model", model, "regression backend: linear | gam | gp");
        cmd->add_option("--indep", indep, "independence test: hsic | crosscorr");
        cmd->add_option("--max-lag", max_lag, "maximal lag order p")->check(CLI::PositiveNumber);
        cmd->add_option("--alpha", alpha, "test level");
        cmd->add_option("--partial", partial,
                        "partial discovery: max size of the exclusion subset");
        cmd->add_option("--seed", seed, "run seed");
        cmd->add_option("--instantaneous", instantaneous,
                        "include instantaneous regressors: on | off");
        if (with_confirm) {
            cmd->add_option("--confirm", confirm,
                            "re-check the accepted model with permutation HSIC: on | off");
        }
    };

    // discover
    std::string csv_path;
    CLI::App* discover = app.add_subcommand("discover", "fit a TiMINo and output the summary graph");
    discover->add_option("csv", csv_path, "input panel (CSV)")->required();
    add_common(discover, true);

    // granger
    std::string granger_csv, granger_method = "linear";
    bool pairwise = false;
    CLI::App* granger = app.add_subcommand("granger", "Granger-causality baselines");
    granger->add_option("csv", granger_csv, "input panel (CSV)")->required();
    granger->add_option("--method", granger_method, "linear | nonlinear");
    granger->add_option("--max-lag", max_lag, "lag order p");
    granger->add_option("--alpha", alpha, "test level");
    granger->add_flag("--pairwise", pairwise, "print one report per ordered pair");

    // bench
    std::string bench_experiment, methods_csv = "timino-lin,granger-lin", lengths_csv, out_path;
    int reps = 100;
    CLI::App* bench = app.add_subcommand("bench", "seeded experiment reproduction");
    bench->add_option("experiment", bench_experiment, "E1..E6")->required();
    bench->add_option("--reps", reps, "repetitions per cell");
    bench->add_option("--methods", methods_csv,
                      "comma list: timino-lin,timino-gam,timino-gp,granger-lin,granger-nonlin");
    bench->add_option("--lengths", lengths_csv, "comma list of series lengths (sweep)");
    bench->add_option("--out", out_path, "also write the machine-readable CSV here");
    bench->add_option("--threads", threads, "worker pool size (0 = hardware)");
    add_common(bench, false);

    // gen
    std::string gen_experiment, gen_out;
    int gen_length = 0;
    double e1_a = 0.5;
    CLI::App* gen = app.add_subcommand("gen", "dump a generated panel as CSV");
    gen->add_option("experiment", gen_experiment, "E1..E6")->required();
    gen->add_option("--length", gen_length, "series length (0 = experiment default)");
    gen->add_option("--seed", seed, "generator seed");
    gen->add_option("--a", e1_a, "E1 confounder coefficient");
    gen->add_option("--out", gen_out, "output file (default: stdout)");

    CLI11_PARSE(app, argc, argv);

    try {
        auto make_config = [&]() {
            timino::DiscoveryConfig config;
            config.backend = backend_from_string(model);
            config.indep_method = indep_from_string(indep);
            config.max_lag = max_lag;
            config.alpha = alpha;
            config.instantaneous = instantaneous != "off";
            config.partial_max_exclude = partial;
            config.seed = seed;
            config.confirm_permutation = confirm == "on";
            return config;
        };

        if (discover->parsed()) return cmd_discover(csv_path, make_config());
        if (granger->parsed()) {
            return cmd_granger(granger_csv, granger_method, max_lag, alpha, pairwise);
        }
        if (bench->parsed()) {
            timino::BenchOptions options;
            options.experiment = timino::experiment_from_string(bench_experiment);
            options.reps = reps;
            options.config = make_config();
            options.threads = threads;
            options.seed = seed;
            std::stringstream ms(methods_csv);
            std::string tok;
            while (std::getline(ms, tok, ',')) {
                if (!tok.empty()) options.methods.push_back(timino::bench_method_from_string(tok));
            }
            std::vector<int> lengths;
            if (!lengths_csv.empty()) {
                std::stringstream ls(lengths_csv);
                while (std::getline(ls, tok, ',')) {
                    if (!tok.empty()) lengths.push_back(std::stoi(tok));
                }
            } else {
                lengths.push_back(0);
            }
            std::string csv = timino::bench_csv_header();
            for (int len : lengths) {
                options.length = len;
                const timino::BenchOutcome outcome = timino::run_bench(options);
                std::cout << timino::bench_table(outcome) << "\n";
                csv += timino::bench_csv_rows(outcome);
            }
            std::cout << csv;
            if (!out_path.empty()) {
                std::ofstream f(out_path);
                if (!f) throw std::runtime_error("cannot write " + out_path);
                f << csv;
            }
            return 0;
        }
        if (gen->parsed()) {
            timino::ExperimentSpec spec;
            spec.id = timino::experiment_from_string(gen_experiment);
            spec.length = gen_length;
            spec.seed = seed;
            spec.params["a"] = e1_a;
            const timino::ExperimentData data = timino::generate(spec);
            if (gen_out.empty()) {
                timino::write_csv(data.panel, std::cout);
            } else {
                timino::write_csv_file(data.panel, gen_out);
            }
            return 0;
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
