#include "timino/bench.hpp"

#include <cstdio>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "timino/granger.hpp"
#include "timino/stats.hpp"

namespace timino {

BenchMethod bench_method_from_string(const std::string& name) {
    if (name == "timino-lin" || name == "timino-linear") return BenchMethod::TiminoLinear;
    if (name == "timino-gam") return BenchMethod::TiminoAdditive;
    if (name == "timino-gp") return BenchMethod::TiminoGP;
    if (name == "granger-lin" || name == "granger-linear") return BenchMethod::GrangerLinear;
    if (name == "granger-nonlin" || name == "granger-nonlinear") {
        return BenchMethod::GrangerNonlinear;
    }
    throw std::invalid_argument("unknown method: " + name);
}

const char* bench_method_name(BenchMethod method) {
    switch (method) {
        case BenchMethod::TiminoLinear: return "timino-lin";
        case BenchMethod::TiminoAdditive: return "timino-gam";
        case BenchMethod::TiminoGP: return "timino-gp";
        case BenchMethod::GrangerLinear: return "granger-lin";
        case BenchMethod::GrangerNonlinear: return "granger-nonlin";
    }
    return "?";
}

RepOutcome score_discovery(const DiscoveryResult& result, const GroundTruth& truth) {
    if (result.verdict == DiscoveryVerdict::Undecided) return RepOutcome::Undecided;
    if (result.verdict == DiscoveryVerdict::Decided) {
        return graph_equals(result.graph, truth.graph) ? RepOutcome::Correct : RepOutcome::Wrong;
    }
    // Partial: claims are judged on the non-excluded nodes only.
    SummaryGraph expected(truth.graph.node_count);
    for (const auto& [u, v] : truth.graph.edges) {
        if (!result.excluded.count(u) && !result.excluded.count(v)) expected.add_edge(u, v);
    }
    return graph_equals(result.graph, expected) ? RepOutcome::Correct : RepOutcome::Wrong;
}

namespace {

RepOutcome run_one(BenchMethod method, const ExperimentData& data,
                   const DiscoveryConfig& base) {
    switch (method) {
        case BenchMethod::TiminoLinear:
        case BenchMethod::TiminoAdditive:
        case BenchMethod::TiminoGP: {
            DiscoveryConfig config = base;
            config.backend = method == BenchMethod::TiminoLinear ? Backend::Linear
                             : method == BenchMethod::TiminoAdditive ? Backend::Additive
                                                                     : Backend::GP;
            const DiscoveryResult result = config.partial_max_exclude > 0
                                               ? discover_partial(data.panel, config)
                                               : discover_full(data.panel, config);
            return score_discovery(result, data.truth);
        }
        case BenchMethod::GrangerLinear: {
            const GrangerResult result =
                granger_linear(data.panel, base.max_lag, base.alpha);
            return graph_equals(result.graph, data.truth.graph) ? RepOutcome::Correct
                                                                : RepOutcome::Wrong;
        }
        case BenchMethod::GrangerNonlinear: {
            const GrangerResult result =
                granger_nonlinear_graph(data.panel, base.max_lag, base.alpha, base.fit);
            return graph_equals(result.graph, data.truth.graph) ? RepOutcome::Correct
                                                                : RepOutcome::Wrong;
        }
    }
    throw std::invalid_argument("unknown method");
}

}  // namespace

BenchOutcome run_bench(const BenchOptions& options) {
    if (options.reps < 1) throw std::invalid_argument("bench needs at least one repetition");
    if (options.methods.empty()) throw std::invalid_argument("bench needs at least one method");

    BenchOutcome outcome;
    outcome.experiment = options.experiment;
    outcome.reps = options.reps;
    outcome.length = options.length > 0 ? options.length
                                        : default_experiment_length(options.experiment);
    outcome.seed = options.seed;
    outcome.per_rep.assign(static_cast<size_t>(options.reps),
                           std::vector<RepOutcome>(options.methods.size(), RepOutcome::Undecided));

    const int hw = static_cast<int>(std::thread::hardware_concurrency());
    const int workers =
        std::max(1, std::min(options.threads > 0 ? options.threads : std::max(hw, 1), options.reps));

    auto work = [&](int worker) {
        for (int rep = worker; rep < options.reps; rep += workers) {
            ExperimentSpec spec;
            spec.id = options.experiment;
            spec.length = outcome.length;
            spec.params = options.params;
            spec.seed = derive_seed(options.seed, 0x62656e63ULL + static_cast<std::uint64_t>(rep));
            const ExperimentData data = generate(spec);
            DiscoveryConfig config = options.config;
            config.seed = derive_seed(spec.seed, 0x72756eULL);
            for (size_t m = 0; m < options.methods.size(); ++m) {
                outcome.per_rep[static_cast<size_t>(rep)][m] =
                    run_one(options.methods[m], data, config);
            }
        }
    };
    if (workers == 1) {
        work(0);
    } else {
        std::vector<std::thread> pool;
        pool.reserve(static_cast<size_t>(workers));
        for (int w = 0; w < workers; ++w) pool.emplace_back(work, w);
        for (auto& t : pool) t.join();
    }

    for (size_t m = 0; m < options.methods.size(); ++m) {
        MethodCounts counts;
        counts.method = options.methods[m];
        for (int rep = 0; rep < options.reps; ++rep) {
            switch (outcome.per_rep[static_cast<size_t>(rep)][m]) {
                case RepOutcome::Correct: ++counts.correct; break;
                case RepOutcome::Wrong: ++counts.wrong; break;
                case RepOutcome::Undecided: ++counts.undecided; break;
            }
        }
        outcome.counts.push_back(counts);
    }
    return outcome;
}

namespace {

std::string format_rate(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.6g", v);
    return buf;
}

}  // namespace

std::string bench_table(const BenchOutcome& outcome) {
    std::ostringstream out;
    out << "experiment " << experiment_name(outcome.experiment) << ", T=" << outcome.length
        << ", " << outcome.reps << " repetitions, seed " << outcome.seed << "\n";
    out << "DAG     ";
    for (const auto& c : outcome.counts) {
        char buf[32];
        std::snprintf(buf, sizeof(buf), " | %14s", bench_method_name(c.method));
        out << buf;
    }
    out << "\n";
    const auto row = [&](const char* label, auto pick) {
        out << label;
        for (const auto& c : outcome.counts) {
            char buf[48];
            std::snprintf(buf, sizeof(buf), " | %13.1f%%",
                          100.0 * pick(c) / std::max(1, outcome.reps));
            out << buf;
        }
        out << "\n";
    };
    row("correct ", [](const MethodCounts& c) { return static_cast<double>(c.correct); });
    row("wrong   ", [](const MethodCounts& c) { return static_cast<double>(c.wrong); });
    row("no dec. ", [](const MethodCounts& c) { return static_cast<double>(c.undecided); });
    return out.str();
}

std::string bench_csv_header() { return "experiment,method,correct,wrong,undecided,reps,seed\n"; }

std::string bench_csv_rows(const BenchOutcome& outcome) {
    std::ostringstream out;
    std::string exp_name = experiment_name(outcome.experiment);
    if (outcome.length != default_experiment_length(outcome.experiment)) {
        exp_name += "_T" + std::to_string(outcome.length);
    }
    const double reps = std::max(1, outcome.reps);
    for (const auto& c : outcome.counts) {
        out << exp_name << ',' << bench_method_name(c.method) << ','
            << format_rate(c.correct / reps) << ',' << format_rate(c.wrong / reps) << ','
            << format_rate(c.undecided / reps) << ',' << outcome.reps << ',' << outcome.seed
            << "\n";
    }
    return out.str();
}

}  // namespace timino
