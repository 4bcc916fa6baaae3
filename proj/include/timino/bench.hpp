#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "timino/datagen.hpp"
#include "timino/discovery.hpp"

namespace timino {

enum class BenchMethod {
    TiminoLinear,
    TiminoAdditive,
    TiminoGP,
    GrangerLinear,
    GrangerNonlinear,
};

BenchMethod bench_method_from_string(const std::string& name);
const char* bench_method_name(BenchMethod method);

enum class RepOutcome { Correct, Wrong, Undecided };

struct BenchOptions {
    ExperimentId experiment = ExperimentId::E2;
    int reps = 100;
    int length = 0;  // 0 = experiment default
    std::vector<BenchMethod> methods;
    DiscoveryConfig config;  // backend is overridden per method
    std::map<std::string, double> params;
    int threads = 0;  // 0 = hardware concurrency
    std::uint64_t seed = 0;
};

struct MethodCounts {
    BenchMethod method = BenchMethod::TiminoLinear;
    int correct = 0;
    int wrong = 0;
    int undecided = 0;
};

struct BenchOutcome {
    ExperimentId experiment = ExperimentId::E2;
    int reps = 0;
    int length = 0;
    std::uint64_t seed = 0;
    std::vector<MethodCounts> counts;
    /// outcome per (rep, method), ordered by repetition index
    std::vector<std::vector<RepOutcome>> per_rep;
};

/**
 * Runs `reps` seeded repetitions of the experiment for every requested
 * method and scores each run against the generator's ground truth: a
 * decided graph counts as correct only when it matches exactly; a partial
 * result must match the ground truth induced on the non-excluded nodes.
 * Repetitions are spread over a worker pool; results are ordered by
 * repetition index regardless of completion order.
 */
BenchOutcome run_bench(const BenchOptions& options);

/// Scores one discovery result against the ground truth (shared with the
/// acceptance suite).
RepOutcome score_discovery(const DiscoveryResult& result, const GroundTruth& truth);

/// Human-readable percentage table in the correct/wrong/no-dec shape.
std::string bench_table(const BenchOutcome& outcome);

std::string bench_csv_header();
/// Machine-readable rows: experiment,method,correct,wrong,undecided,reps,seed
std::string bench_csv_rows(const BenchOutcome& outcome);

}  // namespace timino
