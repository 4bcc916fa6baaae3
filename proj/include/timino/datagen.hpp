#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "timino/graph.hpp"
#include "timino/panel.hpp"

namespace timino {

enum class ExperimentId { E1, E2, E3, E4, E5, E6 };

ExperimentId experiment_from_string(const std::string& name);
const char* experiment_name(ExperimentId id);
int default_experiment_length(ExperimentId id);

struct ExperimentSpec {
    ExperimentId id = ExperimentId::E1;
    int length = 0;          // 0 picks the experiment's default
    std::uint64_t seed = 0;
    std::map<std::string, double> params;  // e.g. {"a", 0.5} for E1
    int burn_in = 500;
};

/**
 * Everything the generator knows about a dataset: the causal summary graph
 * over the observed columns, the realized noise draws (per observed
 * column, aligned with the panel rows), the values of any hidden series,
 * and the coefficients drawn per dataset. Replaying the structural
 * equations on (panel, latent, noises) reproduces the panel exactly.
 */
struct GroundTruth {
    SummaryGraph graph;
    Eigen::MatrixXd noises;
    std::optional<Eigen::MatrixXd> latent;
    std::vector<std::string> latent_names;
    std::map<std::string, double> coefficients;
};

struct ExperimentData {
    TimeSeriesPanel panel;
    GroundTruth truth;
    int resamples = 0;  // datasets rejected by the stationarity screen
};

/// Simulates the requested synthetic process from zero initial conditions,
/// discards burn_in steps and returns exactly `length` observations.
ExperimentData generate(const ExperimentSpec& spec);

/// Cheap explosion screen: true iff every column's first-half and
/// second-half variances are within a factor of 5 and no |value| > 1e6.
bool stationarity_check(const TimeSeriesPanel& panel);

}  // namespace timino
