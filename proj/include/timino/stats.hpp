#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <random>
#include <span>

namespace timino {

// Distribution tails used by the tests. Thin wrappers over Boost.Math.

/// P(Z > z) for standard normal Z.
double normal_sf(double z);

/// P(F > x) for an F distribution with (real-valued) degrees of freedom.
double fisher_f_sf(double x, double df1, double df2);

/// P(G > x) for Gamma(shape, scale).
double gamma_sf(double x, double shape, double scale);

double mean(std::span<const double> v);
double variance(std::span<const double> v);               // denominator n-1
double sample_excess_kurtosis(std::span<const double> v);
double pearson_correlation(std::span<const double> x, std::span<const double> y);

/// SplitMix64 step; used to derive independent sub-streams from one seed.
std::uint64_t splitmix64(std::uint64_t& state);

/// Deterministically derives a sub-seed from (seed, tag) so that parallel
/// schedules cannot change which stream a consumer sees.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t tag);

inline std::mt19937_64 make_rng(std::uint64_t seed, std::uint64_t tag = 0) {
    return std::mt19937_64(derive_seed(seed, tag));
}

/// k distinct indices drawn uniformly from [0, n), returned sorted.
std::vector<int> sample_indices(int n, int k, std::mt19937_64& rng);

}  // namespace timino
