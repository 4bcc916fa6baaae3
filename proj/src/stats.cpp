#include "timino/stats.hpp"

#include <boost/math/distributions/fisher_f.hpp>
#include <boost/math/distributions/gamma.hpp>
#include <boost/math/distributions/normal.hpp>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace timino {

double normal_sf(double z) {
    static const boost::math::normal_distribution<double> dist(0.0, 1.0);
    return boost::math::cdf(boost::math::complement(dist, z));
}

double fisher_f_sf(double x, double df1, double df2) {
    if (x <= 0.0) return 1.0;
    const boost::math::fisher_f_distribution<double> dist(df1, df2);
    return boost::math::cdf(boost::math::complement(dist, x));
}

double gamma_sf(double x, double shape, double scale) {
    if (x <= 0.0) return 1.0;
    const boost::math::gamma_distribution<double> dist(shape, scale);
    return boost::math::cdf(boost::math::complement(dist, x));
}

double mean(std::span<const double> v) {
    if (v.empty()) throw std::invalid_argument("mean of empty sample");
    return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

double variance(std::span<const double> v) {
    if (v.size() < 2) throw std::invalid_argument("variance needs at least two samples");
    const double m = mean(v);
    double acc = 0.0;
    for (double x : v) acc += (x - m) * (x - m);
    return acc / static_cast<double>(v.size() - 1);
}

double sample_excess_kurtosis(std::span<const double> v) {
    const double m = mean(v);
    double m2 = 0.0, m4 = 0.0;
    for (double x : v) {
        const double d = x - m;
        m2 += d * d;
        m4 += d * d * d * d;
    }
    const double n = static_cast<double>(v.size());
    m2 /= n;
    m4 /= n;
    if (m2 <= 0.0) return 0.0;
    return m4 / (m2 * m2) - 3.0;
}

double pearson_correlation(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size() || x.size() < 2) {
        throw std::invalid_argument("correlation needs two equal-length samples");
    }
    const double mx = mean(x), my = mean(y);
    double sxy = 0.0, sxx = 0.0, syy = 0.0;
    for (size_t i = 0; i < x.size(); ++i) {
        sxy += (x[i] - mx) * (y[i] - my);
        sxx += (x[i] - mx) * (x[i] - mx);
        syy += (y[i] - my) * (y[i] - my);
    }
    if (sxx <= 0.0 || syy <= 0.0) throw std::invalid_argument("correlation of constant sample");
    return sxy / std::sqrt(sxx * syy);
}

std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t tag) {
    std::uint64_t state = seed ^ (0xA0761D6478BD642FULL * (tag + 1));
    std::uint64_t out = splitmix64(state);
    out ^= splitmix64(state);
    return out;
}

std::vector<int> sample_indices(int n, int k, std::mt19937_64& rng) {
    if (k >= n) {
        std::vector<int> all(static_cast<size_t>(n));
        std::iota(all.begin(), all.end(), 0);
        return all;
    }
    // Floyd's algorithm: k distinct draws without building the full pool.
    std::vector<int> picked;
    picked.reserve(static_cast<size_t>(k));
    std::vector<bool> seen(static_cast<size_t>(n), false);
    for (int j = n - k; j < n; ++j) {
        std::uniform_int_distribution<int> dist(0, j);
        int t = dist(rng);
        if (seen[static_cast<size_t>(t)]) t = j;
        seen[static_cast<size_t>(t)] = true;
        picked.push_back(t);
    }
    std::sort(picked.begin(), picked.end());
    return picked;
}

}  // namespace timino
