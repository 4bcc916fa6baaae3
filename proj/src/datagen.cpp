#include "timino/datagen.hpp"

#include <cmath>
#include <random>
#include <stdexcept>

#include "timino/stats.hpp"

namespace timino {

ExperimentId experiment_from_string(const std::string& name) {
    if (name == "E1" || name == "e1") return ExperimentId::E1;
    if (name == "E2" || name == "e2") return ExperimentId::E2;
    if (name == "E3" || name == "e3") return ExperimentId::E3;
    if (name == "E4" || name == "e4") return ExperimentId::E4;
    if (name == "E5" || name == "e5") return ExperimentId::E5;
    if (name == "E6" || name == "e6") return ExperimentId::E6;
    throw std::invalid_argument("unknown experiment id: " + name);
}

const char* experiment_name(ExperimentId id) {
    switch (id) {
        case ExperimentId::E1: return "E1";
        case ExperimentId::E2: return "E2";
        case ExperimentId::E3: return "E3";
        case ExperimentId::E4: return "E4";
        case ExperimentId::E5: return "E5";
        case ExperimentId::E6: return "E6";
    }
    return "?";
}

int default_experiment_length(ExperimentId id) {
    switch (id) {
        case ExperimentId::E1: return 1000;
        case ExperimentId::E2: return 2000;
        case ExperimentId::E3: return 500;
        case ExperimentId::E4: return 1000;
        case ExperimentId::E5: return 1000;
        case ExperimentId::E6: return 600;
    }
    return 1000;
}

namespace {

struct Sim {
    int total;         // burn_in + length
    int burn_in;
    std::mt19937_64 rng;
    std::normal_distribution<double> gauss{0.0, 1.0};
    std::uniform_real_distribution<double> unit{-0.5, 0.5};

    explicit Sim(int burn, int length, std::uint64_t seed)
        : total(burn + length), burn_in(burn), rng(seed) {}

    double normal() { return gauss(rng); }
    double uniform_pm_half() { return unit(rng); }
};

inline double at(const std::vector<double>& v, int t) { return t >= 0 ? v[static_cast<size_t>(t)] : 0.0; }

ExperimentData finish(const std::vector<std::vector<double>>& observed,
                      const std::vector<std::string>& names,
                      const std::vector<std::vector<double>>& noises, int burn_in, int length,
                      GroundTruth truth) {
    const int d = static_cast<int>(observed.size());
    Eigen::MatrixXd values(length, d);
    Eigen::MatrixXd noise_mat(length, d);
    for (int c = 0; c < d; ++c) {
        for (int t = 0; t < length; ++t) {
            values(t, c) = observed[static_cast<size_t>(c)][static_cast<size_t>(burn_in + t)];
            noise_mat(t, c) = noises[static_cast<size_t>(c)][static_cast<size_t>(burn_in + t)];
        }
    }
    truth.noises = std::move(noise_mat);
    return ExperimentData{make_panel(std::move(values), names), std::move(truth), 0};
}

// Z_t = a Z_{t-1} + e_Z;  X_t = 0.6 X_{t-1} + 0.5 Z_{t-1} + e_X;
// Y_t = 0.6 Y_{t-1} + 0.5 Z_{t-2} + e_Y;  e ~ 0.4 N(0,1)^3.  Z stays hidden.
ExperimentData generate_e1(const ExperimentSpec& spec, int length) {
    double a = 0.5;
    if (auto it = spec.params.find("a"); it != spec.params.end()) a = it->second;
    if (a < 0.0 || a > 0.95) throw std::invalid_argument("E1 requires a in [0, 0.95]");

    Sim sim(spec.burn_in, length, spec.seed);
    const int n = sim.total;
    std::vector<double> z(n), x(n), y(n), ez(n), ex(n), ey(n);
    auto cubed = [&]() {
        const double g = sim.normal();
        return 0.4 * g * g * g;
    };
    for (int t = 0; t < n; ++t) {
        ez[static_cast<size_t>(t)] = cubed();
        ex[static_cast<size_t>(t)] = cubed();
        ey[static_cast<size_t>(t)] = cubed();
        z[static_cast<size_t>(t)] = a * at(z, t - 1) + ez[static_cast<size_t>(t)];
        x[static_cast<size_t>(t)] = 0.6 * at(x, t - 1) + 0.5 * at(z, t - 1) + ex[static_cast<size_t>(t)];
        y[static_cast<size_t>(t)] = 0.6 * at(y, t - 1) + 0.5 * at(z, t - 2) + ey[static_cast<size_t>(t)];
    }

    GroundTruth truth;
    truth.graph = SummaryGraph(2);  // no edge between the observed X and Y
    Eigen::MatrixXd latent(length, 1);
    for (int t = 0; t < length; ++t) latent(t, 0) = z[static_cast<size_t>(spec.burn_in + t)];
    truth.latent = std::move(latent);
    truth.latent_names = {"Z"};
    truth.coefficients["a"] = a;
    return finish({x, y}, {"X", "Y"}, {ex, ey}, spec.burn_in, length, std::move(truth));
}

// X_t = A1 X_{t-1} + e;  W_t = A2 W_{t-1} + A3 X_t + e;
// Y_t = A4 Y_{t-1} + A5 W_{t-1} + e;  Z_t = A6 Z_{t-1} + A7 W_t + A8 Y_{t-1} + e;
// e ~ 0.4 N(0,1), A_i ~ U([-0.8,-0.2] u [0.2,0.8]) redrawn per dataset.
ExperimentData generate_e2_once(const ExperimentSpec& spec, int length, std::uint64_t seed) {
    Sim sim(spec.burn_in, length, seed);
    std::uniform_real_distribution<double> mag(0.2, 0.8);
    std::uniform_int_distribution<int> sign(0, 1);
    std::vector<double> coef(8);
    for (auto& c : coef) c = (sign(sim.rng) == 0 ? -1.0 : 1.0) * mag(sim.rng);

    const int n = sim.total;
    std::vector<double> x(n), w(n), y(n), z(n), ex(n), ew(n), ey(n), ez(n);
    for (int t = 0; t < n; ++t) {
        ex[static_cast<size_t>(t)] = 0.4 * sim.normal();
        ew[static_cast<size_t>(t)] = 0.4 * sim.normal();
        ey[static_cast<size_t>(t)] = 0.4 * sim.normal();
        ez[static_cast<size_t>(t)] = 0.4 * sim.normal();
        x[static_cast<size_t>(t)] = coef[0] * at(x, t - 1) + ex[static_cast<size_t>(t)];
        w[static_cast<size_t>(t)] =
            coef[1] * at(w, t - 1) + coef[2] * x[static_cast<size_t>(t)] + ew[static_cast<size_t>(t)];
        y[static_cast<size_t>(t)] =
            coef[3] * at(y, t - 1) + coef[4] * at(w, t - 1) + ey[static_cast<size_t>(t)];
        z[static_cast<size_t>(t)] = coef[5] * at(z, t - 1) + coef[6] * w[static_cast<size_t>(t)] +
                                    coef[7] * at(y, t - 1) + ez[static_cast<size_t>(t)];
    }

    GroundTruth truth;
    truth.graph = SummaryGraph(4);  // columns X W Y Z
    truth.graph.add_edge(0, 1);     // X -> W (instantaneous)
    truth.graph.add_edge(1, 2);     // W -> Y
    truth.graph.add_edge(1, 3);     // W -> Z (instantaneous)
    truth.graph.add_edge(2, 3);     // Y -> Z
    for (int i = 0; i < 8; ++i) truth.coefficients["A" + std::to_string(i + 1)] = coef[static_cast<size_t>(i)];
    return finish({x, w, y, z}, {"X", "W", "Y", "Z"}, {ex, ew, ey, ez}, spec.burn_in, length,
                  std::move(truth));
}

ExperimentData generate_e2(const ExperimentSpec& spec, int length) {
    int rejections = 0;
    for (int attempt = 0; attempt < 100; ++attempt) {
        ExperimentData data =
            generate_e2_once(spec, length, derive_seed(spec.seed, static_cast<std::uint64_t>(attempt)));
        if (stationarity_check(data.panel)) {
            data.resamples = rejections;
            return data;
        }
        ++rejections;
    }
    throw std::runtime_error("E2: no stationary draw after 100 attempts");
}

// X_t = 0.8 X_{t-1} + 0.3 e;  Y_t = 0.4 Y_{t-1} + (X_{t-1} - 1)^2 + 0.3 e;
// Z_t = 0.4 Z_{t-1} + 0.5 cos(Y_{t-1}) + sin(Y_{t-1}) + 0.3 e;  e ~ U(-0.5, 0.5).
ExperimentData generate_e3(const ExperimentSpec& spec, int length) {
    Sim sim(spec.burn_in, length, spec.seed);
    const int n = sim.total;
    std::vector<double> x(n), y(n), z(n), ex(n), ey(n), ez(n);
    for (int t = 0; t < n; ++t) {
        ex[static_cast<size_t>(t)] = sim.uniform_pm_half();
        ey[static_cast<size_t>(t)] = sim.uniform_pm_half();
        ez[static_cast<size_t>(t)] = sim.uniform_pm_half();
        x[static_cast<size_t>(t)] = 0.8 * at(x, t - 1) + 0.3 * ex[static_cast<size_t>(t)];
        const double xl = at(x, t - 1);
        y[static_cast<size_t>(t)] =
            0.4 * at(y, t - 1) + (xl - 1.0) * (xl - 1.0) + 0.3 * ey[static_cast<size_t>(t)];
        const double yl = at(y, t - 1);
        z[static_cast<size_t>(t)] = 0.4 * at(z, t - 1) + 0.5 * std::cos(yl) + std::sin(yl) +
                                    0.3 * ez[static_cast<size_t>(t)];
    }
    GroundTruth truth;
    truth.graph = SummaryGraph(3);
    truth.graph.add_edge(0, 1);  // X -> Y
    truth.graph.add_edge(1, 2);  // Y -> Z
    return finish({x, y, z}, {"X", "Y", "Z"}, {ex, ey, ez}, spec.burn_in, length, std::move(truth));
}

// X_t = 0.2 X_{t-1} + 0.9 e;  Y_t = -0.5 + exp(-(X_{t-1} + X_{t-2})^2) + 0.1 e;  e ~ N(0,1).
ExperimentData generate_e4(const ExperimentSpec& spec, int length) {
    Sim sim(spec.burn_in, length, spec.seed);
    const int n = sim.total;
    std::vector<double> x(n), y(n), ex(n), ey(n);
    for (int t = 0; t < n; ++t) {
        ex[static_cast<size_t>(t)] = sim.normal();
        ey[static_cast<size_t>(t)] = sim.normal();
        x[static_cast<size_t>(t)] = 0.2 * at(x, t - 1) + 0.9 * ex[static_cast<size_t>(t)];
        const double s = at(x, t - 1) + at(x, t - 2);
        y[static_cast<size_t>(t)] = -0.5 + std::exp(-s * s) + 0.1 * ey[static_cast<size_t>(t)];
    }
    GroundTruth truth;
    truth.graph = SummaryGraph(2);
    truth.graph.add_edge(0, 1);  // X -> Y
    return finish({x, y}, {"X", "Y"}, {ex, ey}, spec.burn_in, length, std::move(truth));
}

// X_t = -0.5 X_{t-1} + e;  Y_t = -0.5 Y_{t-1} + X_{t-1}^2 + e;  e ~ 0.4 N(0,1).
ExperimentData generate_e5(const ExperimentSpec& spec, int length) {
    Sim sim(spec.burn_in, length, spec.seed);
    const int n = sim.total;
    std::vector<double> x(n), y(n), ex(n), ey(n);
    for (int t = 0; t < n; ++t) {
        ex[static_cast<size_t>(t)] = 0.4 * sim.normal();
        ey[static_cast<size_t>(t)] = 0.4 * sim.normal();
        x[static_cast<size_t>(t)] = -0.5 * at(x, t - 1) + ex[static_cast<size_t>(t)];
        const double xl = at(x, t - 1);
        y[static_cast<size_t>(t)] = -0.5 * at(y, t - 1) + xl * xl + ey[static_cast<size_t>(t)];
    }
    GroundTruth truth;
    truth.graph = SummaryGraph(2);
    truth.graph.add_edge(0, 1);  // X -> Y
    return finish({x, y}, {"X", "Y"}, {ex, ey}, spec.burn_in, length, std::move(truth));
}

// X_t = 0.5 X_{t-1} + e;          B_t = 0.5 B_{t-1} + e;
// A_t = 0.5 A_{t-1} + 0.5 B_{t-1} + e;
// Y_t = 0.5 Y_{t-1} - 0.9 X_{t-1} + 0.8 B_{t-1} + e;
// W_t = 0.5 W_{t-1} + 0.8 X_{t-1} + e;   e ~ 0.4 U(-0.5, 0.5).  X stays hidden.
// Observed columns in name order: A, B, W, Y.
ExperimentData generate_e6(const ExperimentSpec& spec, int length) {
    Sim sim(spec.burn_in, length, spec.seed);
    const int n = sim.total;
    std::vector<double> x(n), b(n), a(n), y(n), w(n);
    std::vector<double> ex(n), eb(n), ea(n), ey(n), ew(n);
    for (int t = 0; t < n; ++t) {
        ex[static_cast<size_t>(t)] = 0.4 * sim.uniform_pm_half();
        eb[static_cast<size_t>(t)] = 0.4 * sim.uniform_pm_half();
        ea[static_cast<size_t>(t)] = 0.4 * sim.uniform_pm_half();
        ey[static_cast<size_t>(t)] = 0.4 * sim.uniform_pm_half();
        ew[static_cast<size_t>(t)] = 0.4 * sim.uniform_pm_half();
        x[static_cast<size_t>(t)] = 0.5 * at(x, t - 1) + ex[static_cast<size_t>(t)];
        b[static_cast<size_t>(t)] = 0.5 * at(b, t - 1) + eb[static_cast<size_t>(t)];
        a[static_cast<size_t>(t)] =
            0.5 * at(a, t - 1) + 0.5 * at(b, t - 1) + ea[static_cast<size_t>(t)];
        y[static_cast<size_t>(t)] = 0.5 * at(y, t - 1) - 0.9 * at(x, t - 1) +
                                    0.8 * at(b, t - 1) + ey[static_cast<size_t>(t)];
        w[static_cast<size_t>(t)] = 0.5 * at(w, t - 1) + 0.8 * at(x, t - 1) + ew[static_cast<size_t>(t)];
    }
    GroundTruth truth;
    truth.graph = SummaryGraph(4);  // columns A B W Y
    truth.graph.add_edge(1, 0);     // B -> A
    truth.graph.add_edge(1, 3);     // B -> Y
    Eigen::MatrixXd latent(length, 1);
    for (int t = 0; t < length; ++t) latent(t, 0) = x[static_cast<size_t>(spec.burn_in + t)];
    truth.latent = std::move(latent);
    truth.latent_names = {"X"};
    return finish({a, b, w, y}, {"A", "B", "W", "Y"}, {ea, eb, ew, ey}, spec.burn_in, length,
                  std::move(truth));
}

}  // namespace

ExperimentData generate(const ExperimentSpec& spec) {
    const int length = spec.length > 0 ? spec.length : default_experiment_length(spec.id);
    if (length < 100) throw std::invalid_argument("experiment length must be >= 100");
    if (spec.burn_in < 100) throw std::invalid_argument("burn_in must be >= 100");
    switch (spec.id) {
        case ExperimentId::E1: return generate_e1(spec, length);
        case ExperimentId::E2: return generate_e2(spec, length);
        case ExperimentId::E3: return generate_e3(spec, length);
        case ExperimentId::E4: return generate_e4(spec, length);
        case ExperimentId::E5: return generate_e5(spec, length);
        case ExperimentId::E6: return generate_e6(spec, length);
    }
    throw std::invalid_argument("unknown experiment id");
}

bool stationarity_check(const TimeSeriesPanel& panel) {
    const int T = panel.length();
    if (panel.values.cwiseAbs().maxCoeff() > 1e6) return false;
    if (T < 4) return true;
    const int half = T / 2;
    for (int c = 0; c < panel.series_count(); ++c) {
        const auto col = panel.values.col(c);
        const auto first = col.head(half);
        const auto second = col.tail(T - half);
        const double v1 = (first.array() - first.mean()).square().sum() / (half - 1);
        const double v2 =
            (second.array() - second.mean()).square().sum() / (T - half - 1);
        const double vmax = std::max(v1, v2);
        const double vmin = std::min(v1, v2);
        if (vmax <= 1e-24) continue;  // constant column
        if (vmax >= 5.0 * vmin) return false;
    }
    return true;
}

}  // namespace timino
