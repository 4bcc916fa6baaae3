#include <doctest.h>

#include <cmath>

#include "timino/datagen.hpp"
#include "timino/stats.hpp"

using namespace timino;

TEST_SUITE_BEGIN("datagen");

TEST_CASE("same seed, same panel, bit for bit") {
    for (ExperimentId id : {ExperimentId::E1, ExperimentId::E2, ExperimentId::E3,
                            ExperimentId::E4, ExperimentId::E5, ExperimentId::E6}) {
        ExperimentSpec spec;
        spec.id = id;
        spec.seed = 17;
        const auto a = generate(spec);
        const auto b = generate(spec);
        CHECK(a.panel.values == b.panel.values);
        CHECK(a.truth.noises == b.truth.noises);
    }
}

TEST_CASE("spec validation") {
    ExperimentSpec spec;
    spec.id = ExperimentId::E3;
    spec.length = 50;
    CHECK_THROWS_AS(generate(spec), std::invalid_argument);
    spec.length = 200;
    spec.burn_in = 10;
    CHECK_THROWS_AS(generate(spec), std::invalid_argument);
    spec.burn_in = 500;
    CHECK_NOTHROW(generate(spec));

    ExperimentSpec e1;
    e1.id = ExperimentId::E1;
    e1.params["a"] = 1.2;
    CHECK_THROWS_AS(generate(e1), std::invalid_argument);
}

TEST_CASE("E1: hidden confounder layout") {
    ExperimentSpec spec;
    spec.id = ExperimentId::E1;
    spec.params["a"] = 0.0;
    spec.seed = 3;
    const auto data = generate(spec);
    CHECK(data.panel.names == std::vector<std::string>{"X", "Y"});
    CHECK(data.truth.graph.edge_count() == 0);  // no X-Y edge: Z confounds both
    REQUIRE(data.truth.latent.has_value());
    CHECK(data.truth.latent_names == std::vector<std::string>{"Z"});
    // a = 0 makes the hidden series iid: lag-1 autocorrelation near zero
    const auto& z = *data.truth.latent;
    std::vector<double> z0(static_cast<size_t>(z.rows() - 1)), z1(static_cast<size_t>(z.rows() - 1));
    for (Eigen::Index t = 0; t + 1 < z.rows(); ++t) {
        z0[static_cast<size_t>(t)] = z(t, 0);
        z1[static_cast<size_t>(t)] = z(t + 1, 0);
    }
    CHECK(std::abs(pearson_correlation(z0, z1)) < 0.1);
}

TEST_CASE("E1: cubed-normal noise is heavy tailed") {
    int heavy = 0;
    const int seeds = 100;
    for (int s = 0; s < seeds; ++s) {
        ExperimentSpec spec;
        spec.id = ExperimentId::E1;
        spec.seed = 500 + static_cast<std::uint64_t>(s);
        const auto data = generate(spec);
        const Eigen::VectorXd noise = data.truth.noises.col(0);
        std::vector<double> v(noise.data(), noise.data() + noise.size());
        if (sample_excess_kurtosis(v) > 3.0) ++heavy;
    }
    CHECK(heavy >= 95);
}

TEST_CASE("E2: ground-truth graph and per-dataset coefficient draws") {
    ExperimentSpec spec;
    spec.id = ExperimentId::E2;
    spec.seed = 11;
    const auto data = generate(spec);
    CHECK(data.panel.names == std::vector<std::string>{"X", "W", "Y", "Z"});
    SummaryGraph expected(4);
    expected.add_edge(0, 1);
    expected.add_edge(1, 2);
    expected.add_edge(1, 3);
    expected.add_edge(2, 3);
    CHECK(graph_equals(data.truth.graph, expected));

    // signs of each A_i are balanced across seeds (binomial check)
    for (int i = 1; i <= 8; ++i) {
        int positive = 0;
        for (int s = 0; s < 100; ++s) {
            ExperimentSpec draw;
            draw.id = ExperimentId::E2;
            draw.seed = 900 + static_cast<std::uint64_t>(s);
            const auto d = generate(draw);
            const double a = d.truth.coefficients.at("A" + std::to_string(i));
            CHECK(std::abs(a) >= 0.2);
            CHECK(std::abs(a) <= 0.8);
            if (a > 0) ++positive;
        }
        CHECK(positive >= 34);
        CHECK(positive <= 66);
    }
}

TEST_CASE("E2: stationarity screen almost never resamples") {
    int clean = 0;
    for (int s = 0; s < 100; ++s) {
        ExperimentSpec spec;
        spec.id = ExperimentId::E2;
        spec.length = 500;
        spec.seed = 1500 + static_cast<std::uint64_t>(s);
        if (generate(spec).resamples == 0) ++clean;
    }
    CHECK(clean >= 99);
}

TEST_CASE("E3: ground truth is the chain X -> Y -> Z") {
    ExperimentSpec spec;
    spec.id = ExperimentId::E3;
    spec.seed = 5;
    const auto data = generate(spec);
    SummaryGraph expected(3);
    expected.add_edge(0, 1);
    expected.add_edge(1, 2);
    CHECK(graph_equals(data.truth.graph, expected));
    CHECK(data.panel.length() == 500);
}

TEST_CASE("E6: alphabetical observed columns, hidden X") {
    ExperimentSpec spec;
    spec.id = ExperimentId::E6;
    spec.seed = 5;
    const auto data = generate(spec);
    CHECK(data.panel.names == std::vector<std::string>{"A", "B", "W", "Y"});
    SummaryGraph expected(4);
    expected.add_edge(1, 0);  // B -> A
    expected.add_edge(1, 3);  // B -> Y
    CHECK(graph_equals(data.truth.graph, expected));
    REQUIRE(data.truth.latent.has_value());
    CHECK(data.truth.latent_names == std::vector<std::string>{"X"});
}

TEST_CASE("stored noises and latents replay the structural equations") {
    // The replay below re-states every generator equation; agreement ties
    // the stored ground truth to the emitted panel.
    const double tol = 1e-12;

    ExperimentSpec e1;
    e1.id = ExperimentId::E1;
    e1.seed = 23;
    e1.params["a"] = 0.5;
    {
        const auto d = generate(e1);
        const auto& v = d.panel.values;
        const auto& n = d.truth.noises;
        const auto& z = *d.truth.latent;
        for (int t = 2; t < d.panel.length(); ++t) {
            CHECK(v(t, 0) == doctest::Approx(0.6 * v(t - 1, 0) + 0.5 * z(t - 1, 0) + n(t, 0))
                                 .epsilon(tol));
            CHECK(v(t, 1) == doctest::Approx(0.6 * v(t - 1, 1) + 0.5 * z(t - 2, 0) + n(t, 1))
                                 .epsilon(tol));
        }
    }

    ExperimentSpec e2;
    e2.id = ExperimentId::E2;
    e2.seed = 29;
    {
        const auto d = generate(e2);
        const auto& v = d.panel.values;
        const auto& n = d.truth.noises;
        const auto& c = d.truth.coefficients;
        for (int t = 1; t < d.panel.length(); ++t) {
            CHECK(v(t, 0) ==
                  doctest::Approx(c.at("A1") * v(t - 1, 0) + n(t, 0)).epsilon(tol));
            CHECK(v(t, 1) == doctest::Approx(c.at("A2") * v(t - 1, 1) + c.at("A3") * v(t, 0) +
                                             n(t, 1))
                                 .epsilon(tol));
            CHECK(v(t, 2) == doctest::Approx(c.at("A4") * v(t - 1, 2) +
                                             c.at("A5") * v(t - 1, 1) + n(t, 2))
                                 .epsilon(tol));
            CHECK(v(t, 3) == doctest::Approx(c.at("A6") * v(t - 1, 3) + c.at("A7") * v(t, 1) +
                                             c.at("A8") * v(t - 1, 2) + n(t, 3))
                                 .epsilon(tol));
        }
    }

    ExperimentSpec e3;
    e3.id = ExperimentId::E3;
    e3.seed = 31;
    {
        const auto d = generate(e3);
        const auto& v = d.panel.values;
        const auto& n = d.truth.noises;
        for (int t = 1; t < d.panel.length(); ++t) {
            CHECK(v(t, 0) == doctest::Approx(0.8 * v(t - 1, 0) + 0.3 * n(t, 0)).epsilon(tol));
            const double xl = v(t - 1, 0);
            CHECK(v(t, 1) == doctest::Approx(0.4 * v(t - 1, 1) + (xl - 1.0) * (xl - 1.0) +
                                             0.3 * n(t, 1))
                                 .epsilon(tol));
            const double yl = v(t - 1, 1);
            CHECK(v(t, 2) == doctest::Approx(0.4 * v(t - 1, 2) + 0.5 * std::cos(yl) +
                                             std::sin(yl) + 0.3 * n(t, 2))
                                 .epsilon(tol));
        }
    }

    ExperimentSpec e4;
    e4.id = ExperimentId::E4;
    e4.seed = 37;
    {
        const auto d = generate(e4);
        const auto& v = d.panel.values;
        const auto& n = d.truth.noises;
        for (int t = 2; t < d.panel.length(); ++t) {
            CHECK(v(t, 0) == doctest::Approx(0.2 * v(t - 1, 0) + 0.9 * n(t, 0)).epsilon(tol));
            const double s = v(t - 1, 0) + v(t - 2, 0);
            CHECK(v(t, 1) ==
                  doctest::Approx(-0.5 + std::exp(-s * s) + 0.1 * n(t, 1)).epsilon(tol));
        }
    }

    ExperimentSpec e5;
    e5.id = ExperimentId::E5;
    e5.seed = 41;
    {
        const auto d = generate(e5);
        const auto& v = d.panel.values;
        const auto& n = d.truth.noises;
        for (int t = 1; t < d.panel.length(); ++t) {
            CHECK(v(t, 0) == doctest::Approx(-0.5 * v(t - 1, 0) + n(t, 0)).epsilon(tol));
            const double xl = v(t - 1, 0);
            CHECK(v(t, 1) ==
                  doctest::Approx(-0.5 * v(t - 1, 1) + xl * xl + n(t, 1)).epsilon(tol));
        }
    }

    ExperimentSpec e6;
    e6.id = ExperimentId::E6;
    e6.seed = 43;
    {
        const auto d = generate(e6);
        const auto& v = d.panel.values;  // columns A B W Y
        const auto& n = d.truth.noises;
        const auto& x = *d.truth.latent;
        for (int t = 1; t < d.panel.length(); ++t) {
            CHECK(v(t, 0) == doctest::Approx(0.5 * v(t - 1, 0) + 0.5 * v(t - 1, 1) + n(t, 0))
                                 .epsilon(tol));
            CHECK(v(t, 1) == doctest::Approx(0.5 * v(t - 1, 1) + n(t, 1)).epsilon(tol));
            CHECK(v(t, 2) == doctest::Approx(0.5 * v(t - 1, 2) + 0.8 * x(t - 1, 0) + n(t, 2))
                                 .epsilon(tol));
            CHECK(v(t, 3) == doctest::Approx(0.5 * v(t - 1, 3) - 0.9 * x(t - 1, 0) +
                                             0.8 * v(t - 1, 1) + n(t, 3))
                                 .epsilon(tol));
        }
    }
}

TEST_CASE("stationarity screen") {
    // explosive AR(1)
    const int n = 200;
    Eigen::MatrixXd explosive(n, 1);
    double x = 0.1;
    for (int t = 0; t < n; ++t) {
        x = 1.5 * x + 0.01;
        explosive(t, 0) = x;
    }
    CHECK_FALSE(stationarity_check(make_panel(explosive, {"x"})));

    Eigen::MatrixXd constant = Eigen::MatrixXd::Constant(n, 2, 3.0);
    CHECK(stationarity_check(make_panel(constant, {"a", "b"})));

    ExperimentSpec spec;
    spec.id = ExperimentId::E2;
    spec.seed = 8;
    CHECK(stationarity_check(generate(spec).panel));
}

TEST_SUITE_END();
