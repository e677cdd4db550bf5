#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "helpers.hpp"
#include "qfio/optimizer.hpp"

using namespace qfio;

TEST_CASE("simplex projection", "[optimizer]") {
    auto p = project_simplex({0.2, 0.9});
    REQUIRE(p[0] + p[1] == Catch::Approx(1.0).margin(1e-15));
    REQUIRE(p[0] == Catch::Approx(0.15).margin(1e-15));
    REQUIRE(p[1] == Catch::Approx(0.85).margin(1e-15));

    p = project_simplex({-5.0, 0.0, 5.0});
    REQUIRE(p[0] == 0.0);
    REQUIRE(p[1] == 0.0);
    REQUIRE(p[2] == Catch::Approx(1.0).margin(1e-15));

    // already feasible points are fixed
    p = project_simplex({0.3, 0.3, 0.4});
    REQUIRE(p[0] == Catch::Approx(0.3).margin(1e-12));
    REQUIRE(p[2] == Catch::Approx(0.4).margin(1e-12));

    std::mt19937_64 rng(5);
    for (int trial = 0; trial < 50; ++trial) {
        std::uniform_real_distribution<double> u(-2.0, 2.0);
        std::vector<double> v(7);
        for (auto& e : v) v.back() = e = u(rng);
        auto q = project_simplex(v);
        double s = 0.0;
        for (double e : q) {
            REQUIRE(e >= 0.0);
            s += e;
        }
        REQUIRE(s == Catch::Approx(1.0).margin(1e-12));
    }
}

TEST_CASE("lossless optimum reproduces the quadratic variance maximizer", "[optimizer]") {
    // without loss the bound is 4 Var(k); the optimum puts half the weight on
    // each extreme mode number, reaching N^2
    for (int n : {2, 5, 10}) {
        auto res = maximize_qfi(n, {1.0, 1.0}, QfiMetric::bound);
        REQUIRE(res.converged);
        REQUIRE(res.objective ==
                Catch::Approx(static_cast<double>(n) * n).margin(1e-9));
        REQUIRE(res.state.weights.front() == Catch::Approx(0.5).margin(1e-7));
        REQUIRE(res.state.weights.back() == Catch::Approx(0.5).margin(1e-7));
    }
}

TEST_CASE("optimum at strong symmetric loss", "[optimizer]") {
    // frozen from an independent long-run projected-gradient computation
    const std::vector<double> expected = {
        0.018172295538, 0.050213192224, 0.087653862531, 0.121758717513,
        0.145336456165, 0.153730952055, 0.145336456165, 0.121758717513,
        0.087653862531, 0.050213192224, 0.018172295538};
    auto res = maximize_qfi(10, {0.3, 0.3}, QfiMetric::bound);
    REQUIRE(res.converged);
    REQUIRE(res.objective == Catch::Approx(3.3935288959048506).margin(1e-10));
    REQUIRE(res.kkt_residual <= 1e-7);
    for (size_t i = 0; i < expected.size(); ++i)
        REQUIRE(res.state.weights[i] == Catch::Approx(expected[i]).margin(1e-8));
    // symmetric loss: weights are reversal-symmetric
    for (size_t i = 0; i < expected.size(); ++i)
        REQUIRE(res.state.weights[i] ==
                Catch::Approx(res.state.weights[expected.size() - 1 - i]).margin(1e-9));
}

TEST_CASE("weak one-sided loss concentrates weight on the extreme modes", "[optimizer]") {
    // above the survival threshold the maximizer keeps only k = 0 and k = N,
    // with the k = 0 share eta^(N/2) / (1 + eta^(N/2))
    auto res = maximize_qfi(10, {0.95, 1.0}, QfiMetric::one_arm_closed_form);
    REQUIRE(res.converged);
    const double h = std::pow(0.95, 5.0);
    REQUIRE(res.state.weights.front() ==
            Catch::Approx(h / (1.0 + h)).margin(1e-9));
    REQUIRE(res.state.weights.back() ==
            Catch::Approx(1.0 / (1.0 + h)).margin(1e-9));
    for (size_t k = 1; k + 1 < res.state.weights.size(); ++k)
        REQUIRE(res.state.weights[k] <= 1e-9);
}

TEST_CASE("optimizer beats a dense grid at N = 3", "[optimizer]") {
    auto res = maximize_qfi(3, {0.6, 1.0}, QfiMetric::bound);
    REQUIRE(res.converged);
    const BoundKernel kernel(3, {0.6, 1.0});
    double best_grid = 0.0;
    const int steps = 500;  // grid pitch 0.002
    for (int a = 0; a <= steps; ++a)
        for (int b = 0; a + b <= steps; ++b)
            for (int c = 0; a + b + c <= steps; ++c) {
                const double x0 = a / static_cast<double>(steps);
                const double x1 = b / static_cast<double>(steps);
                const double x2 = c / static_cast<double>(steps);
                best_grid = std::max(
                    best_grid, kernel.value({x0, x1, x2, 1.0 - x0 - x1 - x2}));
            }
    REQUIRE(res.objective >= best_grid - 1e-4);
}

TEST_CASE("random restarts agree", "[optimizer]") {
    std::mt19937_64 rng(20260825);
    for (auto loss : {LossModel{0.5, 0.9}, LossModel{0.75, 0.75}}) {
        auto baseline = maximize_qfi(6, loss, QfiMetric::bound);
        REQUIRE(baseline.converged);
        for (int restart = 0; restart < 10; ++restart) {
            OptimizeOptions opts;
            opts.start = test::random_simplex(rng, 7);
            auto res = maximize_qfi(6, loss, QfiMetric::bound, opts);
            REQUIRE(res.converged);
            REQUIRE(res.objective == Catch::Approx(baseline.objective).margin(1e-7));
        }
    }
}

TEST_CASE("certification accepts true optima and rejects perturbed ones", "[optimizer]") {
    auto res = maximize_qfi(8, {0.55, 0.8}, QfiMetric::bound);
    REQUIRE(res.converged);
    const double res_cert = certify_optimum(res, {0.55, 0.8});
    REQUIRE(res_cert <= 1e-7);

    OptimizationResult tampered = res;
    auto& w = tampered.state.weights;
    const double shift = 0.05;
    w[2] += shift;
    w[5] -= std::min(shift, w[5] * 0.5);
    double sum = 0.0;
    for (double v : w) sum += v;
    for (auto& v : w) v /= sum;
    REQUIRE_THROWS_AS(certify_optimum(tampered, {0.55, 0.8}), CertificationError);
}

TEST_CASE("kkt residual bounds the optimality gap through homogeneity", "[optimizer]") {
    // the bound is degree-1 homogeneous in the weights, so <g, x> equals the
    // objective and the residual caps how much any vertex direction can gain
    std::mt19937_64 rng(99);
    for (int trial = 0; trial < 10; ++trial) {
        const auto loss = test::random_loss(rng, 0.2, 0.95);
        const BoundKernel kernel(5, loss);
        const auto x = test::random_interior(rng, 6);
        std::vector<double> g;
        kernel.gradient(x, g);
        double inner = 0.0;
        for (size_t i = 0; i < x.size(); ++i) inner += g[i] * x[i];
        REQUIRE(inner == Catch::Approx(kernel.value(x)).epsilon(1e-10));
    }
}
