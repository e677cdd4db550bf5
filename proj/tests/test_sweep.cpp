#include <catch2/catch_amalgamated.hpp>

#include <cstdlib>

#include "qfio/io.hpp"
#include "qfio/svg.hpp"
#include "qfio/sweep.hpp"

using namespace qfio;
using Catch::Matchers::WithinAbs;

TEST_CASE("one-arm sweep rows match direct strategy calls", "[sweep]") {
    const std::vector<double> grid = {0.3, 0.6, 0.9};
    const auto sweep = run_sweep(10, SweepMode::one_arm, grid);
    REQUIRE(sweep.rows() == 3);
    CHECK(sweep.strategies ==
          std::vector<std::string>{"SIL", "Heisenberg", "N00N", "chop_one_arm",
                                   "sine_state", "optimal"});
    CHECK(sweep.metric_labels.back() == "exact");

    for (size_t i = 0; i < grid.size(); ++i) {
        const double eta = grid[i];
        const LossModel loss{eta, 1.0};
        CHECK(sweep.row_status[i] == "ok");
        CHECK_THAT(sweep.delta_phi[i][0], WithinAbs(sil(10, loss), 1e-15));
        CHECK_THAT(sweep.delta_phi[i][1], WithinAbs(0.1, 1e-15));
        CHECK_THAT(sweep.delta_phi[i][2],
                   WithinAbs(noon_precision(10, loss).delta_phi, 1e-15));
        CHECK_THAT(sweep.delta_phi[i][3],
                   WithinAbs(chop_one_arm(10, eta).delta_phi, 1e-15));
        CHECK_THAT(sweep.delta_phi[i][4],
                   WithinAbs(1.0 / std::sqrt(qfi_one_arm(sine_state(10), eta)), 1e-12));

        // optimal beats every physical baseline, Heisenberg floors everything
        for (size_t c : {size_t{0}, size_t{2}, size_t{3}, size_t{4}})
            CHECK(sweep.delta_phi[i][5] <= sweep.delta_phi[i][c] + 1e-12);
        for (size_t c : {size_t{0}, size_t{2}, size_t{3}, size_t{4}, size_t{5}})
            CHECK(sweep.delta_phi[i][c] >= 0.1 - 1e-12);

        double sum = 0.0;
        for (double w : sweep.weights[i]) sum += w;
        CHECK_THAT(sum, WithinAbs(1.0, 1e-9));
        // one lossy arm: the bound is the exact information
        CHECK(std::abs(sweep.bound_gap[i]) < 1e-8);
    }
}

TEST_CASE("two-arm sweep records the bound gap and labels the metric", "[sweep]") {
    const auto sweep = run_sweep(4, SweepMode::two_arm, {0.5, 0.7, 0.9});
    CHECK(sweep.strategies[3] == "chop_two_arm");
    CHECK(sweep.metric_labels == std::vector<std::string>{
                                     "closed_form", "closed_form", "closed_form",
                                     "closed_form", "exact", "bound"});
    for (size_t i = 0; i < sweep.rows(); ++i) {
        CHECK(sweep.row_status[i] == "ok");
        CHECK(sweep.bound_gap[i] >= -1e-10);
        const double f_bound = 1.0 / (sweep.delta_phi[i][5] * sweep.delta_phi[i][5]);
        CHECK(sweep.bound_gap[i] < 0.01 * f_bound);   // gap is a small correction
        CHECK(sweep.delta_phi[i][5] <= sweep.delta_phi[i][2] + 1e-12);
        CHECK(sweep.delta_phi[i][5] <= sweep.delta_phi[i][4] + 1e-12);
    }
}

TEST_CASE("sweep rejects bad grids", "[sweep]") {
    CHECK_THROWS_AS(run_sweep(4, SweepMode::one_arm, {}), std::invalid_argument);
    CHECK_THROWS_AS(run_sweep(4, SweepMode::one_arm, {0.0, 0.5}),
                    std::invalid_argument);
    CHECK_THROWS_AS(run_sweep(4, SweepMode::one_arm, {0.5, 0.5}),
                    std::invalid_argument);
    CHECK_THROWS_AS(run_sweep(4, SweepMode::one_arm, {0.5, 1.2}),
                    std::invalid_argument);
    CHECK_THROWS_AS(run_sweep(0, SweepMode::one_arm, {0.5}),
                    std::invalid_argument);
}

TEST_CASE("thread cap changes scheduling but not results", "[sweep]") {
    CHECK(thread_budget(1) == 1);

    setenv("QFI_OPTICS_THREADS", "1", 1);
    CHECK(thread_budget(100) == 1);
    const auto serial = run_sweep(6, SweepMode::two_arm, {0.4, 0.6, 0.8, 0.95});

    setenv("QFI_OPTICS_THREADS", "4", 1);
    CHECK(thread_budget(100) <= 4);
    const auto parallel = run_sweep(6, SweepMode::two_arm, {0.4, 0.6, 0.8, 0.95});
    unsetenv("QFI_OPTICS_THREADS");

    CHECK(canonical_dump(sweep_to_json(serial, meta_json("x"))) ==
          canonical_dump(sweep_to_json(parallel, meta_json("x"))));

    setenv("QFI_OPTICS_THREADS", "garbage", 1);
    CHECK(thread_budget(100) >= 1);   // unparseable cap is ignored
    unsetenv("QFI_OPTICS_THREADS");
}

TEST_CASE("precision chart renders one series per strategy", "[sweep][svg]") {
    const auto sweep = run_sweep(3, SweepMode::one_arm, {0.3, 0.5, 0.7, 0.9});
    const std::string chart =
        render_precision_chart(sweep, "qfi-optics plot <sweep.json> & more");
    CHECK(chart.rfind("<svg", 0) == 0);
    CHECK(chart.find("</svg>") != std::string::npos);

    size_t series = 0;
    for (size_t pos = 0; (pos = chart.find("<polyline", pos)) != std::string::npos;
         ++series)
        ++pos;
    CHECK(series == sweep.strategies.size());
    for (size_t c = 0; c < sweep.strategies.size(); ++c) {
        const std::string label =
            sweep.strategies[c] + " (" + sweep.metric_labels[c] + ")";
        CHECK(chart.find(svg::xml_escape(label)) != std::string::npos);
    }
    CHECK(chart.find("version=" + std::string(kVersion)) != std::string::npos);
    // raw angle brackets and ampersands from the command line must be escaped
    CHECK(chart.find("&lt;sweep.json&gt;") != std::string::npos);
    CHECK(chart.find("&amp; more") != std::string::npos);
    CHECK(chart.find("<sweep.json>") == std::string::npos);
}

TEST_CASE("weight profile renders one band per component", "[sweep][svg]") {
    const auto sweep = run_sweep(3, SweepMode::one_arm, {0.3, 0.5, 0.7, 0.9});
    const std::string bands = render_weight_profile(sweep, "qfi-optics plot");
    size_t count = 0;
    for (size_t pos = 0; (pos = bands.find("<polygon", pos)) != std::string::npos;
         ++count)
        ++pos;
    CHECK(count == static_cast<size_t>(sweep.n_photons) + 1);
    CHECK(bands.find("x_0") != std::string::npos);
    CHECK(bands.find("x_3") != std::string::npos);

    auto broken = sweep;
    for (auto& status : broken.row_status) status = "failed";
    CHECK_THROWS_AS(render_weight_profile(broken, "cmd"), std::invalid_argument);
}
