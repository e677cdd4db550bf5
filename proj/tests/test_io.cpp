#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <sstream>

#include "qfio/io.hpp"

using namespace qfio;
using Catch::Matchers::WithinAbs;
using nlohmann::json;

TEST_CASE("state schema accepts valid files and renormalizes tiny drift", "[io]") {
    const json j = {{"n_photons", 2}, {"weights", {0.25, 0.5, 0.25}}};
    const auto state = state_from_json(j);
    CHECK(state.n_photons == 2);
    CHECK_THAT(state.weights[1], WithinAbs(0.5, 1e-15));

    // sum within 1e-9 of 1: accepted, renormalized to machine precision
    const json drift = {{"n_photons", 1}, {"weights", {0.5, 0.5 + 4e-10}}};
    const auto fixed = state_from_json(drift);
    CHECK_THAT(fixed.weights[0] + fixed.weights[1], WithinAbs(1.0, 1e-15));

    const json phased = {{"n_photons", 1},
                         {"weights", {0.5, 0.5}},
                         {"phases", {0.0, 1.25}}};
    CHECK_THAT(state_from_json(phased).phase(1), WithinAbs(1.25, 1e-15));
}

TEST_CASE("state schema rejects malformed input", "[io]") {
    CHECK_THROWS_AS(state_from_json(json::array()), SchemaError);
    CHECK_THROWS_AS(state_from_json({{"weights", {1.0}}}), SchemaError);
    CHECK_THROWS_AS(state_from_json({{"n_photons", 1}}), SchemaError);
    CHECK_THROWS_AS(state_from_json({{"n_photons", 0}, {"weights", {1.0}}}),
                    SchemaError);
    CHECK_THROWS_AS(state_from_json({{"n_photons", 101},
                                     {"weights", json::array()}}),
                    SchemaError);
    // wrong length
    CHECK_THROWS_AS(state_from_json({{"n_photons", 2}, {"weights", {0.5, 0.5}}}),
                    SchemaError);
    // sum 0.9 is too far off to be silently fixed
    CHECK_THROWS_AS(state_from_json({{"n_photons", 1}, {"weights", {0.45, 0.45}}}),
                    SchemaError);
    CHECK_THROWS_AS(state_from_json({{"n_photons", 1}, {"weights", {1.5, -0.5}}}),
                    SchemaError);
    CHECK_THROWS_AS(state_from_json({{"n_photons", 1}, {"weights", {"a", "b"}}}),
                    SchemaError);
    CHECK_THROWS_AS(state_from_json({{"n_photons", 1},
                                     {"weights", {0.5, 0.5}},
                                     {"phases", {0.0}}}),
                    SchemaError);
}

TEST_CASE("canonical JSON round trip is byte identical", "[io]") {
    const json j = {{"n_photons", 3},
                    {"weights", {0.1, 0.4, 0.4, 0.1}},
                    {"phases", {0.0, 0.1, 0.2, 0.3}}};
    const std::string once = canonical_dump(state_to_json(state_from_json(j)));
    const std::string twice =
        canonical_dump(state_to_json(state_from_json(json::parse(once))));
    CHECK(once == twice);
    CHECK(once.back() == '\n');
    // keys come out sorted
    CHECK(once.find("\"n_photons\"") < once.find("\"phases\""));
    CHECK(once.find("\"phases\"") < once.find("\"weights\""));
}

TEST_CASE("grid parsing", "[io]") {
    const auto g = parse_grid("0.05:1:96");
    const auto pts = g.points();
    REQUIRE(pts.size() == 96);
    CHECK_THAT(pts.front(), WithinAbs(0.05, 1e-15));
    CHECK(pts.back() == 1.0);
    CHECK_THAT(pts[1] - pts[0], WithinAbs(0.01, 1e-12));
    for (size_t i = 1; i < pts.size(); ++i) CHECK(pts[i] > pts[i - 1]);

    CHECK_THROWS_AS(parse_grid("0:1:10"), SchemaError);       // eta = 0 excluded
    CHECK_THROWS_AS(parse_grid("0.5:0.4:5"), SchemaError);    // not increasing
    CHECK_THROWS_AS(parse_grid("0.1:1.5:5"), SchemaError);    // beyond 1
    CHECK_THROWS_AS(parse_grid("0.1:0.9:1"), SchemaError);    // single point
    CHECK_THROWS_AS(parse_grid("0.1-0.9-5"), SchemaError);
    CHECK_THROWS_AS(parse_grid("a:b:c"), SchemaError);
    CHECK_THROWS_AS(parse_grid("0.1:0.9:5x"), SchemaError);
}

TEST_CASE("CSV float format is fixed-width scientific", "[io]") {
    CHECK(csv_number(1.0) == "1.000000000000e+00");
    CHECK(csv_number(0.05) == "5.000000000000e-02");
    CHECK(csv_number(-2.5e-11) == "-2.500000000000e-11");
}

TEST_CASE("meta block carries version, command, and seed", "[io]") {
    const auto m = meta_json("qfi-optics sweep --photons 10", 42);
    CHECK(m["version"] == kVersion);
    CHECK(m["command"] == "qfi-optics sweep --photons 10");
    CHECK(m["seed"] == 42);
    CHECK_FALSE(meta_json("qfi-optics compute").contains("seed"));
}

TEST_CASE("sweep serialization round trips through JSON and CSV", "[io]") {
    const auto sweep = run_sweep(3, SweepMode::one_arm, {0.4, 0.6, 0.8});
    const auto j = sweep_to_json(sweep, meta_json("test"));
    const std::string text = canonical_dump(j);
    CHECK(canonical_dump(json::parse(text)) == text);

    const auto back = sweep_from_json(json::parse(text));
    CHECK(back.n_photons == sweep.n_photons);
    CHECK(back.mode == sweep.mode);
    CHECK(back.strategies == sweep.strategies);
    CHECK(back.metric_labels == sweep.metric_labels);
    REQUIRE(back.rows() == sweep.rows());
    for (size_t i = 0; i < sweep.rows(); ++i) {
        for (size_t c = 0; c < sweep.strategies.size(); ++c)
            CHECK_THAT(back.delta_phi[i][c], WithinAbs(sweep.delta_phi[i][c], 0.0));
        for (size_t k = 0; k < sweep.weights[i].size(); ++k)
            CHECK_THAT(back.weights[i][k], WithinAbs(sweep.weights[i][k], 0.0));
        CHECK(back.row_status[i] == "ok");
    }

    // the CSV must carry the same numbers to its 13 significant digits
    const std::string csv = sweep_to_csv(sweep, "test");
    std::istringstream lines(csv);
    std::string line;
    std::vector<std::vector<std::string>> rows;
    while (std::getline(lines, line)) {
        if (line.empty() || line[0] == '#') continue;
        std::vector<std::string> fields;
        std::istringstream fs(line);
        std::string field;
        while (std::getline(fs, field, ',')) fields.push_back(field);
        rows.push_back(std::move(fields));
    }
    REQUIRE(rows.size() == sweep.rows() + 1);   // header + data
    const size_t cols = 1 + sweep.strategies.size() + 1 +
                        static_cast<size_t>(sweep.n_photons) + 1 + 1;
    CHECK(rows[0].size() == cols);
    CHECK(rows[0][0] == "eta");
    CHECK(rows[0][1] == "delta_phi_SIL");
    CHECK(rows[0].back() == "status");
    for (size_t i = 0; i < sweep.rows(); ++i) {
        const auto& r = rows[i + 1];
        REQUIRE(r.size() == cols);
        CHECK_THAT(std::stod(r[0]), WithinAbs(sweep.eta_grid[i], 1e-12));
        for (size_t c = 0; c < sweep.strategies.size(); ++c) {
            const double got = std::stod(r[1 + c]);
            const double want = sweep.delta_phi[i][c];
            CHECK_THAT(got, WithinAbs(want, 1e-12 * std::abs(want)));
        }
        const size_t gap_col = 1 + sweep.strategies.size();
        CHECK_THAT(std::stod(r[gap_col]),
                   WithinAbs(sweep.bound_gap[i], 1e-12 + 1e-12 * std::abs(sweep.bound_gap[i])));
        for (int k = 0; k <= sweep.n_photons; ++k)
            CHECK_THAT(std::stod(r[gap_col + 1 + static_cast<size_t>(k)]),
                       WithinAbs(sweep.weights[i][static_cast<size_t>(k)], 1e-12));
        CHECK(r.back() == "ok");
    }
    CHECK(csv.find("# version=" + std::string(kVersion)) != std::string::npos);
    CHECK(csv.find("# command=test") != std::string::npos);
    CHECK(csv.find("# metric SIL=closed_form") != std::string::npos);
}

TEST_CASE("failed sweep rows survive serialization", "[io]") {
    auto sweep = run_sweep(2, SweepMode::two_arm, {0.5, 0.9});
    sweep.row_status[0] = "optimizer did not converge, eta=0.5";
    sweep.weights[0].clear();
    for (auto& v : sweep.delta_phi[0]) v = std::numeric_limits<double>::quiet_NaN();
    sweep.bound_gap[0] = std::numeric_limits<double>::quiet_NaN();

    const std::string text = canonical_dump(sweep_to_json(sweep, meta_json("test")));
    const auto back = sweep_from_json(json::parse(text));
    CHECK(back.row_status[0] == "optimizer did not converge, eta=0.5");
    CHECK(std::isnan(back.delta_phi[0][0]));
    CHECK(back.weights[0].empty());
    CHECK(back.row_status[1] == "ok");
    CHECK_FALSE(std::isnan(back.delta_phi[1][0]));

    const std::string csv = sweep_to_csv(sweep, "test");
    CHECK(csv.find("optimizer did not converge; eta=0.5") != std::string::npos);
    CHECK(csv.find("nan") != std::string::npos);
}

TEST_CASE("sweep schema rejects corrupted tables", "[io]") {
    const auto sweep = run_sweep(2, SweepMode::one_arm, {0.5, 0.9});
    auto j = sweep_to_json(sweep, meta_json("test"));
    auto missing = j;
    missing.erase("eta_grid");
    CHECK_THROWS_AS(sweep_from_json(missing), SchemaError);

    auto bad_grid = j;
    bad_grid["eta_grid"] = {0.9, 0.5};
    CHECK_THROWS_AS(sweep_from_json(bad_grid), SchemaError);

    auto bad_weights = j;
    bad_weights["weights"][0] = {0.5, 0.6, 0.2};
    CHECK_THROWS_AS(sweep_from_json(bad_weights), SchemaError);
}

TEST_CASE("state file loading reports missing files and bad JSON", "[io]") {
    CHECK_THROWS_AS(load_state_file("/nonexistent/state.json"), SchemaError);
    write_text_file("/tmp/qfio_bad.json", "{not json");
    CHECK_THROWS_AS(load_state_file("/tmp/qfio_bad.json"), SchemaError);
    write_text_file("/tmp/qfio_ok.json",
                    canonical_dump(state_to_json(make_noon(4))));
    CHECK(load_state_file("/tmp/qfio_ok.json").weights[4] == 0.5);
}
