#pragma once

// Persistence: the probe-state JSON schema, canonical JSON emission (sorted
// keys, shortest round-trip floats, two-space indent, trailing newline), and
// the sweep table in JSON and CSV form. CSV floats use fixed "%.12e" so the
// artifacts diff cleanly.

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <limits>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "qfio/fock.hpp"
#include "qfio/optimizer.hpp"
#include "qfio/qfi.hpp"
#include "qfio/sweep.hpp"
#include "qfio/version.hpp"

namespace qfio {

struct SchemaError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

inline std::string canonical_dump(const nlohmann::json& j) {
    return j.dump(2) + "\n";
}

inline nlohmann::json load_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw SchemaError("cannot open " + path);
    try {
        return nlohmann::json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw SchemaError(path + ": " + e.what());
    }
}

inline void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open " + path + " for writing");
    out << content;
    if (!out) throw std::runtime_error("write to " + path + " failed");
}

// Provenance block embedded in every emitted file.
inline nlohmann::json meta_json(const std::string& command,
                                std::optional<std::uint64_t> seed = {}) {
    nlohmann::json m;
    m["version"] = kVersion;
    m["command"] = command;
    if (seed) m["seed"] = *seed;
    return m;
}

inline double number_field(const nlohmann::json& v, const char* what) {
    if (!v.is_number()) throw SchemaError(std::string(what) + " must be a number");
    return v.get<double>();
}

// Schema: {"n_photons": int, "weights": [floats], "phases": optional [floats]}.
// Weight sums within 1e-9 of 1 are renormalized; anything further off is an
// error rather than a silent fix.
inline ProbeState state_from_json(const nlohmann::json& j) {
    if (!j.is_object()) throw SchemaError("state: expected a JSON object");
    if (!j.contains("n_photons") || !j["n_photons"].is_number_integer())
        throw SchemaError("state: integer field \"n_photons\" is required");
    if (!j.contains("weights") || !j["weights"].is_array())
        throw SchemaError("state: array field \"weights\" is required");
    const long long n = j["n_photons"].get<long long>();
    if (n < 1 || n > kMaxPhotons)
        throw SchemaError("state: n_photons must lie in [1, " +
                          std::to_string(kMaxPhotons) + "]");
    const size_t want = static_cast<size_t>(n) + 1;

    std::vector<double> weights;
    weights.reserve(want);
    double sum = 0.0;
    for (const auto& v : j["weights"]) {
        const double w = number_field(v, "state: every weight");
        if (!std::isfinite(w) || w < 0.0)
            throw SchemaError("state: weights must be finite and nonnegative");
        weights.push_back(w);
        sum += w;
    }
    if (weights.size() != want)
        throw SchemaError("state: expected " + std::to_string(want) +
                          " weights for n_photons=" + std::to_string(n));
    if (std::abs(sum - 1.0) > 1e-9) {
        std::ostringstream msg;
        msg << "state: weights sum to " << sum << ", more than 1e-9 away from 1";
        throw SchemaError(msg.str());
    }
    for (auto& w : weights) w /= sum;

    std::vector<double> phases;
    if (j.contains("phases") && !j["phases"].is_null()) {
        if (!j["phases"].is_array())
            throw SchemaError("state: \"phases\" must be an array");
        for (const auto& v : j["phases"]) {
            const double p = number_field(v, "state: every phase");
            if (!std::isfinite(p)) throw SchemaError("state: phases must be finite");
            phases.push_back(p);
        }
        if (phases.size() != want)
            throw SchemaError("state: phases must have length n_photons + 1");
    }

    try {
        return make_state(static_cast<int>(n), std::move(weights), std::move(phases));
    } catch (const std::invalid_argument& e) {
        throw SchemaError(std::string("state: ") + e.what());
    }
}

inline nlohmann::json state_to_json(const ProbeState& state) {
    nlohmann::json j;
    j["n_photons"] = state.n_photons;
    j["weights"] = state.weights;
    if (!state.phases.empty()) j["phases"] = state.phases;
    return j;
}

inline ProbeState load_state_file(const std::string& path) {
    return state_from_json(load_json_file(path));
}

inline nlohmann::json report_to_json(const QfiReport& report) {
    nlohmann::json j;
    j["metric"] = to_string(report.metric);
    j["delta_phi_min"] = report.delta_phi_min;
    if (report.f_exact) j["f_exact"] = *report.f_exact;
    if (report.f_bound) j["f_bound"] = *report.f_bound;
    if (report.gap) j["gap"] = *report.gap;
    return j;
}

inline nlohmann::json optimization_to_json(const OptimizationResult& result) {
    nlohmann::json j;
    j["state"] = state_to_json(result.state);
    j["objective"] = result.objective;
    j["delta_phi_min"] = result.objective > 0.0
                             ? 1.0 / std::sqrt(result.objective)
                             : std::numeric_limits<double>::infinity();
    j["metric"] = to_string(result.metric);
    j["kkt_residual"] = result.kkt_residual;
    j["iterations"] = result.iterations;
    j["converged"] = result.converged;
    j["loss"] = {{"eta_a", result.loss.eta_a}, {"eta_b", result.loss.eta_b}};
    return j;
}

// "start:stop:steps" with 0 < start < stop <= 1 and steps >= 2 points.
struct GridSpec {
    double start = 0.0;
    double stop = 0.0;
    int steps = 0;

    std::vector<double> points() const {
        std::vector<double> p(static_cast<size_t>(steps));
        for (int i = 0; i < steps; ++i)
            p[static_cast<size_t>(i)] =
                start + (stop - start) * i / static_cast<double>(steps - 1);
        p.back() = stop;
        return p;
    }
};

inline GridSpec parse_grid(const std::string& text) {
    const auto a = text.find(':');
    const auto b = text.rfind(':');
    if (a == std::string::npos || b == a)
        throw SchemaError("grid: expected start:stop:steps");
    GridSpec g;
    try {
        size_t used = 0;
        const std::string s0 = text.substr(0, a);
        const std::string s1 = text.substr(a + 1, b - a - 1);
        const std::string s2 = text.substr(b + 1);
        g.start = std::stod(s0, &used);
        if (used != s0.size()) throw std::invalid_argument("start");
        g.stop = std::stod(s1, &used);
        if (used != s1.size()) throw std::invalid_argument("stop");
        g.steps = std::stoi(s2, &used);
        if (used != s2.size()) throw std::invalid_argument("steps");
    } catch (const std::exception&) {
        throw SchemaError("grid: could not parse \"" + text + "\" as start:stop:steps");
    }
    if (g.steps < 2) throw SchemaError("grid: need at least 2 points");
    if (!(g.start > 0.0) || !(g.stop <= 1.0) || !(g.start < g.stop))
        throw SchemaError("grid: require 0 < start < stop <= 1 "
                          "(endpoint eta=0 is outside every formula's domain)");
    return g;
}

inline nlohmann::json sweep_to_json(const SweepResult& sweep,
                                    const nlohmann::json& meta) {
    nlohmann::json j;
    j["meta"] = meta;
    j["n_photons"] = sweep.n_photons;
    j["mode"] = to_string(sweep.mode);
    j["eta_grid"] = sweep.eta_grid;
    j["strategies"] = sweep.strategies;
    j["metric_labels"] = sweep.metric_labels;
    j["delta_phi"] = sweep.delta_phi;      // NaN rows serialize as null
    j["weights"] = sweep.weights;
    j["bound_gap"] = sweep.bound_gap;
    j["row_status"] = sweep.row_status;
    return j;
}

namespace detail {

inline double json_double(const nlohmann::json& v) {
    return v.is_null() ? std::numeric_limits<double>::quiet_NaN()
                       : number_field(v, "sweep: entry");
}

} // namespace detail

inline SweepResult sweep_from_json(const nlohmann::json& j) {
    if (!j.is_object()) throw SchemaError("sweep: expected a JSON object");
    for (const char* key : {"n_photons", "mode", "eta_grid", "strategies",
                            "metric_labels", "delta_phi", "weights", "bound_gap",
                            "row_status"})
        if (!j.contains(key))
            throw SchemaError(std::string("sweep: field \"") + key + "\" is required");
    SweepResult s;
    try {
        s.n_photons = j["n_photons"].get<int>();
        s.mode = sweep_mode_from_string(j["mode"].get<std::string>());
        s.eta_grid = j["eta_grid"].get<std::vector<double>>();
        s.strategies = j["strategies"].get<std::vector<std::string>>();
        s.metric_labels = j["metric_labels"].get<std::vector<std::string>>();
        for (const auto& row : j["delta_phi"]) {
            std::vector<double> r;
            for (const auto& v : row) r.push_back(detail::json_double(v));
            s.delta_phi.push_back(std::move(r));
        }
        for (const auto& row : j["weights"])
            s.weights.push_back(row.get<std::vector<double>>());
        for (const auto& v : j["bound_gap"])
            s.bound_gap.push_back(detail::json_double(v));
        s.row_status = j["row_status"].get<std::vector<std::string>>();
    } catch (const nlohmann::json::exception& e) {
        throw SchemaError(std::string("sweep: ") + e.what());
    }
    try {
        s.validate();
    } catch (const std::invalid_argument& e) {
        throw SchemaError(std::string("sweep: ") + e.what());
    }
    return s;
}

inline std::string csv_number(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.12e", v);
    return buf;
}

// Header comments carry the same provenance as the JSON meta block; the
// column row makes the file self-describing.
inline std::string sweep_to_csv(const SweepResult& sweep, const std::string& command,
                                std::optional<std::uint64_t> seed = {}) {
    std::ostringstream out;
    out << "# qfi-optics sweep\n";
    out << "# version=" << kVersion << "\n";
    out << "# command=" << command << "\n";
    if (seed) out << "# seed=" << *seed << "\n";
    out << "# n_photons=" << sweep.n_photons << "\n";
    out << "# mode=" << to_string(sweep.mode) << "\n";
    for (size_t c = 0; c < sweep.strategies.size(); ++c)
        out << "# metric " << sweep.strategies[c] << "=" << sweep.metric_labels[c] << "\n";
    out << "eta";
    for (const auto& name : sweep.strategies) out << ",delta_phi_" << name;
    out << ",bound_gap";
    for (int k = 0; k <= sweep.n_photons; ++k) out << ",x_" << k;
    out << ",status\n";
    for (size_t i = 0; i < sweep.rows(); ++i) {
        out << csv_number(sweep.eta_grid[i]);
        for (double v : sweep.delta_phi[i]) out << ',' << csv_number(v);
        out << ',' << csv_number(sweep.bound_gap[i]);
        for (int k = 0; k <= sweep.n_photons; ++k) {
            const auto& w = sweep.weights[i];
            out << ',' << csv_number(w.empty() ? std::numeric_limits<double>::quiet_NaN()
                                               : w[static_cast<size_t>(k)]);
        }
        std::string status = sweep.row_status[i];
        for (auto& ch : status)
            if (ch == ',' || ch == '\n') ch = ';';   // keep the row parseable
        out << ',' << status << '\n';
    }
    return out.str();
}

} // namespace qfio
