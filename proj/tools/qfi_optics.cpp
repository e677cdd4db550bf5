// qfi-optics: quantum Fisher information of two-mode N-photon probes under
// photon loss. Subcommands compute information and precision bounds, optimize
// probe weights, sweep strategy comparisons over a transmissivity grid, locate
// extreme-mode usefulness thresholds, simulate maximum-likelihood estimation
// with the phase-anchored optimal measurement, and render sweep plots.
//
// Exit codes: 0 success, 2 input or schema error, 3 numerical-certification
// failure, 4 internal error.

#include <cmath>
#include <cstdint>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "qfio/io.hpp"
#include "qfio/measurement.hpp"
#include "qfio/optimizer.hpp"
#include "qfio/sld.hpp"
#include "qfio/svg.hpp"
#include "qfio/sweep.hpp"
#include "qfio/thresholds.hpp"

namespace {

std::string join_command(int argc, char** argv) {
    std::string cmd;
    for (int i = 0; i < argc; ++i) {
        if (i) cmd += ' ';
        cmd += argv[i];
    }
    return cmd;
}

void emit(const nlohmann::json& j, const std::string& out_path) {
    const std::string text = qfio::canonical_dump(j);
    if (out_path.empty())
        std::cout << text;
    else
        qfio::write_text_file(out_path, text);
}

struct ComputeOpts {
    std::string state_file;
    double eta_a = 1.0, eta_b = 1.0, phi = 0.0;
    std::string metric = "both";
    std::string out;
};

void run_compute(const ComputeOpts& o, const std::string& command) {
    const auto state = qfio::load_state_file(o.state_file);
    const qfio::LossModel loss{o.eta_a, o.eta_b};
    loss.validate();
    qfio::QfiReport report;
    if (o.metric == "exact") {
        report = qfio::qfi_exact(state, loss, o.phi);
    } else if (o.metric == "bound") {
        report.metric = qfio::QfiMetric::bound;
        report.f_bound = qfio::qfi_bound(state, loss);
    } else {
        report = qfio::qfi_exact(state, loss, o.phi);
        report.f_bound = qfio::qfi_bound(state, loss);
    }
    report.fill_gap();
    nlohmann::json j;
    j["meta"] = qfio::meta_json(command);
    j["loss"] = {{"eta_a", loss.eta_a}, {"eta_b", loss.eta_b}};
    j["report"] = qfio::report_to_json(report);
    j["state"] = qfio::state_to_json(state);
    emit(j, o.out);
}

struct OptimizeOpts {
    int photons = 2;
    double eta_a = 1.0, eta_b = 1.0;
    std::string metric = "bound";
    std::string out;
};

void run_optimize(const OptimizeOpts& o, const std::string& command) {
    const qfio::LossModel loss{o.eta_a, o.eta_b};
    loss.validate();
    const auto metric = o.metric == "one-arm" ? qfio::QfiMetric::one_arm_closed_form
                                              : qfio::QfiMetric::bound;
    const auto result = qfio::maximize_qfi(o.photons, loss, metric);
    const double residual = qfio::certify_optimum(result, loss);
    nlohmann::json j;
    j["meta"] = qfio::meta_json(command);
    j["certified_residual"] = residual;
    j["result"] = qfio::optimization_to_json(result);
    emit(j, o.out);
}

struct SweepOpts {
    int photons = 10;
    std::string mode = "two-arm";
    std::string grid = "0.05:1:96";
    std::string out = "sweep";
};

void run_sweep_cmd(const SweepOpts& o, const std::string& command) {
    const auto grid = qfio::parse_grid(o.grid);
    const auto mode = qfio::sweep_mode_from_string(o.mode);
    const auto sweep = qfio::run_sweep(o.photons, mode, grid.points());
    qfio::write_text_file(
        o.out + ".json",
        qfio::canonical_dump(qfio::sweep_to_json(sweep, qfio::meta_json(command))));
    qfio::write_text_file(o.out + ".csv", qfio::sweep_to_csv(sweep, command));
    size_t failed = 0;
    for (const auto& status : sweep.row_status)
        if (status != "ok") ++failed;
    std::cout << "wrote " << o.out << ".json and " << o.out << ".csv ("
              << sweep.rows() << " rows";
    if (failed) std::cout << ", " << failed << " failed";
    std::cout << ")\n";
}

struct ThresholdOpts {
    int photons = 10;
    std::string mode = "one-arm";
    std::string fit;
    std::string out;
};

void run_threshold(const ThresholdOpts& o, const std::string& command) {
    const bool one_arm = qfio::sweep_mode_from_string(o.mode) == qfio::SweepMode::one_arm;
    nlohmann::json j;
    j["meta"] = qfio::meta_json(command);
    j["mode"] = o.mode;
    if (!o.fit.empty()) {
        const auto colon = o.fit.find(':');
        if (colon == std::string::npos)
            throw qfio::SchemaError("fit: expected n_lo:n_hi");
        int lo = 0, hi = 0;
        try {
            lo = std::stoi(o.fit.substr(0, colon));
            hi = std::stoi(o.fit.substr(colon + 1));
        } catch (const std::exception&) {
            throw qfio::SchemaError("fit: expected integer n_lo:n_hi");
        }
        j["fit"] = {{"n_lo", lo},
                    {"n_hi", hi},
                    {"decay_constant", qfio::threshold_fit(one_arm, lo, hi)}};
    } else {
        const auto result = one_arm ? qfio::threshold_one_arm(o.photons)
                                    : qfio::threshold_two_arm(o.photons);
        j["n_photons"] = result.n_photons;
        j["eta_bar"] = result.eta_bar;
        j["method"] = qfio::to_string(result.method);
    }
    emit(j, o.out);
}

struct SimulateOpts {
    int photons = 1;
    double eta_a = 1.0, eta_b = 1.0;
    double phi = 0.7853981633974483;   // pi/4
    int nu = 10000;
    int trials = 100;
    std::uint64_t seed = 12345;
    std::string state_file;
    std::string out;
};

void run_simulate(const SimulateOpts& o, bool photons_given,
                  const std::string& command) {
    const qfio::LossModel loss{o.eta_a, o.eta_b};
    loss.validate();
    qfio::ProbeState state;
    if (o.state_file.empty()) {
        state = qfio::maximize_qfi(o.photons, loss, qfio::QfiMetric::bound).state;
    } else {
        state = qfio::load_state_file(o.state_file);
        if (photons_given && state.n_photons != o.photons)
            throw qfio::SchemaError("simulate: --photons disagrees with the state file");
    }

    const auto povm = qfio::optimal_povm(state, loss, o.phi);
    const double cfi = qfio::classical_fisher(povm, state, loss, o.phi);
    const double fq = qfio::qfi_exact(state, loss, o.phi).f_exact.value();
    const auto stats = qfio::simulate_ml(state, loss, povm, o.phi, o.nu, o.trials, o.seed);

    nlohmann::json j;
    j["meta"] = qfio::meta_json(command, o.seed);
    j["loss"] = {{"eta_a", loss.eta_a}, {"eta_b", loss.eta_b}};
    j["state"] = qfio::state_to_json(state);
    j["phi0"] = o.phi;
    j["repetitions"] = o.nu;
    j["trials"] = o.trials;
    j["classical_fisher"] = cfi;
    j["qfi_exact"] = fq;
    j["degenerate"] = stats.degenerate;
    j["merged_sectors"] = povm.merged_sectors;
    j["zero_variance_sectors"] = povm.zero_variance_sectors;
    j["mean"] = stats.mean;
    j["variance"] = stats.variance;
    if (stats.degenerate || cfi <= 0.0) {
        j["band_ok"] = nullptr;   // no information to benchmark against
    } else {
        const double crb = 1.0 / (static_cast<double>(o.nu) * cfi);
        j["crb"] = crb;
        j["band"] = {0.7 * crb, 1.4 * crb};
        j["band_ok"] = stats.variance >= 0.7 * crb && stats.variance <= 1.4 * crb;
    }
    emit(j, o.out);
}

struct PlotOpts {
    std::string sweep_file;
    std::string out = "plot";
};

void run_plot(const PlotOpts& o, const std::string& command) {
    const auto sweep = qfio::sweep_from_json(qfio::load_json_file(o.sweep_file));
    qfio::write_text_file(o.out + "_precision.svg",
                          qfio::render_precision_chart(sweep, command));
    qfio::write_text_file(o.out + "_weights.svg",
                          qfio::render_weight_profile(sweep, command));
    std::cout << "wrote " << o.out << "_precision.svg and " << o.out
              << "_weights.svg\n";
}

} // namespace

int main(int argc, char** argv) {
    const std::string command = join_command(argc, argv);
    CLI::App app{"two-mode N-photon phase probes under photon loss"};
    app.require_subcommand(1);

    ComputeOpts copts;
    auto* compute = app.add_subcommand(
        "compute", "information and precision of a probe state under loss");
    compute->add_option("state-file", copts.state_file, "probe state JSON")->required();
    compute->add_option("--eta-a", copts.eta_a, "transmissivity of arm a")
        ->check(CLI::Range(0.0, 1.0));
    compute->add_option("--eta-b", copts.eta_b, "transmissivity of arm b")
        ->check(CLI::Range(0.0, 1.0));
    compute->add_option("--metric", copts.metric, "exact, bound, or both")
        ->check(CLI::IsMember({"exact", "bound", "both"}));
    compute->add_option("--phi", copts.phi, "phase for the exact evaluation");
    compute->add_option("--out", copts.out, "output path (default stdout)");
    compute->callback([&] { run_compute(copts, command); });

    OptimizeOpts oopts;
    auto* optimize = app.add_subcommand(
        "optimize", "loss-optimal probe weights with a stationarity certificate");
    optimize->add_option("--photons", oopts.photons, "photon number N")
        ->required()
        ->check(CLI::Range(1, qfio::kMaxPhotons));
    optimize->add_option("--eta-a", oopts.eta_a, "transmissivity of arm a")
        ->check(CLI::Range(0.0, 1.0));
    optimize->add_option("--eta-b", oopts.eta_b, "transmissivity of arm b")
        ->check(CLI::Range(0.0, 1.0));
    optimize->add_option("--metric", oopts.metric, "bound or one-arm")
        ->check(CLI::IsMember({"bound", "one-arm"}));
    optimize->add_option("--out", oopts.out, "output path (default stdout)");
    optimize->callback([&] { run_optimize(oopts, command); });

    SweepOpts sopts;
    auto* sweep = app.add_subcommand(
        "sweep", "strategy comparison table over a transmissivity grid");
    sweep->add_option("--photons", sopts.photons, "photon number N")
        ->required()
        ->check(CLI::Range(1, qfio::kMaxPhotons));
    sweep->add_option("--mode", sopts.mode, "one-arm or two-arm")
        ->check(CLI::IsMember({"one-arm", "two-arm"}));
    sweep->add_option("--grid", sopts.grid, "start:stop:steps within (0, 1]");
    sweep->add_option("--out", sopts.out, "output prefix for .json and .csv");
    sweep->callback([&] { run_sweep_cmd(sopts, command); });

    ThresholdOpts topts;
    auto* threshold = app.add_subcommand(
        "threshold", "transmissivity above which the extreme-mode probe is optimal");
    threshold->add_option("--photons", topts.photons, "photon number N")
        ->check(CLI::Range(2, qfio::kMaxPhotons));
    threshold->add_option("--mode", topts.mode, "one-arm or two-arm")
        ->check(CLI::IsMember({"one-arm", "two-arm"}));
    threshold->add_option("--fit", topts.fit,
                          "n_lo:n_hi, fit the 1 - a/N threshold decay instead");
    threshold->add_option("--out", topts.out, "output path (default stdout)");
    threshold->callback([&] { run_threshold(topts, command); });

    SimulateOpts mopts;
    auto* simulate = app.add_subcommand(
        "simulate", "maximum-likelihood estimation with the anchored measurement");
    simulate->add_option("--photons", mopts.photons, "photon number N")
        ->check(CLI::Range(1, qfio::kMaxPhotons));
    simulate->add_option("--eta-a", mopts.eta_a, "transmissivity of arm a")
        ->check(CLI::Range(0.0, 1.0));
    simulate->add_option("--eta-b", mopts.eta_b, "transmissivity of arm b")
        ->check(CLI::Range(0.0, 1.0));
    simulate->add_option("--phi", mopts.phi, "true phase and measurement anchor");
    simulate->add_option("--nu", mopts.nu, "repetitions per trial")
        ->check(CLI::PositiveNumber);
    simulate->add_option("--trials", mopts.trials, "independent trials")
        ->check(CLI::PositiveNumber);
    simulate->add_option("--seed", mopts.seed, "simulation seed");
    simulate->add_option("--state", mopts.state_file,
                         "probe state JSON (default: optimized for the loss)");
    simulate->add_option("--out", mopts.out, "output path (default stdout)");
    simulate->callback(
        [&] { run_simulate(mopts, simulate->count("--photons") > 0, command); });

    PlotOpts popts;
    auto* plot = app.add_subcommand("plot", "render sweep tables as SVG charts");
    plot->add_option("sweep-file", popts.sweep_file, "sweep JSON file")->required();
    plot->add_option("--out", popts.out, "output prefix for the .svg files");
    plot->callback([&] { run_plot(popts, command); });

    try {
        app.parse(argc, argv);
        return 0;
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    } catch (const qfio::CertificationError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 3;
    } catch (const qfio::SchemaError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const std::logic_error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << '\n';
        return 4;
    }
}
