#pragma once

// Closed-form baseline strategies: shot-noise interferometry (SIL), the
// Heisenberg limit, the optimally unbalanced extreme-mode probe, the two
// chopping variants (splitting N photons into N/n independent batches of
// size n), and the sine-profile state. All precisions are phase standard
// deviations per total use of N photons.

#include <cmath>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>

#include "qfio/fock.hpp"

namespace qfio {

enum class StrategyName {
    sil,
    heisenberg,
    noon,
    chop_one_arm,
    chop_two_arm,
    sine_state,
    optimal,
};

inline const char* to_string(StrategyName name) {
    switch (name) {
        case StrategyName::sil: return "SIL";
        case StrategyName::heisenberg: return "Heisenberg";
        case StrategyName::noon: return "N00N";
        case StrategyName::chop_one_arm: return "chop_one_arm";
        case StrategyName::chop_two_arm: return "chop_two_arm";
        case StrategyName::sine_state: return "sine_state";
        case StrategyName::optimal: return "optimal";
    }
    return "unknown";
}

struct StrategyPrecision {
    StrategyName name = StrategyName::optimal;
    double delta_phi = 0.0;
    std::optional<std::string> regime;
    std::optional<double> optimal_n;
};

inline double sil(int n_photons, const LossModel& loss) {
    if (n_photons < 1)
        throw std::invalid_argument("sil: need at least one photon");
    if (loss.eta_a <= 0.0 || loss.eta_b <= 0.0)
        return std::numeric_limits<double>::infinity();
    return (std::sqrt(loss.eta_a) + std::sqrt(loss.eta_b)) /
           (2.0 * std::sqrt(n_photons * loss.eta_a * loss.eta_b));
}

struct NoonPrecision {
    double delta_phi = 0.0;
    double x0 = 0.5;  // optimal weight of the all-photons-in-arm-b component
};

inline NoonPrecision noon_precision(int n_photons, const LossModel& loss) {
    if (n_photons < 1)
        throw std::invalid_argument("noon_precision: need at least one photon");
    if (loss.eta_a <= 0.0 || loss.eta_b <= 0.0)
        return {std::numeric_limits<double>::infinity(), 0.5};
    const double ha = std::pow(loss.eta_a, n_photons / 2.0);
    const double hb = std::pow(loss.eta_b, n_photons / 2.0);
    return {(ha + hb) / (2.0 * n_photons * ha * hb), ha / (ha + hb)};
}

namespace detail {

struct ChopConstants {
    double eta0;  // root of 1 + sqrt(eta) + ln(eta) = 0
    double c;     // |ln eta0|, the optimal chop size is c / |ln eta|
};

inline const ChopConstants& chop_constants() {
    static const ChopConstants k = [] {
        double lo = 0.05, hi = 0.95;
        auto f = [](double eta) { return 1.0 + std::sqrt(eta) + std::log(eta); };
        while (hi - lo > 1e-15) {
            const double mid = 0.5 * (lo + hi);
            ((f(mid) < 0.0) ? lo : hi) = mid;
        }
        const double eta0 = 0.5 * (lo + hi);
        return ChopConstants{eta0, -std::log(eta0)};
    }();
    return k;
}

} // namespace detail

inline StrategyPrecision chop_one_arm(int n_photons, double eta) {
    if (n_photons < 1)
        throw std::invalid_argument("chop_one_arm: need at least one photon");
    if (eta <= 0.0 || eta > 1.0)
        throw std::invalid_argument("chop_one_arm: eta must lie in (0, 1]");
    const auto& [eta0, c] = detail::chop_constants();
    const double n = static_cast<double>(n_photons);
    StrategyPrecision out;
    out.name = StrategyName::chop_one_arm;
    if (eta <= eta0) {
        out.delta_phi = (1.0 + std::sqrt(eta)) / (2.0 * std::sqrt(n * eta));
        out.regime = "single_photon";
        out.optimal_n = 1.0;
    } else if (eta <= std::pow(eta0, 1.0 / n)) {
        out.delta_phi = (1.0 + std::sqrt(eta0)) / (2.0 * std::sqrt(n * eta0)) *
                        std::sqrt(std::log(eta) / std::log(eta0));
        out.regime = "chopped";
        out.optimal_n = c / std::abs(std::log(eta));
    } else {
        const double h = std::pow(eta, n / 2.0);
        out.delta_phi = (1.0 + h) / (2.0 * n * h);
        out.regime = "full_noon";
        out.optimal_n = n;
    }
    return out;
}

inline StrategyPrecision chop_two_arm(int n_photons, double eta) {
    if (n_photons < 1)
        throw std::invalid_argument("chop_two_arm: need at least one photon");
    if (eta <= 0.0 || eta > 1.0)
        throw std::invalid_argument("chop_two_arm: eta must lie in (0, 1]");
    const double n = static_cast<double>(n_photons);
    const double e_inv = std::exp(-1.0);
    StrategyPrecision out;
    out.name = StrategyName::chop_two_arm;
    if (eta <= e_inv) {
        out.delta_phi = 1.0 / std::sqrt(n * eta);
        out.regime = "single_photon";
        out.optimal_n = 1.0;
    } else if (eta <= std::exp(-1.0 / n)) {
        out.delta_phi = std::sqrt(std::exp(1.0) * std::abs(std::log(eta)) / n);
        out.regime = "chopped";
        out.optimal_n = 1.0 / std::abs(std::log(eta));
    } else {
        out.delta_phi = 1.0 / (n * std::pow(eta, n / 2.0));
        out.regime = "full_noon";
        out.optimal_n = n;
    }
    return out;
}

// x_k proportional to sin^2(pi (k+1) / (N+2)); the analytic normalization is
// 2/(N+2), re-applied numerically to absorb rounding.
inline ProbeState sine_state(int n_photons) {
    if (n_photons < 1)
        throw std::invalid_argument("sine_state: need at least one photon");
    std::vector<double> w(static_cast<size_t>(n_photons) + 1);
    const double period = static_cast<double>(n_photons) + 2.0;
    double sum = 0.0;
    for (int k = 0; k <= n_photons; ++k) {
        const double s = std::sin(M_PI * (k + 1) / period);
        w[static_cast<size_t>(k)] = s * s;
        sum += s * s;
    }
    for (auto& v : w) v /= sum;
    return make_state(n_photons, std::move(w));
}

inline double heisenberg(int n_photons) {
    if (n_photons < 1)
        throw std::invalid_argument("heisenberg: need at least one photon");
    return 1.0 / static_cast<double>(n_photons);
}

} // namespace qfio
