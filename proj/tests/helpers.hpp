#pragma once

#include <random>
#include <vector>

#include "qfio/fock.hpp"

namespace qfio::test {

// Dirichlet(1) sample: uniform over the probability simplex.
inline std::vector<double> random_simplex(std::mt19937_64& rng, int dim) {
    std::exponential_distribution<double> exp1(1.0);
    std::vector<double> x(static_cast<size_t>(dim));
    double sum = 0.0;
    for (auto& v : x) { v = exp1(rng); sum += v; }
    for (auto& v : x) v /= sum;
    return x;
}

inline ProbeState random_state(std::mt19937_64& rng, int n, bool with_phases = false) {
    ProbeState s;
    s.n_photons = n;
    s.weights = random_simplex(rng, n + 1);
    if (with_phases) {
        std::uniform_real_distribution<double> ang(0.0, 6.28318530717958647692);
        s.phases.resize(static_cast<size_t>(n) + 1);
        for (auto& p : s.phases) p = ang(rng);
    }
    return s;
}

inline LossModel random_loss(std::mt19937_64& rng, double lo = 0.05, double hi = 1.0) {
    std::uniform_real_distribution<double> u(lo, hi);
    return LossModel{u(rng), u(rng)};
}

// Interior simplex point with all coordinates at least `floor_frac / dim`.
inline std::vector<double> random_interior(std::mt19937_64& rng, int dim,
                                           double floor_frac = 0.05) {
    auto x = random_simplex(rng, dim);
    const double f = floor_frac / static_cast<double>(dim);
    double sum = 0.0;
    for (auto& v : x) { v = f + (1.0 - floor_frac) * v; sum += v; }
    for (auto& v : x) v /= sum;
    return x;
}

} // namespace qfio::test
