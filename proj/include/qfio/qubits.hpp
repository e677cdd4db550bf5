#pragma once

// Distinguishable-photon picture: N photons as N qubits, probe weights over
// all 2^N binary strings (bit = photon travels through arm a). Evaluates the
// two-arm information bound in this larger space and implements the
// symmetrization map showing permutation-invariant probes are never worse.
// Capped at N <= 12; this module verifies a structural claim at desk scale.

#include <bit>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "qfio/qfi.hpp"

namespace qfio {

inline constexpr int kMaxQubitPhotons = 12;

struct QubitProbe {
    int n_photons = 0;
    std::vector<double> weights;  // indexed by the binary string

    void validate() const {
        if (n_photons < 1)
            throw std::invalid_argument("QubitProbe: need at least one photon");
        if (n_photons > kMaxQubitPhotons)
            throw std::length_error("QubitProbe: dimension overflow past 12 photons");
        if (weights.size() != (size_t{1} << n_photons))
            throw std::invalid_argument("QubitProbe: need exactly 2^N weights");
        double sum = 0.0;
        for (double w : weights) {
            if (w < 0.0 || !std::isfinite(w))
                throw std::invalid_argument("QubitProbe: weights must be finite and nonnegative");
            sum += w;
        }
        if (std::abs(sum - 1.0) > 1e-12)
            throw std::invalid_argument("QubitProbe: weights must sum to 1");
    }
};

inline QubitProbe make_qubit_probe(int n_photons, std::vector<double> weights) {
    QubitProbe p{n_photons, std::move(weights)};
    p.validate();
    return p;
}

// Mass split evenly between the all-zeros and all-ones strings.
inline QubitProbe make_ghz(int n_photons) {
    std::vector<double> w(size_t{1} << n_photons, 0.0);
    w.front() = 0.5;
    w.back() = 0.5;
    return make_qubit_probe(n_photons, std::move(w));
}

// Two-arm information bound over binary strings. Loss events are string
// pairs (l_a, l_b) with l_a <= k and l_b <= complement(k); the weight of an
// event depends on the Hamming counts only, so the per-event coefficient is
// looked up by counts while the string sums run over the full space.
inline double qfi_bound_qubits(const QubitProbe& probe, const LossModel& loss) {
    probe.validate();
    loss.validate();
    const int n = probe.n_photons;
    const std::uint32_t full = (std::uint32_t{1} << n) - 1;

    double first = 0.0;
    for (std::uint32_t k = 0; k <= full; ++k) {
        const int kb = std::popcount(k);
        first += static_cast<double>(kb) * kb * probe.weights[k];
    }

    // powers of the four single-photon outcomes
    std::vector<double> pa(static_cast<size_t>(n) + 1), qa(pa), pb(pa), qb(pa);
    pa[0] = qa[0] = pb[0] = qb[0] = 1.0;
    for (int i = 1; i <= n; ++i) {
        pa[static_cast<size_t>(i)] = pa[static_cast<size_t>(i - 1)] * loss.eta_a;
        qa[static_cast<size_t>(i)] = qa[static_cast<size_t>(i - 1)] * (1.0 - loss.eta_a);
        pb[static_cast<size_t>(i)] = pb[static_cast<size_t>(i - 1)] * loss.eta_b;
        qb[static_cast<size_t>(i)] = qb[static_cast<size_t>(i - 1)] * (1.0 - loss.eta_b);
    }

    double subtracted = 0.0;
    for (std::uint32_t la = 0; la <= full; ++la) {
        const int lab = std::popcount(la);
        const std::uint32_t rest = full & ~la;
        // enumerate l_b over submasks of the complement of l_a
        std::uint32_t lb = rest;
        while (true) {
            const int lbb = std::popcount(lb);
            const std::uint32_t free = rest & ~lb;
            double a = 0.0, b = 0.0;
            // strings k = la | s with s a submask of the unconstrained bits
            std::uint32_t s = free;
            while (true) {
                const std::uint32_t k = la | s;
                const int kb = lab + std::popcount(s);
                const double w =
                    qa[static_cast<size_t>(lab)] * pa[static_cast<size_t>(kb - lab)] *
                    qb[static_cast<size_t>(lbb)] *
                    pb[static_cast<size_t>(n - kb - lbb)];
                const double xw = probe.weights[k] * w;
                b += xw;
                a += kb * xw;
                if (s == 0) break;
                s = (s - 1) & free;
            }
            if (b > 0.0) subtracted += (a / b) * a;
            if (lb == 0) break;
            lb = (lb - 1) & rest;
        }
    }
    return 4.0 * (first - subtracted);
}

// Orbit average: every string inherits the mean weight of its Hamming class.
inline QubitProbe symmetrize(const QubitProbe& probe) {
    probe.validate();
    const int n = probe.n_photons;
    std::vector<double> total(static_cast<size_t>(n) + 1, 0.0);
    for (size_t k = 0; k < probe.weights.size(); ++k)
        total[static_cast<size_t>(std::popcount(k))] += probe.weights[k];
    QubitProbe out{n, std::vector<double>(probe.weights.size())};
    for (size_t k = 0; k < probe.weights.size(); ++k) {
        const int w = std::popcount(k);
        out.weights[k] = total[static_cast<size_t>(w)] /
                         binomial(n, static_cast<int>(w));
    }
    return out;
}

// Maps a permutation-invariant qubit probe onto the two-mode Fock probe
// carrying the same Hamming-class weights.
inline ProbeState embed_symmetric(const QubitProbe& probe) {
    probe.validate();
    const int n = probe.n_photons;
    std::vector<double> total(static_cast<size_t>(n) + 1, 0.0);
    for (size_t k = 0; k < probe.weights.size(); ++k)
        total[static_cast<size_t>(std::popcount(k))] += probe.weights[k];
    for (size_t k = 0; k < probe.weights.size(); ++k) {
        const int w = std::popcount(k);
        const double mean =
            total[static_cast<size_t>(w)] / binomial(n, static_cast<int>(w));
        if (std::abs(probe.weights[k] - mean) > 1e-10)
            throw std::invalid_argument(
                "embed_symmetric: probe is not permutation-invariant");
    }
    return make_state(n, std::move(total));
}

} // namespace qfio
