#pragma once

// Two-mode N-photon probe states and the beam-splitter loss channel.
//
// A probe is sum_k alpha_k |k, N-k>, parametrized by weights x_k = |alpha_k|^2
// and optional phases. Loss with per-arm transmissivities (eta_a, eta_b) maps
// the pure probe to an incoherent mixture over loss events (l_a, l_b); the
// conditional branch amplitudes live on the surviving components
// |k-l_a, N-k-l_b>, k in [l_a, N-l_b].

#include <cmath>
#include <complex>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace qfio {

using complexd = std::complex<double>;

// Binomial coefficients by multiplicative recurrence keep full double
// precision across the supported range (integer-exact up to 2^53, within a
// few ulp beyond); the guard keeps callers honest about it.
inline constexpr int kMaxPhotons = 100;

inline double binomial(int n, int k) {
    if (n < 0 || k < 0 || k > n)
        throw std::out_of_range("binomial: need 0 <= k <= n");
    if (n > kMaxPhotons)
        throw std::out_of_range("binomial: n exceeds supported range " +
                                std::to_string(kMaxPhotons));
    if (k > n - k) k = n - k;
    double c = 1.0;
    for (int i = 1; i <= k; ++i)
        c = c * static_cast<double>(n - k + i) / static_cast<double>(i);
    return c;
}

struct LossModel {
    double eta_a = 1.0; // power transmissivity of arm a, in [0,1]
    double eta_b = 1.0;

    void validate() const {
        if (!(eta_a >= 0.0 && eta_a <= 1.0) || !(eta_b >= 0.0 && eta_b <= 1.0))
            throw std::invalid_argument("LossModel: transmissivities must lie in [0,1]");
    }
};

struct ProbeState {
    int n_photons = 0;
    std::vector<double> weights;       // x_k, k = 0..N; nonnegative, sums to 1
    std::vector<double> phases;        // arg(alpha_k); empty means all zero

    static constexpr double kSumTolerance = 1e-12;

    double phase(int k) const { return phases.empty() ? 0.0 : phases[static_cast<size_t>(k)]; }

    complexd amplitude(int k) const {
        const double r = std::sqrt(weights[static_cast<size_t>(k)]);
        return phases.empty() ? complexd(r, 0.0)
                              : std::polar(r, phases[static_cast<size_t>(k)]);
    }

    void validate() const {
        if (n_photons < 0 || n_photons > kMaxPhotons)
            throw std::invalid_argument("ProbeState: photon number outside [0, " +
                                        std::to_string(kMaxPhotons) + "]");
        const size_t want = static_cast<size_t>(n_photons) + 1;
        if (weights.size() != want)
            throw std::invalid_argument("ProbeState: weights must have length N+1");
        if (!phases.empty() && phases.size() != want)
            throw std::invalid_argument("ProbeState: phases must be empty or length N+1");
        double sum = 0.0;
        for (double w : weights) {
            if (!(w >= 0.0))
                throw std::invalid_argument("ProbeState: weights must be nonnegative");
            sum += w;
        }
        if (std::abs(sum - 1.0) > kSumTolerance)
            throw std::invalid_argument("ProbeState: weights must sum to 1 within 1e-12");
    }
};

inline ProbeState make_state(int n_photons, std::vector<double> weights,
                             std::vector<double> phases = {}) {
    ProbeState s{n_photons, std::move(weights), std::move(phases)};
    s.validate();
    return s;
}

// Balanced or weighted superposition of |N,0> and |0,N>; x0 is the weight of
// the component with all photons in arm a.
inline ProbeState make_noon(int n_photons, double x0 = 0.5) {
    std::vector<double> w(static_cast<size_t>(n_photons) + 1, 0.0);
    w.front() = 1.0 - x0;   // k = 0: all photons in arm b
    w.back() = x0;          // k = N: all photons in arm a
    return make_state(n_photons, std::move(w));
}

// Probability that the loss event (l_a, l_b) occurs given that all N photons
// sit in component |k, N-k>. Evaluated in the factored form so the endpoints
// eta = 0 and eta = 1 are exact.
inline double loss_coefficient(int n, int k, int la, int lb, const LossModel& loss) {
    if (!(0 <= la && la <= k && k <= n && 0 <= lb && lb <= n - k))
        throw std::out_of_range("loss_coefficient: need 0 <= l_a <= k <= N and 0 <= l_b <= N-k");
    return binomial(k, la) * binomial(n - k, lb) *
           std::pow(loss.eta_a, k - la) * std::pow(1.0 - loss.eta_a, la) *
           std::pow(loss.eta_b, n - k - lb) * std::pow(1.0 - loss.eta_b, lb);
}

// Loss events ordered by total loss l = l_a + l_b ascending, then l_a
// ascending, so downstream outputs are deterministic.
inline std::vector<std::pair<int, int>> loss_events(int n) {
    std::vector<std::pair<int, int>> out;
    out.reserve(static_cast<size_t>((n + 1) * (n + 2) / 2));
    for (int l = 0; l <= n; ++l)
        for (int la = 0; la <= l; ++la)
            out.emplace_back(la, l - la);
    return out;
}

struct ConditionalBranch {
    int lost_a = 0;
    int lost_b = 0;
    double probability = 0.0;
    // Normalized amplitudes over |k-l_a, N-k-l_b>, k = l_a .. N-l_b. The
    // e^{ik phi} factors use the pre-loss photon number k; within a branch
    // this differs from the post-loss convention by a global phase only.
    std::vector<complexd> amplitudes;
};

inline std::vector<ConditionalBranch> decompose_output(const ProbeState& state,
                                                       const LossModel& loss,
                                                       double phase) {
    state.validate();
    loss.validate();
    const int n = state.n_photons;
    std::vector<ConditionalBranch> out;
    for (auto [la, lb] : loss_events(n)) {
        const int dim = n - la - lb + 1;
        std::vector<complexd> amp(static_cast<size_t>(dim));
        double p = 0.0;
        for (int m = 0; m < dim; ++m) {
            const int k = la + m;
            const double b = loss_coefficient(n, k, la, lb, loss);
            const complexd a = state.amplitude(k) * std::polar(1.0, k * phase) * std::sqrt(b);
            amp[static_cast<size_t>(m)] = a;
            p += std::norm(a);
        }
        if (p <= 0.0) continue;
        const double inv = 1.0 / std::sqrt(p);
        for (auto& a : amp) a *= inv;
        out.push_back(ConditionalBranch{la, lb, p, std::move(amp)});
    }
    return out;
}

// Density-matrix blocks of the lossy output, one per total loss l = 0..N.
// Block l is (N-l+1)x(N-l+1) in the basis |m, N-l-m>, m = 0..N-l (m = number
// of surviving photons in arm a), stored row-major. Branches with equal l
// overlap in this basis and are mixed incoherently.
inline std::vector<std::vector<complexd>> output_blocks(const ProbeState& state,
                                                        const LossModel& loss,
                                                        double phase) {
    const int n = state.n_photons;
    std::vector<std::vector<complexd>> blocks(static_cast<size_t>(n) + 1);
    for (int l = 0; l <= n; ++l) {
        const size_t dim = static_cast<size_t>(n - l + 1);
        blocks[static_cast<size_t>(l)].assign(dim * dim, complexd{});
    }
    for (const auto& br : decompose_output(state, loss, phase)) {
        const int l = br.lost_a + br.lost_b;
        auto& rho = blocks[static_cast<size_t>(l)];
        const size_t dim = static_cast<size_t>(state.n_photons - l + 1);
        for (size_t i = 0; i < dim; ++i)
            for (size_t j = 0; j < dim; ++j)
                rho[i * dim + j] += br.probability * br.amplitudes[i] * std::conj(br.amplitudes[j]);
    }
    return blocks;
}

// Max entrywise difference between applying the phase before the loss channel
// and after it. The two orderings agree identically; this check exists so the
// property is enforced by a test rather than assumed.
inline double loss_phase_commutation_check(const ProbeState& state,
                                           const LossModel& loss,
                                           double phase) {
    state.validate();
    loss.validate();
    const int n = state.n_photons;
    // Both orderings share one accumulation; they differ only in the photon
    // count that picks up the phase. Applied before loss, all k input photons
    // rotate; applied after, only the m = k - l_a survivors do. Per branch the
    // two differ by a global phase e^{i l_a phi}, which cancels in the density
    // matrix, so the blocks must agree (and are computed bit-identically when
    // the loss channel is the identity).
    auto build = [&](bool after_loss) {
        std::vector<std::vector<complexd>> blocks(static_cast<size_t>(n) + 1);
        for (int l = 0; l <= n; ++l) {
            const size_t dim = static_cast<size_t>(n - l + 1);
            blocks[static_cast<size_t>(l)].assign(dim * dim, complexd{});
        }
        for (auto [la, lb] : loss_events(n)) {
            const int dim = n - la - lb + 1;
            std::vector<complexd> amp(static_cast<size_t>(dim));
            double p = 0.0;
            for (int m = 0; m < dim; ++m) {
                const int k = la + m;
                const int rotated = after_loss ? m : k;
                const double b = loss_coefficient(n, k, la, lb, loss);
                const complexd a = state.amplitude(k) *
                                   std::polar(1.0, rotated * phase) * std::sqrt(b);
                amp[static_cast<size_t>(m)] = a;
                p += std::norm(a);
            }
            if (p <= 0.0) continue;
            auto& rho = blocks[static_cast<size_t>(la + lb)];
            const size_t bdim = static_cast<size_t>(dim);
            for (size_t i = 0; i < bdim; ++i)
                for (size_t j = 0; j < bdim; ++j)
                    rho[i * bdim + j] += amp[i] * std::conj(amp[j]);
        }
        return blocks;
    };

    const auto before = build(false);
    const auto after = build(true);
    double worst = 0.0;
    for (size_t l = 0; l < before.size(); ++l)
        for (size_t e = 0; e < before[l].size(); ++e)
            worst = std::max(worst, std::abs(before[l][e] - after[l][e]));
    return worst;
}

} // namespace qfio
