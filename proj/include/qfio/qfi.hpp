#pragma once

// Closed-form Fisher-information kernels on the weight simplex.
//
// qfi_pure      : 4[<psi'|psi'> - |<psi'|psi>|^2] for a pure phase family.
// qfi_one_arm   : exact F_Q when only arm a is lossy.
// qfi_bound     : two-arm upper bound F~_Q obtained by treating the loss
//                 event (l_a, l_b) as classically known.
// The bound's gradient, Hessian, and one-sided directional derivatives are
// analytic; every ratio A^2/B keeps the single division by B (never by B^2)
// so branches with vanishing probability underflow gracefully.

#include <cmath>
#include <limits>
#include <optional>
#include <vector>

#include "qfio/fock.hpp"

namespace qfio {

enum class QfiMetric { exact, bound, one_arm_closed_form };

inline const char* to_string(QfiMetric m) {
    switch (m) {
        case QfiMetric::exact: return "exact";
        case QfiMetric::bound: return "bound";
        case QfiMetric::one_arm_closed_form: return "one_arm_closed_form";
    }
    return "unknown";
}

struct QfiReport {
    std::optional<double> f_exact;
    std::optional<double> f_bound;
    double delta_phi_min = 0.0;   // 1/sqrt(F) for the chosen metric
    QfiMetric metric = QfiMetric::exact;
    std::optional<double> gap;    // f_bound - f_exact when both computed

    void fill_gap() {
        if (f_exact && f_bound) gap = *f_bound - *f_exact;
        const double f = (metric == QfiMetric::exact) ? f_exact.value() : f_bound.value();
        delta_phi_min = (f > 0.0) ? 1.0 / std::sqrt(f) : std::numeric_limits<double>::infinity();
    }
};

// F_Q of the pure family sum_k a_k e^{i k_j phi}|j>; equals 4 Var(k) under
// the weight distribution |a_k|^2 regardless of the amplitude phases.
inline double qfi_pure(const std::vector<complexd>& amplitudes,
                       const std::vector<int>& phase_generator) {
    if (amplitudes.size() != phase_generator.size())
        throw std::invalid_argument("qfi_pure: amplitude/generator size mismatch");
    double norm = 0.0, mean = 0.0, second = 0.0;
    for (size_t j = 0; j < amplitudes.size(); ++j) {
        const double w = std::norm(amplitudes[j]);
        const double k = static_cast<double>(phase_generator[j]);
        norm += w;
        mean += k * w;
        second += k * k * w;
    }
    if (std::abs(norm - 1.0) > 1e-10)
        throw std::invalid_argument("qfi_pure: amplitudes must be normalized");
    return 4.0 * (second - mean * mean);
}

// Precomputed per-(N, loss) branch weights. Events with identically zero
// weight for every k (impossible under this loss model, e.g. l_b > 0 at
// eta_b = 1) are dropped here; events that are possible but receive zero
// probability from a particular x are the boundary-singular 0/0 cases that
// the evaluation routines flag.
class BoundKernel {
public:
    struct Branch {
        int la, lb;
        std::vector<double> b;  // b[m] = B^{la+m}_{la,lb}, m = 0..N-la-lb
    };

    BoundKernel(int n_photons, const LossModel& loss) : n_(n_photons) {
        loss.validate();
        if (n_ < 0 || n_ > kMaxPhotons)
            throw std::invalid_argument("BoundKernel: photon number outside supported range");
        const int n = n_;
        std::vector<double> pa(n + 1), qa(n + 1), pb(n + 1), qb(n + 1);
        for (int i = 0; i <= n; ++i) {
            pa[i] = std::pow(loss.eta_a, i);
            qa[i] = std::pow(1.0 - loss.eta_a, i);
            pb[i] = std::pow(loss.eta_b, i);
            qb[i] = std::pow(1.0 - loss.eta_b, i);
        }
        for (auto [la, lb] : loss_events(n)) {
            Branch br{la, lb, std::vector<double>(static_cast<size_t>(n - la - lb + 1))};
            double bmax = 0.0;
            for (int m = 0; m < static_cast<int>(br.b.size()); ++m) {
                const int k = la + m;
                const double v = binomial(k, la) * binomial(n - k, lb) *
                                 pa[k - la] * qa[la] * pb[n - k - lb] * qb[lb];
                br.b[static_cast<size_t>(m)] = v;
                bmax = std::max(bmax, v);
            }
            if (bmax > 0.0) branches_.push_back(std::move(br));
        }
    }

    int n_photons() const { return n_; }
    const std::vector<Branch>& branches() const { return branches_; }

    double value(const std::vector<double>& x) const {
        double acc = 0.0;
        for (int k = 0; k <= n_; ++k)
            acc += static_cast<double>(k) * static_cast<double>(k) * x[static_cast<size_t>(k)];
        for (const auto& br : branches_) {
            double A = 0.0, B = 0.0;
            for (size_t m = 0; m < br.b.size(); ++m) {
                const double k = static_cast<double>(br.la) + static_cast<double>(m);
                const double w = br.b[m] * x[static_cast<size_t>(br.la) + m];
                A += k * w;
                B += w;
            }
            if (B > 0.0) acc -= (A / B) * A;
        }
        return 4.0 * acc;
    }

    // Unconstrained partials dF~/dx_i. Returns false and skips the branch
    // when a possible event has zero probability at x (0/0 ratio); callers
    // that need boundary values must keep x interior instead.
    bool gradient(const std::vector<double>& x, std::vector<double>& g) const {
        g.assign(static_cast<size_t>(n_) + 1, 0.0);
        for (int k = 0; k <= n_; ++k)
            g[static_cast<size_t>(k)] = 4.0 * static_cast<double>(k) * static_cast<double>(k);
        bool interior = true;
        for (const auto& br : branches_) {
            double A = 0.0, B = 0.0;
            for (size_t m = 0; m < br.b.size(); ++m) {
                const double k = static_cast<double>(br.la) + static_cast<double>(m);
                const double w = br.b[m] * x[static_cast<size_t>(br.la) + m];
                A += k * w;
                B += w;
            }
            if (B <= 0.0) { interior = false; continue; }
            const double r = A / B;
            for (size_t m = 0; m < br.b.size(); ++m) {
                const double k = static_cast<double>(br.la) + static_cast<double>(m);
                g[static_cast<size_t>(br.la) + m] -= 4.0 * br.b[m] * (2.0 * k * r - r * r);
            }
        }
        return interior;
    }

    // H_ij = -8 sum_branches v_i v_j / B with v_i = b_i (i - A/B): an explicit
    // negative Gram form, so negative semidefiniteness is structural. Row-major
    // (N+1)x(N+1). Returns the same boundary flag as gradient().
    bool hessian(const std::vector<double>& x, std::vector<double>& h) const {
        const size_t dim = static_cast<size_t>(n_) + 1;
        h.assign(dim * dim, 0.0);
        bool interior = true;
        std::vector<double> v(dim);
        for (const auto& br : branches_) {
            double A = 0.0, B = 0.0;
            for (size_t m = 0; m < br.b.size(); ++m) {
                const double k = static_cast<double>(br.la) + static_cast<double>(m);
                const double w = br.b[m] * x[static_cast<size_t>(br.la) + m];
                A += k * w;
                B += w;
            }
            if (B <= 0.0) { interior = false; continue; }
            const double r = A / B;
            v.assign(dim, 0.0);
            for (size_t m = 0; m < br.b.size(); ++m) {
                const double k = static_cast<double>(br.la) + static_cast<double>(m);
                v[static_cast<size_t>(br.la) + m] = br.b[m] * (k - r);
            }
            const double inv = 8.0 / B;
            for (size_t i = 0; i < dim; ++i) {
                if (v[i] == 0.0) continue;
                const double vi = v[i] * inv;
                for (size_t j = 0; j < dim; ++j) h[i * dim + j] -= vi * v[j];
            }
        }
        return interior;
    }

    // One-sided directional derivative d/dd F~((1-d) x + d e_k) at d = 0+.
    // Well-defined at boundary points: a possible branch with B(x) = 0 enters
    // linearly and contributes exactly -4 k^2 b_k.
    double directional_derivative(const std::vector<double>& x, int k) const {
        const double kk = static_cast<double>(k);
        double acc = kk * kk;
        for (int j = 0; j <= n_; ++j)
            acc -= static_cast<double>(j) * static_cast<double>(j) * x[static_cast<size_t>(j)];
        for (const auto& br : branches_) {
            double A = 0.0, B = 0.0;
            for (size_t m = 0; m < br.b.size(); ++m) {
                const double kj = static_cast<double>(br.la) + static_cast<double>(m);
                const double w = br.b[m] * x[static_cast<size_t>(br.la) + m];
                A += kj * w;
                B += w;
            }
            const bool in_window = (k >= br.la && k <= br.la + static_cast<int>(br.b.size()) - 1);
            const double bk = in_window ? br.b[static_cast<size_t>(k - br.la)] : 0.0;
            if (B > 0.0) {
                const double r = A / B;
                acc -= bk * (2.0 * r * kk - r * r) - r * A;
            } else {
                acc -= kk * kk * bk;
            }
        }
        return 4.0 * acc;
    }

private:
    int n_;
    std::vector<Branch> branches_;
};

inline double qfi_bound(const ProbeState& state, const LossModel& loss) {
    state.validate();
    return BoundKernel(state.n_photons, loss).value(state.weights);
}

// Exact F_Q for loss in arm a only (the bound is tight there).
inline double qfi_one_arm(const ProbeState& state, double eta) {
    return qfi_bound(state, LossModel{eta, 1.0});
}

struct GradientResult {
    std::vector<double> d;
    bool boundary_singular = false;  // a possible loss event had probability 0 at x
};

inline GradientResult qfi_bound_gradient(const ProbeState& state, const LossModel& loss) {
    state.validate();
    GradientResult r;
    r.boundary_singular = !BoundKernel(state.n_photons, loss).gradient(state.weights, r.d);
    return r;
}

struct HessianResult {
    std::vector<double> h;  // row-major (N+1)^2
    bool boundary_singular = false;

    double at(int i, int j, int dim) const {
        return h[static_cast<size_t>(i) * static_cast<size_t>(dim) + static_cast<size_t>(j)];
    }
};

inline HessianResult qfi_bound_hessian(const ProbeState& state, const LossModel& loss) {
    state.validate();
    HessianResult r;
    r.boundary_singular = !BoundKernel(state.n_photons, loss).hessian(state.weights, r.h);
    return r;
}

} // namespace qfio
