#pragma once

// Optimal measurement for the lossy output and its verification: explicit
// POVM vectors, the classical Fisher information they induce, and a seeded
// maximum-likelihood Monte Carlo that checks Cramer-Rao saturation.
//
// The measurement is two-stage: first the number of lost photons selects a
// sector (for one-arm loss the sector pins down the loss event exactly),
// then a projective measurement inside the sector distinguishes phases. A
// sector reached by a single loss event is pure; there the projectors are
// built from the state and its orthogonalized phase derivative. A sector fed
// by several events is mixed; there the eigenbasis of the symmetric
// logarithmic derivative is used instead, which still attains the exact
// quantum Fisher information at the anchor phase.

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <vector>

#include "qfio/sld.hpp"

namespace qfio {

struct PovmElement {
    int sector = 0;            // total photons lost
    int lost_a = -1;           // generating loss event for phase-sensitive
    int lost_b = -1;           // projectors; -1 when not tied to one event
    enum class Role { plus, minus, completion, sld_eigen } role = Role::completion;
    Eigen::VectorXcd vec;      // lives in the sector subspace
};

inline const char* to_string(PovmElement::Role role) {
    switch (role) {
        case PovmElement::Role::plus: return "plus";
        case PovmElement::Role::minus: return "minus";
        case PovmElement::Role::completion: return "completion";
        case PovmElement::Role::sld_eigen: return "sld_eigen";
    }
    return "unknown";
}

struct Povm {
    int n_photons = 0;
    double phi0 = 0.0;
    std::vector<PovmElement> elements;
    std::vector<int> zero_variance_sectors;  // only completion outcomes there
    bool merged_sectors = false;             // some sector mixed several events
};

namespace detail {

// Orthonormal completion of `basis` from the candidate list, using double
// Gram-Schmidt passes for stability.
inline void complete_basis(std::vector<Eigen::VectorXcd>& basis,
                           const std::vector<Eigen::VectorXcd>& candidates,
                           int dim, int sector, int la, int lb, Povm& povm,
                           PovmElement::Role role) {
    for (const auto& cand : candidates) {
        if (static_cast<int>(basis.size()) >= dim) break;
        Eigen::VectorXcd v = cand;
        for (int pass = 0; pass < 2; ++pass)
            for (const auto& u : basis) v -= u.dot(v) * u;
        const double norm = v.norm();
        if (norm < 1e-6) continue;
        v /= norm;
        basis.push_back(v);
        povm.elements.push_back({sector, la, lb, role, v});
    }
    if (static_cast<int>(basis.size()) != dim)
        throw std::runtime_error("optimal_povm: basis completion failed");
}

inline std::vector<Eigen::VectorXcd> fock_candidates(int dim) {
    std::vector<Eigen::VectorXcd> out;
    for (int m = 0; m < dim; ++m) {
        Eigen::VectorXcd v = Eigen::VectorXcd::Zero(dim);
        v(m) = 1.0;
        out.push_back(std::move(v));
    }
    return out;
}

// Reversal-symmetric candidates v with v_m = conj(v_{dim-1-m}) e^{i chi_v}.
// For a path-symmetric sector state every such vector saturates the
// Cramer-Rao bound at all phases, and Gram-Schmidt among them preserves the
// symmetry, so completing from this list keeps the whole basis optimal at
// every phase (instead of just at the anchor).
inline std::vector<Eigen::VectorXcd> symmetric_candidates(int dim) {
    std::vector<Eigen::VectorXcd> out;
    const double inv = 1.0 / std::sqrt(2.0);
    for (int m = 0; 2 * m <= dim - 1; ++m) {
        const int r = dim - 1 - m;
        Eigen::VectorXcd v = Eigen::VectorXcd::Zero(dim);
        if (m == r) {
            v(m) = 1.0;
            out.push_back(std::move(v));
            continue;
        }
        v(m) = inv;
        v(r) = inv;
        out.push_back(v);
        Eigen::VectorXcd w = Eigen::VectorXcd::Zero(dim);
        w(m) = complexd{0.0, inv};
        w(r) = complexd{0.0, -inv};
        out.push_back(std::move(w));
    }
    return out;
}

// Detects xi_m = conj(xi_{dim-1-m}) e^{i chi} for some fixed chi.
inline bool is_path_symmetric(const Eigen::VectorXcd& xi) {
    const int dim = static_cast<int>(xi.size());
    complexd s{};
    for (int m = 0; m < dim; ++m) s += xi(m) * xi(dim - 1 - m);
    if (std::abs(s) < 0.5) return false;
    const complexd phase = s / std::abs(s);
    double worst = 0.0;
    for (int m = 0; m < dim; ++m)
        worst = std::max(worst,
                         std::abs(xi(m) - std::conj(xi(dim - 1 - m)) * phase));
    return worst <= 1e-10;
}

} // namespace detail

inline Povm optimal_povm(const ProbeState& state, const LossModel& loss,
                         double phi0) {
    state.validate();
    loss.validate();
    const int n = state.n_photons;
    Povm povm;
    povm.n_photons = n;
    povm.phi0 = phi0;

    // group contributing loss events by sector
    std::vector<std::vector<ConditionalBranch>> by_sector(static_cast<size_t>(n) + 1);
    for (auto& br : decompose_output(state, loss, phi0))
        by_sector[static_cast<size_t>(br.lost_a + br.lost_b)].push_back(std::move(br));

    for (int l = 0; l <= n; ++l) {
        const auto& branches = by_sector[static_cast<size_t>(l)];
        if (branches.empty()) continue;
        const int dim = n - l + 1;

        if (branches.size() == 1) {
            // pure sector: e+- = (xi +- xi_perp)/sqrt(2), where xi_perp is
            // the normalized phase derivative orthogonalized against xi
            const auto& br = branches.front();
            Eigen::VectorXcd xi = Eigen::VectorXcd::Zero(dim);
            for (int m = 0; m < dim; ++m)
                xi(m) = br.amplitudes[static_cast<size_t>(m)];
            double mean = 0.0;
            for (int m = 0; m < dim; ++m) mean += m * std::norm(xi(m));
            double var = 0.0;
            for (int m = 0; m < dim; ++m)
                var += (m - mean) * (m - mean) * std::norm(xi(m));

            std::vector<Eigen::VectorXcd> basis;
            bool symmetric = false;
            if (var > 1e-14) {
                symmetric = detail::is_path_symmetric(xi);
                Eigen::VectorXcd perp = Eigen::VectorXcd::Zero(dim);
                const complexd iunit{0.0, 1.0};
                for (int m = 0; m < dim; ++m)
                    perp(m) = iunit * (m - mean) * xi(m) / std::sqrt(var);
                const double inv = 1.0 / std::sqrt(2.0);
                Eigen::VectorXcd plus = inv * (xi + perp);
                Eigen::VectorXcd minus = inv * (xi - perp);
                basis.push_back(plus);
                basis.push_back(minus);
                povm.elements.push_back(
                    {l, br.lost_a, br.lost_b, PovmElement::Role::plus, std::move(plus)});
                povm.elements.push_back(
                    {l, br.lost_a, br.lost_b, PovmElement::Role::minus, std::move(minus)});
            } else {
                // a single surviving component carries no phase information
                povm.zero_variance_sectors.push_back(l);
            }
            detail::complete_basis(basis,
                                   symmetric ? detail::symmetric_candidates(dim)
                                             : detail::fock_candidates(dim),
                                   dim, l, br.lost_a, br.lost_b, povm,
                                   PovmElement::Role::completion);
        } else {
            povm.merged_sectors = true;
            // mixed sector: measure the eigenbasis of the symmetric
            // logarithmic derivative of the sector state
            Eigen::MatrixXcd rho = Eigen::MatrixXcd::Zero(dim, dim);
            Eigen::MatrixXcd drho = Eigen::MatrixXcd::Zero(dim, dim);
            for (const auto& br : branches) {
                Eigen::VectorXcd xi(dim), dxi(dim);
                for (int m = 0; m < dim; ++m) {
                    xi(m) = br.amplitudes[static_cast<size_t>(m)];
                    dxi(m) = complexd{0.0, 1.0} *
                             static_cast<double>(m + br.lost_a) * xi(m);
                }
                rho += br.probability * (xi * xi.adjoint());
                drho += br.probability *
                        (dxi * xi.adjoint() + xi * dxi.adjoint());
            }
            Eigen::MatrixXcd sld;
            qfi_from_density(rho, drho, rho.trace().real(), &sld);
            Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(sld);
            std::vector<Eigen::VectorXcd> basis;
            for (int m = 0; m < dim; ++m) {
                Eigen::VectorXcd v = es.eigenvectors().col(m);
                basis.push_back(v);
                povm.elements.push_back(
                    {l, -1, -1, PovmElement::Role::sld_eigen, std::move(v)});
            }
        }
    }
    return povm;
}

namespace detail {

struct SectorMatrices {
    std::vector<Eigen::MatrixXcd> rho, drho;  // indexed by sector
};

inline SectorMatrices sector_matrices(const ProbeState& state,
                                      const LossModel& loss, double phase) {
    SectorMatrices out;
    const auto blocks = sld_blocks(state, loss, phase);
    out.rho.reserve(blocks.size());
    out.drho.reserve(blocks.size());
    for (const auto& blk : blocks) {
        out.rho.push_back(blk.rho_block);
        out.drho.push_back(blk.rho_prime_block);
    }
    return out;
}

} // namespace detail

// Outcome probabilities of the POVM on the lossy output at the given phase,
// in element order.
inline std::vector<double> outcome_probabilities(const Povm& povm,
                                                 const ProbeState& state,
                                                 const LossModel& loss,
                                                 double phase) {
    const auto mats = detail::sector_matrices(state, loss, phase);
    std::vector<double> p;
    p.reserve(povm.elements.size());
    for (const auto& el : povm.elements) {
        const auto& rho = mats.rho[static_cast<size_t>(el.sector)];
        p.push_back(std::max(0.0, (el.vec.adjoint() * rho * el.vec)(0).real()));
    }
    return p;
}

inline double classical_fisher(const Povm& povm, const ProbeState& state,
                               const LossModel& loss, double phase) {
    state.validate();
    loss.validate();
    const auto mats = detail::sector_matrices(state, loss, phase);
    const size_t sectors = mats.rho.size();

    // completeness within every sector that carries probability
    std::vector<Eigen::MatrixXcd> sums(sectors);
    for (const auto& el : povm.elements) {
        auto& s = sums[static_cast<size_t>(el.sector)];
        if (s.size() == 0)
            s = Eigen::MatrixXcd::Zero(el.vec.size(), el.vec.size());
        s += el.vec * el.vec.adjoint();
    }
    for (size_t l = 0; l < sectors; ++l) {
        const double tr = mats.rho[l].trace().real();
        if (sums[l].size() == 0) {
            if (tr > 1e-12)
                throw std::invalid_argument(
                    "classical_fisher: POVM misses a populated sector");
            continue;
        }
        const Eigen::MatrixXcd dev =
            sums[l] - Eigen::MatrixXcd::Identity(sums[l].rows(), sums[l].cols());
        if (dev.cwiseAbs().maxCoeff() > 1e-8)
            throw std::invalid_argument(
                "classical_fisher: POVM does not resolve the identity");
    }

    double fisher = 0.0;
    for (const auto& el : povm.elements) {
        const auto& rho = mats.rho[static_cast<size_t>(el.sector)];
        const auto& drho = mats.drho[static_cast<size_t>(el.sector)];
        const double p = (el.vec.adjoint() * rho * el.vec)(0).real();
        const double dp = (el.vec.adjoint() * drho * el.vec)(0).real();
        if (p > 1e-15) fisher += dp * dp / p;
    }
    return fisher;
}

struct EstimationRun {
    double true_phase = 0.0;
    double phi0 = 0.0;
    int repetitions = 0;
    double estimate = 0.0;
};

struct MlStatistics {
    double mean = 0.0;
    double variance = 0.0;  // sample variance of estimates across trials
    int repetitions = 0;
    int trials = 0;
    std::uint64_t seed = 0;
    bool degenerate = false;  // outcome distribution carries no information
    std::vector<EstimationRun> runs;
};

namespace detail {

inline double log_likelihood(const std::vector<int>& counts,
                             const std::vector<double>& p) {
    double ll = 0.0;
    for (size_t i = 0; i < counts.size(); ++i)
        if (counts[i] > 0) ll += counts[i] * std::log(std::max(p[i], 1e-300));
    return ll;
}

} // namespace detail

// Repeats nu measurements per trial, maximizes the log-likelihood over a
// +-pi/2 bracket around the anchor phase (coarse grid, then golden-section
// refinement to 1e-8), and aggregates estimates across trials. Trial t uses
// the derived seed (seed + t), so trials are replayable in any order.
inline MlStatistics simulate_ml(const ProbeState& state, const LossModel& loss,
                                const Povm& povm, double true_phase,
                                int repetitions, int trials,
                                std::uint64_t seed) {
    if (repetitions < 1 || trials < 1)
        throw std::invalid_argument("simulate_ml: need at least one repetition and trial");
    MlStatistics stats;
    stats.repetitions = repetitions;
    stats.trials = trials;
    stats.seed = seed;

    const auto p_true = outcome_probabilities(povm, state, loss, true_phase);
    double pmax = 0.0;
    for (double p : p_true) pmax = std::max(pmax, p);
    if (pmax >= 1.0 - 1e-12) {
        stats.degenerate = true;
        stats.mean = povm.phi0;
        for (int t = 0; t < trials; ++t)
            stats.runs.push_back({true_phase, povm.phi0, repetitions, povm.phi0});
        return stats;
    }

    auto likelihood_at = [&](const std::vector<int>& counts, double phi) {
        return detail::log_likelihood(
            counts, outcome_probabilities(povm, state, loss, phi));
    };

    const double lo_bracket = povm.phi0 - M_PI / 2.0;
    const double hi_bracket = povm.phi0 + M_PI / 2.0;
    const int grid_points = 129;
    const double grid_step = (hi_bracket - lo_bracket) / (grid_points - 1);

    double sum = 0.0, sumsq = 0.0;
    for (int t = 0; t < trials; ++t) {
        std::mt19937_64 rng(seed + static_cast<std::uint64_t>(t));
        // multinomial sampling by sequential conditional binomials
        std::vector<int> counts(p_true.size(), 0);
        int remaining = repetitions;
        double mass = 1.0;
        for (size_t i = 0; i < p_true.size() && remaining > 0; ++i) {
            const double q = std::clamp(p_true[i] / mass, 0.0, 1.0);
            int c;
            if (i + 1 == p_true.size() || q >= 1.0) {
                c = remaining;
            } else {
                std::binomial_distribution<int> bin(remaining, q);
                c = bin(rng);
            }
            counts[i] = c;
            remaining -= c;
            mass -= p_true[i];
            if (mass <= 0.0 && remaining > 0) {
                counts[i] += remaining;
                remaining = 0;
            }
        }

        std::vector<double> grid_ll(grid_points);
        double best_ll = -std::numeric_limits<double>::infinity();
        for (int gi = 0; gi < grid_points; ++gi) {
            grid_ll[static_cast<size_t>(gi)] =
                likelihood_at(counts, lo_bracket + gi * grid_step);
            best_ll = std::max(best_ll, grid_ll[static_cast<size_t>(gi)]);
        }
        // states interfering only through a single mode-number difference
        // have an exactly periodic likelihood; among (numerically) tied
        // maxima the local approach picks the lobe nearest the anchor
        const double tie = 1e-6 * (1.0 + std::abs(best_ll));
        int best = 0;
        double best_dist = std::numeric_limits<double>::infinity();
        for (int gi = 0; gi < grid_points; ++gi) {
            if (grid_ll[static_cast<size_t>(gi)] < best_ll - tie) continue;
            const double dist = std::abs(lo_bracket + gi * grid_step - povm.phi0);
            if (dist < best_dist) { best_dist = dist; best = gi; }
        }
        double lo = lo_bracket + std::max(0, best - 1) * grid_step;
        double hi = lo_bracket + std::min(grid_points - 1, best + 1) * grid_step;
        const double gr = (std::sqrt(5.0) - 1.0) / 2.0;
        while (hi - lo > 1e-8) {
            const double m1 = hi - gr * (hi - lo);
            const double m2 = lo + gr * (hi - lo);
            if (likelihood_at(counts, m1) < likelihood_at(counts, m2))
                lo = m1;
            else
                hi = m2;
        }
        const double estimate = 0.5 * (lo + hi);
        stats.runs.push_back({true_phase, povm.phi0, repetitions, estimate});
        sum += estimate;
        sumsq += estimate * estimate;
    }
    stats.mean = sum / trials;
    stats.variance = trials > 1
                         ? std::max(0.0, (sumsq - sum * sum / trials) / (trials - 1))
                         : 0.0;
    return stats;
}

} // namespace qfio
