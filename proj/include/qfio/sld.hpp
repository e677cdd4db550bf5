#pragma once

// Exact quantum Fisher information via the symmetric logarithmic derivative.
//
// The lossy output is block-diagonal over the total number of lost photons
// l = l_a + l_b; branches with equal l mix incoherently inside one block.
// Each block is diagonalized, the SLD is assembled in the eigenbasis with
// the 0/0 rule (A)_{ij} = 0 when p_i + p_j falls below a scale-relative
// cutoff, and F_Q adds up block by block.

#include <Eigen/Dense>

#include "qfio/qfi.hpp"

namespace qfio {

struct SldBlock {
    int lost_total = 0;
    int basis_dim = 0;                 // N - l + 1
    Eigen::MatrixXcd rho_block;        // trace = probability of losing l photons
    Eigen::MatrixXcd rho_prime_block;  // analytic d(rho)/d(phi)
    Eigen::MatrixXcd sld_block;
};

// Relative eigenvalue cutoff for the SLD 0/0 rule.
inline constexpr double kSldEigenTolerance = 1e-12;

// F_Q of an arbitrary Hermitian (rho, rho') pair: 2|rho'_ij|^2 / (p_i + p_j)
// summed over eigenpairs above the cutoff. `trace_scale` sets the cutoff
// scale; pass the trace of the enclosing state when rho is a sub-block.
inline double qfi_from_density(const Eigen::MatrixXcd& rho,
                               const Eigen::MatrixXcd& rho_prime,
                               double trace_scale,
                               Eigen::MatrixXcd* sld_out = nullptr) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(rho);
    const Eigen::VectorXd p = es.eigenvalues();
    const Eigen::MatrixXcd& U = es.eigenvectors();
    const Eigen::MatrixXcd dp = U.adjoint() * rho_prime * U;
    const double cutoff = kSldEigenTolerance * std::max(trace_scale, 0.0);

    const Eigen::Index n = rho.rows();
    Eigen::MatrixXcd a = Eigen::MatrixXcd::Zero(n, n);
    double f = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j < n; ++j) {
            const double denom = p(i) + p(j);
            if (denom <= cutoff) continue;
            a(i, j) = 2.0 * dp(i, j) / denom;
            f += 2.0 * std::norm(dp(i, j)) / denom;
        }
    }
    if (sld_out) *sld_out = U * a * U.adjoint();
    return f;
}

inline std::vector<SldBlock> sld_blocks(const ProbeState& state,
                                        const LossModel& loss,
                                        double phase) {
    state.validate();
    loss.validate();
    const int n = state.n_photons;
    std::vector<SldBlock> blocks(static_cast<size_t>(n) + 1);
    for (int l = 0; l <= n; ++l) {
        const int dim = n - l + 1;
        auto& blk = blocks[static_cast<size_t>(l)];
        blk.lost_total = l;
        blk.basis_dim = dim;
        blk.rho_block = Eigen::MatrixXcd::Zero(dim, dim);
        blk.rho_prime_block = Eigen::MatrixXcd::Zero(dim, dim);
    }
    for (const auto& br : decompose_output(state, loss, phase)) {
        const int l = br.lost_a + br.lost_b;
        auto& blk = blocks[static_cast<size_t>(l)];
        const int dim = blk.basis_dim;
        Eigen::VectorXcd xi(dim), dxi(dim);
        for (int m = 0; m < dim; ++m) {
            xi(m) = br.amplitudes[static_cast<size_t>(m)];
            // amplitudes carry e^{ik phi} with k = m + l_a
            dxi(m) = complexd(0.0, static_cast<double>(m + br.lost_a)) * xi(m);
        }
        blk.rho_block += br.probability * xi * xi.adjoint();
        blk.rho_prime_block += br.probability * (dxi * xi.adjoint() + xi * dxi.adjoint());
    }
    return blocks;
}

inline QfiReport qfi_exact(const ProbeState& state, const LossModel& loss,
                           double phase, std::vector<SldBlock>* blocks_out = nullptr) {
    auto blocks = sld_blocks(state, loss, phase);
    double f = 0.0;
    for (auto& blk : blocks) {
        // cutoff is relative to the block's own probability mass; empty
        // blocks (e.g. l > 0 without loss) contribute nothing
        const double tr = blk.rho_block.trace().real();
        if (tr <= 0.0) {
            blk.sld_block = Eigen::MatrixXcd::Zero(blk.basis_dim, blk.basis_dim);
            continue;
        }
        f += qfi_from_density(blk.rho_block, blk.rho_prime_block, tr, &blk.sld_block);
    }
    if (blocks_out) *blocks_out = std::move(blocks);
    QfiReport rep;
    rep.f_exact = f;
    rep.metric = QfiMetric::exact;
    rep.fill_gap();
    return rep;
}

} // namespace qfio
