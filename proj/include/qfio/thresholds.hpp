#pragma once

// Transmissivity thresholds below which the balanced-weight extreme-mode
// probe (all weight on k = 0 and k = N) stops being optimal.
//
// One-arm loss admits a closed-form stationarity polynomial in eta whose
// unique root in (0, 1) is the threshold. Two-arm loss does not; there the
// threshold is located by scanning the sign of the one-sided directional
// derivative of the bound at the balanced extreme-mode state, maximized over
// interior target modes. Both thresholds follow an a^{-1/N} law for large N;
// the fit helper recovers a by no-intercept least squares in log space.

#include <cmath>
#include <stdexcept>
#include <vector>

#include "qfio/qfi.hpp"

namespace qfio {

enum class ThresholdMethod { polynomial_root, perturbation_scan };

inline const char* to_string(ThresholdMethod m) {
    return m == ThresholdMethod::polynomial_root ? "polynomial_root"
                                                 : "perturbation_scan";
}

struct ThresholdResult {
    int n_photons = 0;
    double eta_bar = 0.0;
    ThresholdMethod method = ThresholdMethod::polynomial_root;
};

namespace detail {

// Stationarity of the one-arm QFI against moving weight from the extreme
// modes into k = 1, evaluated at the optimally unbalanced two-mode probe.
inline double one_arm_threshold_polynomial(int n, double eta) {
    const double nn = static_cast<double>(n);
    return (1.0 - 2.0 * nn) * std::pow(eta, nn) -
           2.0 * nn * (nn - 1.0) * std::pow(eta, nn / 2.0 + 1.0) +
           2.0 * (nn - 1.0) * (nn - 1.0) * std::pow(eta, nn / 2.0) -
           nn * (nn - 2.0) * eta + (nn - 1.0) * (nn - 1.0);
}

template <typename F>
double bisect(F&& f, double lo, double hi, double tol) {
    double flo = f(lo);
    const double fhi = f(hi);
    if (flo == 0.0) return lo;
    if (fhi == 0.0) return hi;
    if ((flo > 0.0) == (fhi > 0.0))
        throw std::runtime_error("bisect: endpoints do not bracket a sign change");
    while (hi - lo > tol) {
        const double mid = 0.5 * (lo + hi);
        const double fm = f(mid);
        if (fm == 0.0) return mid;
        if ((fm > 0.0) == (flo > 0.0)) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    return 0.5 * (lo + hi);
}

} // namespace detail

inline ThresholdResult threshold_one_arm(int n_photons) {
    if (n_photons < 2)
        throw std::invalid_argument("threshold_one_arm: need at least 2 photons");
    const double root = detail::bisect(
        [n_photons](double eta) {
            return detail::one_arm_threshold_polynomial(n_photons, eta);
        },
        1e-12, 1.0, 1e-10);
    return {n_photons, root, ThresholdMethod::polynomial_root};
}

inline ThresholdResult threshold_two_arm(int n_photons) {
    if (n_photons < 2)
        throw std::invalid_argument("threshold_two_arm: need at least 2 photons");
    std::vector<double> noon(static_cast<size_t>(n_photons) + 1, 0.0);
    noon.front() = noon.back() = 0.5;
    // below the threshold some interior mode improves the bound (positive
    // one-sided derivative); above it none does
    auto gain = [&](double eta) {
        const BoundKernel kernel(n_photons, {eta, eta});
        double best = -std::numeric_limits<double>::infinity();
        for (int k = 1; k < n_photons; ++k)
            best = std::max(best, kernel.directional_derivative(noon, k));
        return best;
    };
    const double root = detail::bisect(gain, 1e-6, 1.0 - 1e-12, 1e-8);
    return {n_photons, root, ThresholdMethod::perturbation_scan};
}

// Fits eta_bar(N) = a^{-1/N}: no-intercept least squares of ln eta_bar
// against -1/N.
inline double threshold_fit(bool one_arm, int n_lo, int n_hi) {
    if (n_lo < 2 || n_hi < n_lo)
        throw std::invalid_argument("threshold_fit: invalid photon-number range");
    double num = 0.0, den = 0.0;
    for (int n = n_lo; n <= n_hi; ++n) {
        const double eta_bar =
            one_arm ? threshold_one_arm(n).eta_bar : threshold_two_arm(n).eta_bar;
        const double inv_n = 1.0 / static_cast<double>(n);
        num += std::log(eta_bar) * inv_n;
        den += inv_n * inv_n;
    }
    return std::exp(-num / den);
}

} // namespace qfio
