#pragma once

#include <cstddef>
#include <span>

#include "speckle/distributions.hpp"

namespace speckle {

/// First-order and half-order sample moments of a set of intensities.
struct SampleStats {
    std::size_t n = 0;
    double mean = 0.0;
    /// Unbiased (n - 1) sample variance; 0 when n == 1.
    double variance = 0.0;
    /// Sample mean of sqrt(z).
    double half_moment = 0.0;

    static SampleStats from_samples(std::span<const double> samples);
};

template <class Params>
struct FitResult {
    Params params{};
    bool converged = false;
    /// |model moment ratio - sample moment ratio| at the returned parameters,
    /// or the distance to the attainable range when the fit failed.
    double residual = 0.0;
};

using G0Fit = FitResult<G0Params>;
using GHFit = FitResult<GHParams>;

/// (mean / standard deviation)^2 with the unbiased variance.
/// Throws DomainError for fewer than two samples or zero variance.
double estimate_enl(std::span<const double> samples);

/// Speckle factor E[Y^(1/2)] / sqrt(E[Y]) = Gamma(L + 1/2) / (sqrt(L) Gamma(L)).
double speckle_half_moment_ratio(Looks looks);

/// Normalized half-order moment of the reciprocal-Gamma backscatter as a
/// function of a = -alpha > 1: E[X^(1/2)] / sqrt(E[X]).
double g0_half_moment_ratio(double a);

/// Same quantity for the inverse-Gaussian backscatter: K_0(2w) / K_{1/2}(2w).
double gh_half_moment_ratio(double omega);

/// Solves m1 = gamma / (-alpha - 1) and the order-1/2 moment equation for
/// (alpha, gamma). Search runs over alpha in (-50, -1); ratios outside the
/// attainable range return converged = false.
G0Fit fit_g0_moments(const SampleStats& stats, Looks looks);

/// sigma = m1; omega from the half-order moment ratio on (1e-3, 1e3).
GHFit fit_gh_moments(const SampleStats& stats, Looks looks);

struct LeeStats {
    double mean = 0.0;
    double observed_variance = 0.0;
    /// May be negative on smooth windows; the filter clamps the gain.
    double backscatter_variance = 0.0;
};

/// Window mean and variance plus the backscatter variance
/// (var_Z - mean^2 s) / (s + 1), s = 1/L the speckle variance. This inverts
/// var_Z = (var_X + mean^2)(1 + s) - mean^2 for unit-mean speckle.
LeeStats lee_local_stats(std::span<const double> window, Looks looks);

}  // namespace speckle
