#include "speckle/estimation.hpp"

#include <algorithm>
#include <boost/math/tools/toms748_solve.hpp>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <vector>

#include "speckle/errors.hpp"
#include "speckle/special.hpp"

namespace speckle {

namespace {

constexpr double kAlphaFloor = 50.0;           // a = -alpha upper limit
constexpr double kAlphaCeiling = 1.0 + 1e-6;   // a lower limit, just above 1
constexpr double kOmegaLow = 1e-3;
constexpr double kOmegaHigh = 1e3;
constexpr double kRootRelTol = 1e-10;
constexpr std::uintmax_t kRootMaxIter = 200;

struct RelativeTolerance {
    bool operator()(double a, double b) const {
        return std::abs(b - a) <= kRootRelTol * std::min(std::abs(a), std::abs(b));
    }
};

// An increasing ratio tabulated on a log-spaced grid over [lo, hi], so that a
// root search can start from a bracket one grid cell wide.
class RatioTable {
public:
    RatioTable(double (*ratio)(double), double lo, double hi) : ratio_(ratio) {
        constexpr std::size_t kCells = 512;
        const double step = std::log(hi / lo) / kCells;
        for (std::size_t i = 0; i <= kCells; ++i) {
            const double x = i == kCells ? hi : lo * std::exp(step * static_cast<double>(i));
            xs_.push_back(x);
            values_.push_back(ratio(x));
        }
    }

    FitResult<double> solve(double target) const {
        const double f_lo = values_.front() - target;
        const double f_hi = values_.back() - target;
        if (!(f_lo < 0.0)) return {xs_.front(), false, f_lo};
        if (!(f_hi > 0.0)) return {xs_.back(), false, -f_hi};
        const auto upper = std::upper_bound(values_.begin(), values_.end(), target);
        const auto j = static_cast<std::size_t>(upper - values_.begin());
        const double a0 = xs_[j - 1];
        const double b0 = xs_[j];
        const double fa = values_[j - 1] - target;
        const double fb = values_[j] - target;
        if (fa == 0.0) return {a0, true, 0.0};
        std::uintmax_t iterations = kRootMaxIter;
        const auto [a, b] = boost::math::tools::toms748_solve(
            [&](double x) { return ratio_(x) - target; }, a0, b0, fa, fb, RelativeTolerance{},
            iterations);
        const double root = 0.5 * (a + b);
        const bool converged = iterations < kRootMaxIter || RelativeTolerance{}(a, b);
        return {root, converged, std::abs(ratio_(root) - target)};
    }

private:
    double (*ratio_)(double);
    std::vector<double> xs_;
    std::vector<double> values_;
};

void check_stats(const SampleStats& stats) {
    if (stats.n < 1 || !(stats.mean > 0.0) || !(stats.half_moment > 0.0) ||
        !std::isfinite(stats.mean) || !std::isfinite(stats.half_moment)) {
        throw DomainError("moment fit needs statistics of positive data");
    }
}

}  // namespace

SampleStats SampleStats::from_samples(std::span<const double> samples) {
    if (samples.empty()) throw DomainError("sample statistics of an empty sample");
    SampleStats s;
    s.n = samples.size();
    const double n = static_cast<double>(s.n);
    double sum = 0.0;
    double root_sum = 0.0;
    for (double z : samples) {
        sum += z;
        root_sum += std::sqrt(z);
    }
    double mean = sum / n;
    double residual = 0.0;
    for (double z : samples) residual += z - mean;
    mean += residual / n;
    double ss = 0.0;
    for (double z : samples) ss += (z - mean) * (z - mean);
    s.mean = mean;
    s.variance = s.n > 1 ? ss / (n - 1.0) : 0.0;
    s.half_moment = root_sum / n;
    return s;
}

double estimate_enl(std::span<const double> samples) {
    if (samples.size() < 2) throw DomainError("ENL needs at least two samples");
    const SampleStats s = SampleStats::from_samples(samples);
    if (!(s.variance > 0.0)) throw DomainError("ENL of a degenerate (zero-variance) sample");
    return s.mean * s.mean / s.variance;
}

double speckle_half_moment_ratio(Looks looks) {
    const double L = looks.value();
    return std::exp(std::lgamma(L + 0.5) - std::lgamma(L) - 0.5 * std::log(L));
}

double g0_half_moment_ratio(double a) {
    return std::exp(std::lgamma(a - 0.5) - std::lgamma(a)) * std::sqrt(a - 1.0);
}

double gh_half_moment_ratio(double omega) {
    // K_{1/2}(x) = sqrt(pi / 2x) exp(-x)
    const double x = 2.0 * omega;
    return std::exp(log_bessel_k(0.0, x) + x - 0.5 * std::log(std::numbers::pi / (2.0 * x)));
}

G0Fit fit_g0_moments(const SampleStats& stats, Looks looks) {
    check_stats(stats);
    const double target =
        stats.half_moment / std::sqrt(stats.mean) / speckle_half_moment_ratio(looks);
    static const RatioTable table(g0_half_moment_ratio, kAlphaCeiling, kAlphaFloor);
    const auto root = table.solve(target);
    const double a = root.params;
    return {G0Params{-a, stats.mean * (a - 1.0)}, root.converged, root.residual};
}

GHFit fit_gh_moments(const SampleStats& stats, Looks looks) {
    check_stats(stats);
    const double target =
        stats.half_moment / std::sqrt(stats.mean) / speckle_half_moment_ratio(looks);
    static const RatioTable table(gh_half_moment_ratio, kOmegaLow, kOmegaHigh);
    const auto root = table.solve(target);
    return {GHParams{root.params, stats.mean}, root.converged, root.residual};
}

LeeStats lee_local_stats(std::span<const double> window, Looks looks) {
    const SampleStats s = SampleStats::from_samples(window);
    const double speckle_var = looks.speckle_variance();
    return {s.mean, s.variance,
            (s.variance - s.mean * s.mean * speckle_var) / (speckle_var + 1.0)};
}

}  // namespace speckle
