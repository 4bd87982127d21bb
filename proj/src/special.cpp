#include "speckle/special.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "speckle/errors.hpp"

namespace speckle {

namespace {

constexpr double kEps = 1.0e-16;
constexpr int kMaxIterations = 100000;

double chebyshev(const double* c, int m, double x) {
    const double y2 = 2.0 * x;
    double d = 0.0;
    double dd = 0.0;
    for (int j = m - 1; j >= 1; --j) {
        const double sv = d;
        d = y2 * d - dd + c[j];
        dd = sv;
    }
    return x * d - dd + 0.5 * c[0];
}

// 1/Gamma(1 +- mu) and the two Temme combinations for |mu| <= 1/2.
struct TemmeGammas {
    double gam1;
    double gam2;
    double gampl;
    double gammi;
};

TemmeGammas temme_gammas(double mu) {
    static constexpr double c1[] = {-1.142022680371168e0, 6.5165112670737e-3,
                                    3.087090173086e-4,    -3.4706269649e-6,
                                    6.9437664e-9,         3.67795e-11,
                                    -1.356e-13};
    static constexpr double c2[] = {1.843740587300905e0, -7.68528408447867e-2,
                                    1.2719271366546e-3,  -4.9717367042e-6,
                                    -3.31261198e-8,      2.423096e-10,
                                    -1.702e-13,          -1.49e-15};
    const double xx = 8.0 * mu * mu - 1.0;
    TemmeGammas g{};
    g.gam1 = chebyshev(c1, 7, xx);
    g.gam2 = chebyshev(c2, 8, xx);
    g.gampl = g.gam2 - mu * g.gam1;
    g.gammi = g.gam2 + mu * g.gam1;
    return g;
}

// K_mu(x) and K_{mu+1}(x) for |mu| <= 1/2, returned as mantissas with a
// shared log scale: K = value * exp(log_scale).
struct KPair {
    double k_mu;
    double k_mu1;
    double log_scale;
};

KPair bessel_k_base(double mu, double x) {
    const double mu2 = mu * mu;
    const double xi = 1.0 / x;
    if (x < 2.0) {
        const double x2 = 0.5 * x;
        const double pimu = std::numbers::pi * mu;
        const double fact = std::abs(pimu) < kEps ? 1.0 : pimu / std::sin(pimu);
        double d = -std::log(x2);
        double e = mu * d;
        const double fact2 = std::abs(e) < kEps ? 1.0 : std::sinh(e) / e;
        const TemmeGammas g = temme_gammas(mu);
        double ff = fact * (g.gam1 * std::cosh(e) + g.gam2 * fact2 * d);
        double sum = ff;
        e = std::exp(e);
        double p = 0.5 * e / g.gampl;
        double q = 0.5 / (e * g.gammi);
        double c = 1.0;
        d = x2 * x2;
        double sum1 = p;
        for (int i = 1; i <= kMaxIterations; ++i) {
            const double di = i;
            ff = (di * ff + p + q) / (di * di - mu2);
            c *= d / di;
            p /= di - mu;
            q /= di + mu;
            const double del = c * ff;
            sum += del;
            sum1 += c * (p - di * ff);
            if (std::abs(del) < std::abs(sum) * kEps) break;
        }
        return {sum, sum1 * 2.0 * xi, 0.0};
    }

    // Steed's CF2 with Temme's normalization; exp(-x) is kept as log scale.
    double b = 2.0 * (1.0 + x);
    double d = 1.0 / b;
    double h = d;
    double delh = d;
    double q1 = 0.0;
    double q2 = 1.0;
    const double a1 = 0.25 - mu2;
    double q = a1;
    double c = a1;
    double a = -a1;
    double s = 1.0 + q * delh;
    for (int i = 2; i <= kMaxIterations; ++i) {
        a -= 2.0 * (i - 1);
        c = -a * c / i;
        const double qnew = (q1 - b * q2) / a;
        q1 = q2;
        q2 = qnew;
        q += c * qnew;
        b += 2.0;
        d = 1.0 / (b + a * d);
        delh = (b * d - 1.0) * delh;
        h += delh;
        const double dels = q * delh;
        s += dels;
        if (std::abs(dels / s) < kEps) break;
    }
    h *= a1;
    const double k_mu = std::sqrt(std::numbers::pi / (2.0 * x)) / s;
    const double k_mu1 = k_mu * (mu + x + 0.5 - h) * xi;
    return {k_mu, k_mu1, -x};
}

void check_arguments(double nu, double x) {
    if (!(x > 0.0) || !std::isfinite(x)) {
        throw DomainError("bessel_k: argument must be positive and finite, got " +
                          std::to_string(x));
    }
    if (!std::isfinite(nu)) throw DomainError("bessel_k: order must be finite");
}

}  // namespace

double log_bessel_k(double nu, double x) {
    check_arguments(nu, x);
    nu = std::abs(nu);
    const int steps = static_cast<int>(nu + 0.5);
    const double mu = nu - steps;
    const KPair k = bessel_k_base(mu, x);
    // Upward recurrence on the ratio r_n = K_{n+1}/K_n, which stays finite
    // where the values themselves would leave double range:
    // r_n = 1/r_{n-1} + 2n/x.
    double log_k = std::log(k.k_mu) + k.log_scale;
    double ratio = k.k_mu1 / k.k_mu;
    for (int i = 1; i <= steps; ++i) {
        log_k += std::log(ratio);
        ratio = 1.0 / ratio + 2.0 * (mu + i) / x;
    }
    return log_k;
}

double bessel_k(double nu, double x) {
    const double log_k = log_bessel_k(nu, x);
    if (log_k > std::log(std::numeric_limits<double>::max())) {
        throw OverflowError("bessel_k: K_nu(x) overflows for nu=" + std::to_string(nu) +
                            ", x=" + std::to_string(x));
    }
    if (log_k < std::log(std::numeric_limits<double>::min())) {
        throw OverflowError("bessel_k: K_nu(x) underflows for nu=" + std::to_string(nu) +
                            ", x=" + std::to_string(x));
    }
    return std::exp(log_k);
}

}  // namespace speckle
