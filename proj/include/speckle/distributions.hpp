#pragma once

#include <cstddef>
#include <string>
#include <variant>
#include <vector>

#include "speckle/rng.hpp"

namespace speckle {

/// Number of looks L >= 1 (the speckle Gamma shape).
class Looks {
public:
    explicit Looks(double value);
    double value() const noexcept { return value_; }
    /// Speckle variance 1/L.
    double speckle_variance() const noexcept { return 1.0 / value_; }

    friend bool operator==(const Looks&, const Looks&) = default;

private:
    double value_;
};

/// Constant backscatter c > 0.
struct ConstantParams {
    double c;
};

/// Gamma backscatter, shape alpha > 0 and rate lambda > 0.
struct KParams {
    double alpha;
    double lambda;
};

/// Reciprocal-Gamma backscatter: X = gamma / G with G ~ Gamma(-alpha, 1).
struct G0Params {
    double alpha;
    double gamma;
};

/// Inverse-Gaussian backscatter with mean sigma and shape 2 omega sigma.
struct GHParams {
    double omega;
    double sigma;
};

void validate(const ConstantParams& p);
void validate(const KParams& p);
void validate(const G0Params& p);
void validate(const GHParams& p);

using Backscatter = std::variant<ConstantParams, KParams, G0Params, GHParams>;

/// Return law Z = X * Y: a backscatter law for X and unit-mean Gamma(L) speckle Y.
struct ReturnModel {
    Backscatter backscatter;
    Looks looks;

    static ReturnModel constant(double c, double looks);
    static ReturnModel k(double alpha, double lambda, double looks);
    static ReturnModel g0(double alpha, double gamma, double looks);
    static ReturnModel gh(double omega, double sigma, double looks);

    std::string describe() const;
};

// Densities. All of them are evaluated in log space; the plain versions
// exponentiate and throw OverflowError instead of returning inf.

double log_speckle_pdf(double x, Looks looks);
double speckle_pdf(double x, Looks looks);

double log_return_pdf(double z, const ReturnModel& model);
double return_pdf(double z, const ReturnModel& model);

/// log f_{Z|X=x}(z): Gamma with shape L and mean x.
double log_conditional_return_pdf(double z, double x, Looks looks);

double log_backscatter_pdf(double x, const G0Params& p);
double log_backscatter_pdf(double x, const GHParams& p);
double log_backscatter_pdf(double x, const KParams& p);

// Samplers. Each return draw consumes the backscatter variate first, then
// the speckle variate.

/// Gamma(shape, 1) by Marsaglia-Tsang, with the U^(1/a) boost below shape 1.
double sample_standard_gamma(Rng& rng, double shape);
/// Inverse Gaussian with the given mean and shape (Michael-Schucany-Haas).
double sample_inverse_gaussian(Rng& rng, double mean, double shape);
double sample_speckle(Rng& rng, Looks looks);
double sample_backscatter(Rng& rng, const Backscatter& backscatter);
double sample_one(Rng& rng, const ReturnModel& model);
std::vector<double> sample(Rng& rng, const ReturnModel& model, std::size_t n);

// Moments.

/// E[Y^k] = Gamma(L + k) / (L^k Gamma(L)); requires k > -L.
double speckle_moment(Looks looks, double k);
/// E[X^k] for the backscatter law; throws DomainError if it does not exist.
double backscatter_moment(const Backscatter& backscatter, double k);
/// E[Z^k] = E[X^k] E[Y^k].
double theoretical_moment(const ReturnModel& model, double k);

}  // namespace speckle
