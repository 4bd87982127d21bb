#include "speckle/distributions.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "speckle/errors.hpp"
#include "speckle/special.hpp"

namespace speckle {

namespace {

template <class... Ts>
struct Overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

double checked_exp(double log_value, const char* what) {
    if (std::isnan(log_value) ||
        log_value > std::log(std::numeric_limits<double>::max())) {
        throw OverflowError(std::string(what) + ": density not representable");
    }
    return std::exp(log_value);
}

void require_positive(double value, const char* what) {
    if (!(value > 0.0) || !std::isfinite(value)) {
        std::ostringstream msg;
        msg << what << " must be positive and finite, got " << value;
        throw DomainError(msg.str());
    }
}

}  // namespace

Looks::Looks(double value) : value_(value) {
    if (!(value >= 1.0) || !std::isfinite(value)) {
        std::ostringstream msg;
        msg << "number of looks must satisfy L >= 1, got " << value;
        throw DomainError(msg.str());
    }
}

void validate(const ConstantParams& p) { require_positive(p.c, "constant backscatter c"); }

void validate(const KParams& p) {
    require_positive(p.alpha, "K alpha");
    require_positive(p.lambda, "K lambda");
}

void validate(const G0Params& p) {
    if (!(p.alpha < 0.0) || !std::isfinite(p.alpha)) {
        std::ostringstream msg;
        msg << "G0 alpha must be negative, got " << p.alpha;
        throw DomainError(msg.str());
    }
    require_positive(p.gamma, "G0 gamma");
}

void validate(const GHParams& p) {
    require_positive(p.omega, "GH omega");
    require_positive(p.sigma, "GH sigma");
}

ReturnModel ReturnModel::constant(double c, double looks) {
    ConstantParams p{c};
    validate(p);
    return {p, Looks(looks)};
}

ReturnModel ReturnModel::k(double alpha, double lambda, double looks) {
    KParams p{alpha, lambda};
    validate(p);
    return {p, Looks(looks)};
}

ReturnModel ReturnModel::g0(double alpha, double gamma, double looks) {
    G0Params p{alpha, gamma};
    validate(p);
    return {p, Looks(looks)};
}

ReturnModel ReturnModel::gh(double omega, double sigma, double looks) {
    GHParams p{omega, sigma};
    validate(p);
    return {p, Looks(looks)};
}

std::string ReturnModel::describe() const {
    std::ostringstream out;
    std::visit(Overloaded{
                   [&](const ConstantParams& p) { out << "Gamma(c=" << p.c; },
                   [&](const KParams& p) { out << "K(alpha=" << p.alpha << ",lambda=" << p.lambda; },
                   [&](const G0Params& p) { out << "G0(alpha=" << p.alpha << ",gamma=" << p.gamma; },
                   [&](const GHParams& p) { out << "GH(omega=" << p.omega << ",sigma=" << p.sigma; },
               },
               backscatter);
    out << ",L=" << looks.value() << ")";
    return out.str();
}

double log_speckle_pdf(double x, Looks looks) {
    require_positive(x, "speckle_pdf: x");
    const double L = looks.value();
    return L * std::log(L) - std::lgamma(L) + (L - 1.0) * std::log(x) - L * x;
}

double speckle_pdf(double x, Looks looks) {
    return checked_exp(log_speckle_pdf(x, looks), "speckle_pdf");
}

double log_conditional_return_pdf(double z, double x, Looks looks) {
    require_positive(x, "conditional return: x");
    return log_speckle_pdf(z / x, looks) - std::log(x);
}

double log_backscatter_pdf(double x, const G0Params& p) {
    validate(p);
    require_positive(x, "reciprocal-Gamma backscatter: x");
    const double a = -p.alpha;
    return a * std::log(p.gamma) - std::lgamma(a) - (a + 1.0) * std::log(x) - p.gamma / x;
}

double log_backscatter_pdf(double x, const GHParams& p) {
    validate(p);
    require_positive(x, "inverse-Gaussian backscatter: x");
    const double w = p.omega;
    const double s = p.sigma;
    return 0.5 * (std::log(w * s / std::numbers::pi) - 3.0 * std::log(x)) + 2.0 * w -
           w * x / s - w * s / x;
}

double log_backscatter_pdf(double x, const KParams& p) {
    validate(p);
    require_positive(x, "Gamma backscatter: x");
    return p.alpha * std::log(p.lambda) - std::lgamma(p.alpha) +
           (p.alpha - 1.0) * std::log(x) - p.lambda * x;
}

double log_return_pdf(double z, const ReturnModel& model) {
    require_positive(z, "return_pdf: z");
    const double L = model.looks.value();
    const double log_z = std::log(z);
    return std::visit(
        Overloaded{
            [&](const ConstantParams& p) {
                return L * (std::log(L) - std::log(p.c)) - std::lgamma(L) + (L - 1.0) * log_z -
                       L * z / p.c;
            },
            [&](const KParams& p) {
                const double half = 0.5 * (p.alpha + L);
                return std::numbers::ln2 + half * (std::log(p.lambda) + std::log(L)) - std::lgamma(L) -
                       std::lgamma(p.alpha) + (half - 1.0) * log_z +
                       log_bessel_k(p.alpha - L, 2.0 * std::sqrt(p.lambda * L * z));
            },
            [&](const G0Params& p) {
                return L * std::log(L) + std::lgamma(L - p.alpha) - p.alpha * std::log(p.gamma) -
                       std::lgamma(L) - std::lgamma(-p.alpha) + (L - 1.0) * log_z -
                       (L - p.alpha) * std::log(p.gamma + L * z);
            },
            [&](const GHParams& p) {
                const double w = p.omega;
                const double s = p.sigma;
                const double inner = w * s + L * z;
                return std::numbers::ln2 + L * std::log(L) +
                       0.5 * std::log(w * s / std::numbers::pi) - std::lgamma(L) + 2.0 * w +
                       (L - 1.0) * log_z + 0.25 * (1.0 + 2.0 * L) * std::log(w / (s * inner)) +
                       log_bessel_k(L + 0.5, 2.0 * std::sqrt(w / s * inner));
            },
        },
        model.backscatter);
}

double return_pdf(double z, const ReturnModel& model) {
    return checked_exp(log_return_pdf(z, model), "return_pdf");
}

double sample_standard_gamma(Rng& rng, double shape) {
    if (shape < 1.0) {
        const double boost = std::pow(rng.uniform_open(), 1.0 / shape);
        return sample_standard_gamma(rng, shape + 1.0) * boost;
    }
    const double d = shape - 1.0 / 3.0;
    const double c = 1.0 / std::sqrt(9.0 * d);
    for (;;) {
        double x;
        double v;
        do {
            x = rng.normal();
            v = 1.0 + c * x;
        } while (v <= 0.0);
        v = v * v * v;
        const double u = rng.uniform_open();
        const double x2 = x * x;
        if (u < 1.0 - 0.0331 * x2 * x2) return d * v;
        if (std::log(u) < 0.5 * x2 + d * (1.0 - v + std::log(v))) return d * v;
    }
}

double sample_inverse_gaussian(Rng& rng, double mean, double shape) {
    const double nu = rng.normal();
    const double y = nu * nu;
    const double my = mean * y;
    // Larger root of the MSH quadratic, then the smaller one through
    // x_small * x_large = mean^2 to avoid cancellation.
    const double large = mean + mean * (my + std::sqrt(4.0 * shape * my + my * my)) / (2.0 * shape);
    const double small = mean * mean / large;
    const double u = rng.uniform();
    return u * (mean + small) <= mean ? small : large;
}

double sample_speckle(Rng& rng, Looks looks) {
    return sample_standard_gamma(rng, looks.value()) / looks.value();
}

double sample_backscatter(Rng& rng, const Backscatter& backscatter) {
    return std::visit(
        Overloaded{
            [&](const ConstantParams& p) { return p.c; },
            [&](const KParams& p) { return sample_standard_gamma(rng, p.alpha) / p.lambda; },
            [&](const G0Params& p) { return p.gamma / sample_standard_gamma(rng, -p.alpha); },
            [&](const GHParams& p) {
                return sample_inverse_gaussian(rng, p.sigma, 2.0 * p.omega * p.sigma);
            },
        },
        backscatter);
}

double sample_one(Rng& rng, const ReturnModel& model) {
    const double x = sample_backscatter(rng, model.backscatter);
    return x * sample_speckle(rng, model.looks);
}

std::vector<double> sample(Rng& rng, const ReturnModel& model, std::size_t n) {
    if (n < 1) throw DomainError("sample: n must be at least 1");
    std::vector<double> out(n);
    for (auto& v : out) v = sample_one(rng, model);
    return out;
}

double speckle_moment(Looks looks, double k) {
    const double L = looks.value();
    if (!(k > -L)) throw DomainError("speckle moment of order k requires k > -L");
    if (k == 0.0) return 1.0;
    return std::exp(std::lgamma(L + k) - std::lgamma(L) - k * std::log(L));
}

double backscatter_moment(const Backscatter& backscatter, double k) {
    if (k == 0.0) return 1.0;
    return std::visit(
        Overloaded{
            [&](const ConstantParams& p) { return std::pow(p.c, k); },
            [&](const KParams& p) {
                if (!(p.alpha + k > 0.0)) {
                    throw DomainError("K backscatter moment of order k requires alpha > -k");
                }
                return std::exp(std::lgamma(p.alpha + k) - std::lgamma(p.alpha) -
                                k * std::log(p.lambda));
            },
            [&](const G0Params& p) {
                if (!(p.alpha < -k)) {
                    std::ostringstream msg;
                    msg << "G0 moment of order " << k << " does not exist for alpha=" << p.alpha;
                    throw DomainError(msg.str());
                }
                return std::exp(k * std::log(p.gamma) + std::lgamma(-p.alpha - k) -
                                std::lgamma(-p.alpha));
            },
            [&](const GHParams& p) {
                return std::exp(k * std::log(p.sigma) + log_bessel_k(k - 0.5, 2.0 * p.omega) -
                                log_bessel_k(0.5, 2.0 * p.omega));
            },
        },
        backscatter);
}

double theoretical_moment(const ReturnModel& model, double k) {
    if (k == 0.0) return 1.0;
    return backscatter_moment(model.backscatter, k) * speckle_moment(model.looks, k);
}

}  // namespace speckle
