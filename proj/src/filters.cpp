#include "speckle/filters.hpp"

#include <algorithm>
#include <boost/math/tools/minima.hpp>
#include <cmath>
#include <limits>
#include <string>
#include <thread>
#include <vector>

#include "speckle/errors.hpp"
#include "speckle/estimation.hpp"

namespace speckle {

std::string_view to_string(FilterMethod method) {
    switch (method) {
        case FilterMethod::Lee: return "lee";
        case FilterMethod::MapG0: return "mapg0";
        case FilterMethod::MapGH: return "mapgh";
    }
    return "?";
}

FilterMethod parse_filter_method(std::string_view name) {
    if (name == "lee") return FilterMethod::Lee;
    if (name == "mapg0") return FilterMethod::MapG0;
    if (name == "mapgh") return FilterMethod::MapGH;
    throw ValidationError("unknown filter method '" + std::string(name) +
                          "' (expected lee, mapg0 or mapgh)");
}

std::string_view to_string(Fallback fallback) {
    return fallback == Fallback::WindowMean ? "window_mean" : "identity";
}

Fallback parse_fallback(std::string_view name) {
    if (name == "window_mean") return Fallback::WindowMean;
    if (name == "identity") return Fallback::Identity;
    throw ValidationError("unknown fallback '" + std::string(name) +
                          "' (expected window_mean or identity)");
}

double map_g0_estimate(double z, const G0Params& prior, Looks looks) {
    const double L = looks.value();
    return (L * z + prior.gamma) / (L + 1.0 - prior.alpha);
}

double map_gh_estimate(double z, const GHParams& prior, Looks looks) {
    const double L = looks.value();
    const double a = prior.omega / prior.sigma;
    const double b = L + 1.5;
    const double c = L * z + prior.omega * prior.sigma;
    // (-b + sqrt(b^2 + 4ac)) / 2a, rationalized so that small a does not cancel.
    return 2.0 * c / (b + std::sqrt(b * b + 4.0 * a * c));
}

double numerical_map_oracle(double z, const MapPrior& prior, Looks looks) {
    if (!(z > 0.0) || !std::isfinite(z)) throw DomainError("MAP oracle needs z > 0");
    double scale = 0.0;
    std::visit(
        [&](const auto& p) {
            validate(p);
            using P = std::decay_t<decltype(p)>;
            if constexpr (std::is_same_v<P, G0Params>) {
                scale = p.gamma / (1.0 - p.alpha);
            } else {
                scale = p.sigma;
            }
        },
        prior);
    const auto neg_log_posterior = [&](double t) {
        const double x = std::exp(t);
        const double prior_term =
            std::visit([&](const auto& p) { return log_backscatter_pdf(x, p); }, prior);
        return -(log_conditional_return_pdf(z, x, looks) + prior_term);
    };

    const double centre = std::log(std::max(scale, z));
    constexpr int kGrid = 800;
    constexpr double kHalfSpan = 40.0;
    const double step = 2.0 * kHalfSpan / kGrid;
    int best = -1;
    double best_value = std::numeric_limits<double>::infinity();
    for (int i = 0; i <= kGrid; ++i) {
        const double v = neg_log_posterior(centre - kHalfSpan + i * step);
        if (v < best_value) {
            best_value = v;
            best = i;
        }
    }
    if (best <= 0 || best >= kGrid) {
        throw std::runtime_error("MAP oracle: no interior maximum in the search bracket");
    }
    const double lo = centre - kHalfSpan + (best - 1) * step;
    const double hi = centre - kHalfSpan + (best + 1) * step;
    std::uintmax_t iterations = 500;
    const auto [t, value] = boost::math::tools::brent_find_minima(
        neg_log_posterior, lo, hi, std::numeric_limits<double>::digits, iterations);
    (void)value;
    return std::exp(t);
}

namespace {

std::size_t reflect(std::ptrdiff_t i, std::size_t n) {
    if (i < 0) return static_cast<std::size_t>(-i);
    if (i >= static_cast<std::ptrdiff_t>(n)) return 2 * (n - 1) - static_cast<std::size_t>(i);
    return static_cast<std::size_t>(i);
}

double filter_pixel(double z, std::span<const double> window, const FilterSpec& spec) {
    if (spec.method == FilterMethod::Lee) {
        const LeeStats s = lee_local_stats(window, spec.looks);
        double gain = 0.0;
        if (s.observed_variance > 0.0) {
            gain = std::clamp(s.backscatter_variance / s.observed_variance, 0.0, 1.0);
        }
        return s.mean + gain * (z - s.mean);
    }
    const SampleStats stats = SampleStats::from_samples(window);
    const double fallback = spec.fallback == Fallback::WindowMean ? stats.mean : z;
    if (!(stats.mean > 0.0)) return fallback;
    if (spec.method == FilterMethod::MapG0) {
        const G0Fit fit = fit_g0_moments(stats, spec.looks);
        return fit.converged ? map_g0_estimate(z, fit.params, spec.looks) : fallback;
    }
    const GHFit fit = fit_gh_moments(stats, spec.looks);
    return fit.converged ? map_gh_estimate(z, fit.params, spec.looks) : fallback;
}

void filter_rows(const Image& in, Image& out, const FilterSpec& spec, std::size_t row_begin,
                 std::size_t row_end) {
    const auto half = static_cast<std::ptrdiff_t>(spec.window / 2);
    std::vector<double> window(static_cast<std::size_t>(spec.window) * spec.window);
    for (std::size_t r = row_begin; r < row_end; ++r) {
        for (std::size_t c = 0; c < in.width(); ++c) {
            std::size_t k = 0;
            for (std::ptrdiff_t dr = -half; dr <= half; ++dr) {
                const std::size_t rr = reflect(static_cast<std::ptrdiff_t>(r) + dr, in.height());
                for (std::ptrdiff_t dc = -half; dc <= half; ++dc) {
                    window[k++] = in(reflect(static_cast<std::ptrdiff_t>(c) + dc, in.width()), rr);
                }
            }
            out(c, r) = filter_pixel(in(c, r), window, spec);
        }
    }
}

}  // namespace

Image apply_filter(const Image& image, const FilterSpec& spec, unsigned threads) {
    if (spec.window < 3 || spec.window % 2 == 0) {
        throw ValidationError("filter window must be odd and at least 3, got " +
                              std::to_string(spec.window));
    }
    if (static_cast<std::size_t>(spec.window) > std::min(image.width(), image.height())) {
        throw ValidationError("filter window " + std::to_string(spec.window) +
                              " exceeds the image dimensions " + std::to_string(image.width()) +
                              "x" + std::to_string(image.height()));
    }
    image.validate();

    Image out(image.width(), image.height());
    threads = std::clamp<unsigned>(threads, 1, static_cast<unsigned>(image.height()));
    if (threads == 1) {
        filter_rows(image, out, spec, 0, image.height());
        return out;
    }
    {
        std::vector<std::jthread> workers;
        const std::size_t chunk = (image.height() + threads - 1) / threads;
        for (unsigned t = 0; t < threads; ++t) {
            const std::size_t begin = t * chunk;
            const std::size_t end = std::min(image.height(), begin + chunk);
            if (begin >= end) break;
            workers.emplace_back([&, begin, end] { filter_rows(image, out, spec, begin, end); });
        }
    }  // joined here, before `out` is returned
    return out;
}

}  // namespace speckle
