#pragma once

#include <string_view>
#include <variant>

#include "speckle/distributions.hpp"
#include "speckle/image.hpp"

namespace speckle {

enum class FilterMethod { Lee, MapG0, MapGH };

/// What the MAP filters output where the local moment fit fails.
enum class Fallback { WindowMean, Identity };

std::string_view to_string(FilterMethod method);
FilterMethod parse_filter_method(std::string_view name);
std::string_view to_string(Fallback fallback);
Fallback parse_fallback(std::string_view name);

struct FilterSpec {
    FilterMethod method = FilterMethod::Lee;
    int window = 7;
    Looks looks{1.0};
    Fallback fallback = Fallback::WindowMean;
};

/// Posterior mode under the reciprocal-Gamma prior:
/// (L z + gamma) / (L + 1 - alpha).
double map_g0_estimate(double z, const G0Params& prior, Looks looks);

/// Posterior mode under the inverse-Gaussian prior, the positive root of
/// (w/s) x^2 + (L + 3/2) x - (L z + w s) = 0.
double map_gh_estimate(double z, const GHParams& prior, Looks looks);

using MapPrior = std::variant<G0Params, GHParams>;

/// Maximizes log f_{Z|X=x}(z) + log f_X(x) numerically over x > 0: a
/// log-spaced grid scan to bracket the mode, then Brent's method.
/// Independent of the closed forms; used to check them.
double numerical_map_oracle(double z, const MapPrior& prior, Looks looks);

/// Sliding-window despeckling with mirror (reflect-without-repeat) borders.
/// Rows are split across `threads` workers; the output does not depend on
/// the thread count.
Image apply_filter(const Image& image, const FilterSpec& spec, unsigned threads = 1);

}  // namespace speckle
