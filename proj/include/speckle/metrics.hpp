#pragma once

#include <array>
#include <span>
#include <string_view>
#include <vector>

#include "speckle/image.hpp"
#include "speckle/phantom.hpp"

namespace speckle {

enum class Metric { Enl, LinePreservation, EdgeGradient, EdgeVariance };

inline constexpr std::array<Metric, 4> kAllMetrics = {
    Metric::Enl, Metric::LinePreservation, Metric::EdgeGradient, Metric::EdgeVariance};

/// Column names used in the CSV files: enl, line_pres, edge_gradient, edge_variance.
std::string_view to_string(Metric metric);
Metric parse_metric(std::string_view name);

/// ENL is higher-is-better; the other three are lower-is-better.
bool higher_is_better(Metric metric);
/// True when `a` is strictly better than `b` under the metric's direction.
bool better(Metric metric, double a, double b);

struct MetricRecord {
    double enl = 0.0;
    double line_preservation = 0.0;
    double edge_gradient = 0.0;
    double edge_variance = 0.0;

    double get(Metric metric) const;

    friend bool operator==(const MetricRecord&, const MetricRecord&) = default;
};

enum class EdgeMode {
    /// The widest strip's left edge only.
    Primary,
    /// Mean over every strip of width >= 5.
    Aggregate,
};

std::vector<double> roi_pixels(const Image& image, const Rect& roi);

double metric_enl(const Image& image, const Rect& roi);

/// 2 x_l - (x_l1 + x_l2) / 2 over the column means of the triple.
double line_contrast(const Image& image, const LineTriple& triple);

/// |line_contrast(image) - truth_contrast|.
double metric_line(const Image& image, const LineTriple& triple, double truth_contrast);

struct EdgeMeasures {
    double gradient = 0.0;
    double variance = 0.0;
};

/// |mean(inside) - mean(outside)| and |var(inside) - var(outside)|.
EdgeMeasures metric_edge(const Image& image, const Rect& inside, const Rect& outside);

/// enl is +infinity when the homogeneous block has zero variance (e.g. the truth image).
MetricRecord assess(const Image& filtered, const PhantomLayout& layout, const Image& truth,
                    EdgeMode edge_mode = EdgeMode::Primary);

}  // namespace speckle
