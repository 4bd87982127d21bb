#include "speckle/metrics.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "speckle/errors.hpp"
#include "speckle/estimation.hpp"

namespace speckle {

std::string_view to_string(Metric metric) {
    switch (metric) {
        case Metric::Enl: return "enl";
        case Metric::LinePreservation: return "line_pres";
        case Metric::EdgeGradient: return "edge_gradient";
        case Metric::EdgeVariance: return "edge_variance";
    }
    return "?";
}

Metric parse_metric(std::string_view name) {
    for (Metric m : kAllMetrics)
        if (to_string(m) == name) return m;
    throw ValidationError("unknown metric '" + std::string(name) + "'");
}

bool higher_is_better(Metric metric) { return metric == Metric::Enl; }

bool better(Metric metric, double a, double b) { return higher_is_better(metric) ? a > b : a < b; }

double MetricRecord::get(Metric metric) const {
    switch (metric) {
        case Metric::Enl: return enl;
        case Metric::LinePreservation: return line_preservation;
        case Metric::EdgeGradient: return edge_gradient;
        case Metric::EdgeVariance: return edge_variance;
    }
    return 0.0;
}

std::vector<double> roi_pixels(const Image& image, const Rect& roi) {
    if (roi.col0 > roi.col1 || roi.row0 > roi.row1 || roi.col1 >= image.width() ||
        roi.row1 >= image.height()) {
        throw ValidationError("ROI outside the image or empty");
    }
    std::vector<double> out;
    out.reserve(roi.area());
    for (std::size_t r = roi.row0; r <= roi.row1; ++r)
        for (std::size_t c = roi.col0; c <= roi.col1; ++c) out.push_back(image(c, r));
    return out;
}

double metric_enl(const Image& image, const Rect& roi) {
    return estimate_enl(roi_pixels(image, roi));
}

double line_contrast(const Image& image, const LineTriple& triple) {
    const auto mean = [&](const Rect& r) { return SampleStats::from_samples(roi_pixels(image, r)).mean; };
    if (triple.line.area() != triple.left.area() || triple.line.area() != triple.right.area()) {
        throw ValidationError("line triple columns must have equal pixel counts");
    }
    return 2.0 * mean(triple.line) - 0.5 * (mean(triple.left) + mean(triple.right));
}

double metric_line(const Image& image, const LineTriple& triple, double truth_contrast) {
    return std::abs(line_contrast(image, triple) - truth_contrast);
}

EdgeMeasures metric_edge(const Image& image, const Rect& inside, const Rect& outside) {
    const SampleStats in = SampleStats::from_samples(roi_pixels(image, inside));
    const SampleStats out = SampleStats::from_samples(roi_pixels(image, outside));
    return {std::abs(in.mean - out.mean), std::abs(in.variance - out.variance)};
}

MetricRecord assess(const Image& filtered, const PhantomLayout& layout, const Image& truth,
                    EdgeMode edge_mode) {
    if (filtered.width() != layout.width || filtered.height() != layout.height ||
        truth.width() != layout.width || truth.height() != layout.height) {
        throw ValidationError("filtered image, truth and layout dimensions differ");
    }
    const RoiRegistry reg = layout.rois();
    MetricRecord record;
    // A noiseless block has no coefficient of variation; its ENL is unbounded.
    const auto block = roi_pixels(filtered, reg.homogeneous_block);
    const SampleStats block_stats = SampleStats::from_samples(block);
    record.enl = block_stats.variance > 0.0 ? estimate_enl(block)
                                             : std::numeric_limits<double>::infinity();
    record.line_preservation = metric_line(filtered, reg.line, line_contrast(truth, reg.line));

    if (edge_mode == EdgeMode::Primary) {
        const EdgePair& e = reg.edges.at(reg.primary_edge);
        const EdgeMeasures m = metric_edge(filtered, e.inside, e.outside);
        record.edge_gradient = m.gradient;
        record.edge_variance = m.variance;
    } else {
        std::size_t count = 0;
        for (const EdgePair& e : reg.edges) {
            if (e.strip_width < 5) continue;
            const EdgeMeasures m = metric_edge(filtered, e.inside, e.outside);
            record.edge_gradient += m.gradient;
            record.edge_variance += m.variance;
            ++count;
        }
        if (count == 0) throw ValidationError("no strip of width >= 5 to aggregate edges over");
        record.edge_gradient /= static_cast<double>(count);
        record.edge_variance /= static_cast<double>(count);
    }
    return record;
}

}  // namespace speckle
