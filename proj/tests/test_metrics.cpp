#include "doctest.h"

#include <cmath>

#include "speckle/errors.hpp"
#include "speckle/filters.hpp"
#include "speckle/metrics.hpp"
#include "speckle/phantom.hpp"

using namespace speckle;

namespace {

Image scaled(const Image& image, double factor) {
    Image out = image;
    for (std::size_t r = 0; r < out.height(); ++r)
        for (std::size_t c = 0; c < out.width(); ++c) out(c, r) = factor * image(c, r);
    return out;
}

bool inside_any(const RoiRegistry& reg, std::size_t c, std::size_t r) {
    if (reg.homogeneous_block.contains(c, r)) return true;
    if (reg.line.line.contains(c, r) || reg.line.left.contains(c, r) ||
        reg.line.right.contains(c, r)) {
        return true;
    }
    for (const EdgePair& e : reg.edges)
        if (e.inside.contains(c, r) || e.outside.contains(c, r)) return true;
    return false;
}

}  // namespace

TEST_CASE("metric names and direction of merit") {
    for (Metric m : kAllMetrics) CHECK(parse_metric(to_string(m)) == m);
    CHECK(to_string(Metric::LinePreservation) == "line_pres");
    CHECK_THROWS_AS(parse_metric("psnr"), ValidationError);

    CHECK(higher_is_better(Metric::Enl));
    CHECK_FALSE(higher_is_better(Metric::LinePreservation));
    CHECK_FALSE(higher_is_better(Metric::EdgeGradient));
    CHECK_FALSE(higher_is_better(Metric::EdgeVariance));
    CHECK(better(Metric::Enl, 20.0, 10.0));
    CHECK(better(Metric::EdgeVariance, 10.0, 20.0));
    CHECK_FALSE(better(Metric::LinePreservation, 5.0, 5.0));
}

TEST_CASE("self-assessment of the truth image") {
    const auto layout = PhantomLayout::canonical();
    const Image truth = build_phantom(layout);
    const auto reg = layout.rois();
    CHECK(line_contrast(truth, reg.line) == doctest::Approx(1610.0).epsilon(1e-15));

    const MetricRecord rec = assess(truth, layout, truth);
    CHECK(rec.line_preservation == 0.0);
    CHECK(rec.edge_variance == 0.0);
    CHECK(rec.edge_gradient == 690.0);
    CHECK(std::isinf(rec.enl));
    CHECK_THROWS_AS(metric_enl(truth, reg.homogeneous_block), DomainError);
}

TEST_CASE("a line blurred into the background") {
    const auto layout = PhantomLayout::canonical();
    const Image truth = build_phantom(layout);
    const Image flat(layout.width, layout.height, 230.0);
    const auto reg = layout.rois();
    CHECK(metric_line(flat, reg.line, line_contrast(truth, reg.line)) ==
          doctest::Approx(1380.0).epsilon(1e-15));
}

TEST_CASE("edge measures") {
    const auto layout = PhantomLayout::canonical();
    const Image truth = build_phantom(layout);
    const EdgePair& e = layout.rois().edges.at(layout.rois().primary_edge);
    const EdgeMeasures same = metric_edge(truth, e.inside, e.inside);
    CHECK(same.gradient == 0.0);
    CHECK(same.variance == 0.0);

    Rng rng(77);
    const Image noisy = corrupt(layout, make_situation(2, layout, Looks(1)), rng);
    const EdgeMeasures m = metric_edge(noisy, e.inside, e.outside);
    CHECK(std::isfinite(m.gradient));
    CHECK(std::isfinite(m.variance));
    CHECK(m.gradient >= 0.0);
    CHECK(m.variance >= 0.0);
}

TEST_CASE("ENL is scale invariant") {
    const auto layout = PhantomLayout::canonical();
    Rng rng(5);
    const Image noisy = corrupt(layout, make_situation(1, layout, Looks(1)), rng);
    const Rect& block = layout.rois().homogeneous_block;
    const double base = metric_enl(noisy, block);
    for (double factor : {0.001, 0.5, 4.0, 1e6}) {
        CHECK(metric_enl(scaled(noisy, factor), block) == doctest::Approx(base).epsilon(1e-12));
    }
}

TEST_CASE("ENL of unfiltered and Lee-filtered situation 0") {
    const auto layout = PhantomLayout::canonical();
    const Rect& block = layout.rois().homogeneous_block;
    {
        Rng rng(2024);
        const Image noisy = corrupt(layout, make_situation(0, layout, Looks(4)), rng);
        CHECK(metric_enl(noisy, block) == doctest::Approx(4.0).epsilon(0.05));
    }
    {
        Rng rng(2025);
        const Image noisy = corrupt(layout, make_situation(0, layout, Looks(1)), rng);
        const Image filtered =
            apply_filter(noisy, FilterSpec{FilterMethod::Lee, 7, Looks(1), Fallback::WindowMean});
        CHECK(metric_enl(noisy, block) < 1.2);
        CHECK(metric_enl(filtered, block) > 10.0);
    }
}

TEST_CASE("measures only read their ROIs") {
    const auto layout = PhantomLayout::canonical();
    const auto reg = layout.rois();
    const Image truth = situation_truth(1, layout);
    Rng rng(31);
    const Image noisy = corrupt(layout, make_situation(1, layout, Looks(1)), rng);
    Image perturbed = noisy;
    std::size_t changed = 0;
    for (std::size_t r = 0; r < perturbed.height(); ++r) {
        for (std::size_t c = 0; c < perturbed.width(); ++c) {
            if (inside_any(reg, c, r)) continue;
            perturbed(c, r) = 3.0 * noisy(c, r) + 17.0;
            ++changed;
        }
    }
    CHECK(changed > 30000);
    CHECK(assess(perturbed, layout, truth) == assess(noisy, layout, truth));
    CHECK(assess(perturbed, layout, truth, EdgeMode::Aggregate) ==
          assess(noisy, layout, truth, EdgeMode::Aggregate));
}

TEST_CASE("aggregate edge mode averages the wide strips") {
    const auto layout = PhantomLayout::canonical();
    const Image truth = build_phantom(layout);
    const MetricRecord rec = assess(truth, layout, truth, EdgeMode::Aggregate);
    CHECK(rec.edge_gradient == doctest::Approx(690.0).epsilon(1e-15));
    CHECK(rec.edge_variance == 0.0);
}

TEST_CASE("ROI and dimension errors") {
    const auto layout = PhantomLayout::canonical();
    const Image truth = build_phantom(layout);
    CHECK_THROWS_AS(roi_pixels(truth, Rect{250, 0, 260, 5}), ValidationError);
    CHECK_THROWS_AS(roi_pixels(truth, Rect{10, 0, 5, 5}), ValidationError);
    const Image small(64, 64, 1.0);
    CHECK_THROWS_AS(assess(small, layout, truth), ValidationError);
    const LineTriple uneven{Rect{20, 20, 20, 30}, Rect{19, 20, 19, 29}, Rect{21, 20, 21, 30}};
    CHECK_THROWS_AS(line_contrast(truth, uneven), ValidationError);
}

TEST_CASE("bitwise-equal inputs give identical records") {
    const auto layout = PhantomLayout::canonical();
    const Image truth = situation_truth(3, layout);
    Rng a(9);
    Rng b(9);
    const Image x = corrupt(layout, make_situation(3, layout, Looks(1)), a);
    const Image y = corrupt(layout, make_situation(3, layout, Looks(1)), b);
    REQUIRE(x == y);
    CHECK(assess(x, layout, truth) == assess(y, layout, truth));
}

TEST_CASE("frozen record for a Lee-filtered situation 1 image") {
    const auto layout = PhantomLayout::canonical();
    Rng rng(1001);
    const Image noisy = corrupt(layout, make_situation(1, layout, Looks(1)), rng);
    const Image filtered =
        apply_filter(noisy, FilterSpec{FilterMethod::Lee, 7, Looks(1), Fallback::WindowMean});
    const MetricRecord rec = assess(filtered, layout, situation_truth(1, layout));
    CHECK(rec.enl == doctest::Approx(1.3803108890752229).epsilon(1e-12));
    CHECK(rec.line_preservation == doctest::Approx(656.02962511285853).epsilon(1e-12));
    CHECK(rec.edge_gradient == doctest::Approx(571.46209832589363).epsilon(1e-12));
    CHECK(rec.edge_variance == doctest::Approx(1370344.3069981693).epsilon(1e-12));
}
