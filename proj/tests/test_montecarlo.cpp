#include "doctest.h"

#include <algorithm>
#include <map>
#include <mutex>
#include <set>
#include <sstream>
#include <tuple>

#include "speckle/errors.hpp"
#include "speckle/montecarlo.hpp"
#include "speckle/report.hpp"

using namespace speckle;

namespace {

ExperimentSpec small_spec() {
    ExperimentSpec spec;
    spec.situations = {0, 2};
    spec.filters = {FilterMethod::Lee, FilterMethod::MapG0};
    spec.replications = 3;
    spec.master_seed = 99;
    return spec;
}

ReplicationResult record(int situation, FilterMethod filter, std::size_t rep, double enl,
                         double line = 1.0) {
    ReplicationResult r;
    r.situation = situation;
    r.filter = filter;
    r.replication = rep;
    r.metrics = MetricRecord{enl, line, 1.0, 1.0};
    return r;
}

std::uint64_t fnv1a(const Image& image) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (double v : image.pixels()) {
        const auto* bytes = reinterpret_cast<const unsigned char*>(&v);
        for (std::size_t i = 0; i < sizeof v; ++i) {
            h ^= bytes[i];
            h *= 0x100000001b3ULL;
        }
    }
    return h;
}

}  // namespace

TEST_CASE("derived seeds") {
    CHECK(derive_seed(7, 3, 11) == derive_seed(7, 3, 11));
    std::set<std::uint64_t> seeds;
    for (int s = 0; s <= 6; ++s)
        for (std::size_t r = 0; r < 100; ++r) seeds.insert(derive_seed(kDefaultMasterSeed, s, r));
    CHECK(seeds.size() == 700);

    std::set<std::uint64_t> across_masters;
    for (std::uint64_t m = 0; m < 10000; ++m) across_masters.insert(derive_seed(m, 0, 0));
    CHECK(across_masters.size() == 10000);
}

TEST_CASE("one situation, one filter, two replications") {
    ExperimentSpec spec;
    spec.situations = {1};
    spec.filters = {FilterMethod::Lee};
    spec.replications = 2;
    const auto results = run_experiment(spec);
    REQUIRE(results.size() == 2);
    CHECK(results[0].replication == 0);
    CHECK(results[1].replication == 1);
    CHECK(results[0].seed != results[1].seed);
    CHECK(results[0].seed == derive_seed(spec.master_seed, 1, 0));
}

TEST_CASE("canonical order and determinism across thread counts") {
    const ExperimentSpec spec = small_spec();
    RunOptions serial;
    RunOptions parallel;
    parallel.threads = 4;
    const auto a = run_experiment(spec, serial);
    const auto b = run_experiment(spec, parallel);
    REQUIRE(a.size() == 12);
    CHECK(a == b);
    CHECK(std::is_sorted(a.begin(), a.end(), canonical_less));
    CHECK(a.front().situation == 0);
    CHECK(a.front().filter == FilterMethod::Lee);
    CHECK(a[1].filter == FilterMethod::MapG0);
    std::ostringstream x;
    std::ostringstream y;
    write_results_csv(x, a);
    write_results_csv(y, b);
    CHECK(x.str() == y.str());
}

TEST_CASE("every filter of a cell sees the same corrupted image") {
    const ExperimentSpec spec = small_spec();
    std::map<std::tuple<int, std::size_t, FilterMethod>, std::uint64_t> hashes;
    std::mutex m;
    RunOptions options;
    options.threads = 3;
    options.filter_input = [&](int s, std::size_t r, FilterMethod f, const Image& img) {
        const std::uint64_t h = fnv1a(img);
        std::lock_guard lock(m);
        hashes[{s, r, f}] = h;
    };
    run_experiment(spec, options);
    REQUIRE(hashes.size() == 12);
    std::set<std::uint64_t> distinct;
    for (int s : spec.situations) {
        for (std::size_t r = 0; r < spec.replications; ++r) {
            CHECK(hashes[{s, r, FilterMethod::Lee}] == hashes[{s, r, FilterMethod::MapG0}]);
            distinct.insert(hashes[{s, r, FilterMethod::Lee}]);
        }
    }
    CHECK(distinct.size() == 6);
}

TEST_CASE("skip set and sink support resuming") {
    const ExperimentSpec spec = small_spec();
    const auto full = run_experiment(spec);

    std::vector<ReplicationResult> streamed;
    RunOptions first;
    first.skip = {{0, 1}, {2, 0}, {2, 2}};
    first.threads = 2;
    first.sink = [&](const std::vector<ReplicationResult>& batch) {
        CHECK(batch.size() == 2);
        streamed.insert(streamed.end(), batch.begin(), batch.end());
    };
    const auto partial = run_experiment(spec, first);
    CHECK(partial.size() == 6);
    CHECK(streamed.size() == 6);

    RunOptions rest;
    rest.skip = {{0, 0}, {0, 2}, {2, 1}};
    auto merged = run_experiment(spec, rest);
    merged.insert(merged.end(), streamed.begin(), streamed.end());
    sort_canonical(merged);
    CHECK(merged == full);
}

TEST_CASE("component failures carry their coordinate") {
    ExperimentSpec spec = small_spec();
    RunOptions options;
    options.filter_input = [](int s, std::size_t r, FilterMethod f, const Image&) {
        if (s == 2 && r == 1 && f == FilterMethod::MapG0) throw std::runtime_error("boom");
    };
    try {
        run_experiment(spec, options);
        FAIL("expected an ExperimentError");
    } catch (const ExperimentError& e) {
        CHECK(e.situation() == 2);
        CHECK(e.replication() == 1);
        CHECK(e.filter() == FilterMethod::MapG0);
        CHECK(std::string(e.what()).find("boom") != std::string::npos);
    }
}

TEST_CASE("spec validation and key=value round trip") {
    ExperimentSpec spec;
    CHECK(spec.replications == 100);
    CHECK(spec.window == 7);
    CHECK(spec.violations().empty());

    spec.situations = {1, 1, 9};
    spec.window = 4;
    spec.filters = {};
    const auto v = spec.violations();
    CHECK(v.size() >= 4);
    CHECK_THROWS_AS(spec.validate(), ValidationError);

    ExperimentSpec custom = small_spec();
    custom.looks = Looks(4);
    custom.contrast_ratio = 2.5;
    custom.edge_mode = EdgeMode::Aggregate;
    custom.fallback = Fallback::Identity;
    custom.master_seed = 0xffffffffffffffffULL;
    const ExperimentSpec back = ExperimentSpec::from_key_values(custom.to_key_values());
    CHECK(back.situations == custom.situations);
    CHECK(back.filters == custom.filters);
    CHECK(back.replications == custom.replications);
    CHECK(back.master_seed == custom.master_seed);
    CHECK(back.looks.value() == 4.0);
    CHECK(back.contrast_ratio == 2.5);
    CHECK(back.edge_mode == EdgeMode::Aggregate);
    CHECK(back.fallback == Fallback::Identity);
    CHECK(back.effective_layout().contrast_ratio == 2.5);

    std::istringstream text("replications = 5\nmaster_seed = 0x10\nbogus = 1\n");
    CHECK_THROWS_AS(ExperimentSpec::from_key_values(KeyValues::parse(text)), ValidationError);
    std::istringstream ok("replications = 5\nmaster_seed = 0x10\nlayout.width = 300\n");
    const auto parsed = ExperimentSpec::from_key_values(KeyValues::parse(ok));
    CHECK(parsed.master_seed == 16);
    CHECK(parsed.layout.width == 300);
}

TEST_CASE("tukey quartiles") {
    const auto q = tukey_quartiles({5, 3, 1, 2, 4});
    CHECK(q.q1 == 1.5);
    CHECK(q.median == 3.0);
    CHECK(q.q3 == 4.5);
    const auto even = tukey_quartiles({1, 2, 3, 4, 5, 6});
    CHECK(even.q1 == 2.0);
    CHECK(even.median == 3.5);
    CHECK(even.q3 == 5.0);
}

TEST_CASE("boxplot summaries") {
    const BoxplotSummary a = summarize_values({1, 2, 3, 4, 5});
    CHECK(a.min == 1.0);
    CHECK(a.q1 == 1.5);
    CHECK(a.median == 3.0);
    CHECK(a.q3 == 4.5);
    CHECK(a.max == 5.0);
    CHECK(a.outliers.empty());

    const BoxplotSummary flat = summarize_values({7, 7, 7, 7, 7, 7});
    CHECK(flat.min == 7.0);
    CHECK(flat.q1 == 7.0);
    CHECK(flat.median == 7.0);
    CHECK(flat.q3 == 7.0);
    CHECK(flat.max == 7.0);
    CHECK(flat.outliers.empty());

    const BoxplotSummary tail = summarize_values({1, 2, 3, 4, 5, 6, 7, 8, 9, 100});
    REQUIRE(tail.outliers.size() == 1);
    CHECK(tail.outliers[0] == 100.0);
    CHECK(tail.max == 9.0);
    CHECK(tail.q3 == 8.0);

    CHECK_THROWS_AS(summarize_values({1, 2, 3, 4}), ValidationError);
}

TEST_CASE("summaries are grouped per situation and filter") {
    std::vector<ReplicationResult> results;
    for (std::size_t r = 0; r < 5; ++r) {
        results.push_back(record(1, FilterMethod::MapG0, r, 10.0 + r));
        results.push_back(record(0, FilterMethod::Lee, r, 20.0 + r));
    }
    const auto s = summarize(results, Metric::Enl);
    REQUIRE(s.size() == 2);
    CHECK(s[0].situation == 0);
    CHECK(s[0].median == 22.0);
    CHECK(s[1].situation == 1);
    CHECK(s[1].filter == FilterMethod::MapG0);
    CHECK(s[1].median == 12.0);

    results.pop_back();
    CHECK_THROWS_AS(summarize(results, Metric::Enl), ValidationError);
}

TEST_CASE("conflict report") {
    std::vector<ReplicationResult> disjoint;
    for (std::size_t r = 0; r < 10; ++r) {
        disjoint.push_back(record(1, FilterMethod::Lee, r, 100.0 + r, 5.0));
        disjoint.push_back(record(1, FilterMethod::MapGH, r, 1.0 + r, 50.0));
    }
    const auto report = conflict_report(disjoint);
    REQUIRE(report.size() == 4);
    const auto& enl = report[0];
    CHECK(enl.metric == Metric::Enl);
    CHECK(enl.replications == 10);
    REQUIRE(enl.win_fraction.size() == 2);
    CHECK(enl.win_fraction[0] == std::pair{FilterMethod::Lee, 1.0});
    CHECK(enl.win_fraction[1] == std::pair{FilterMethod::MapGH, 0.0});
    CHECK(enl.unstable == false);
    // smaller line preservation error wins
    CHECK(report[1].win_fraction[0].second == 1.0);

    std::vector<ReplicationResult> flipping;
    for (std::size_t r = 0; r < 10; ++r) {
        const bool lee_wins = r % 3 == 0;
        flipping.push_back(record(2, FilterMethod::Lee, r, lee_wins ? 9.0 : 1.0));
        flipping.push_back(record(2, FilterMethod::MapG0, r, 5.0));
    }
    const auto flip = conflict_report(flipping);
    CHECK(flip[0].win_fraction[0].second == doctest::Approx(0.4));
    CHECK(flip[0].win_fraction[1].second == doctest::Approx(0.6));
    CHECK(flip[0].unstable == true);

    std::vector<ReplicationResult> single = {record(3, FilterMethod::Lee, 0, 2.0),
                                             record(3, FilterMethod::MapG0, 0, 3.0)};
    const auto one = conflict_report(single);
    for (const auto& e : one) {
        CHECK_FALSE(e.unstable.has_value());
        for (const auto& [f, frac] : e.win_fraction) CHECK((frac == 0.0 || frac == 1.0));
    }
}

TEST_CASE("results CSV round trip") {
    const auto results = run_experiment(small_spec());
    std::ostringstream out;
    write_results_csv(out, results);
    std::istringstream in(out.str());
    const ParsedResults parsed = read_results_csv(in);
    CHECK(parsed.records == results);
    CHECK_FALSE(parsed.truncated_tail);

    const std::string text = out.str();
    std::istringstream cut(text.substr(0, text.size() - 9));
    const ParsedResults partial = read_results_csv(cut, true);
    CHECK(partial.truncated_tail);
    CHECK(partial.records.size() == results.size() - 1);

    std::istringstream bad_header("a,b\n");
    CHECK_THROWS_AS(read_results_csv(bad_header), ValidationError);
}

TEST_CASE("summary CSV and SVG output") {
    std::vector<ReplicationResult> results;
    for (std::size_t r = 0; r < 6; ++r) {
        results.push_back(record(0, FilterMethod::Lee, r, 10.0 + r));
        results.push_back(record(0, FilterMethod::MapGH, r, 3.0 * r));
    }
    std::vector<BoxplotSummary> all;
    for (Metric m : kAllMetrics) {
        const auto s = summarize(results, m);
        all.insert(all.end(), s.begin(), s.end());
    }
    std::ostringstream csv;
    write_summary_csv(csv, all);
    std::istringstream lines(csv.str());
    std::string line;
    std::getline(lines, line);
    CHECK(line == "situation,filter,metric,min,q1,median,q3,max,n_outliers");
    std::size_t rows = 0;
    while (std::getline(lines, line)) ++rows;
    CHECK(rows == 1 * 2 * 4);

    std::ostringstream svg;
    write_boxplot_svg(svg, Metric::Enl, all);
    const std::string s = svg.str();
    CHECK(s.find("<svg") != std::string::npos);
    CHECK(s.find(">L0<") != std::string::npos);
    CHECK(s.find(">H0<") != std::string::npos);
    CHECK(s.find("href") == std::string::npos);
    CHECK(s.find("</svg>") != std::string::npos);
}
