#include "speckle/montecarlo.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <exception>
#include <map>
#include <mutex>
#include <thread>
#include <tuple>

#include "speckle/errors.hpp"
#include "speckle/rng.hpp"

namespace speckle {

std::uint64_t derive_seed(std::uint64_t master, int situation, std::size_t replication) noexcept {
    const std::uint64_t key = (static_cast<std::uint64_t>(static_cast<std::uint32_t>(situation)) << 32) |
                              static_cast<std::uint32_t>(replication);
    return mix64(master ^ mix64(key));
}

std::string_view to_string(EdgeMode mode) {
    return mode == EdgeMode::Primary ? "primary" : "aggregate";
}

EdgeMode parse_edge_mode(std::string_view name) {
    if (name == "primary") return EdgeMode::Primary;
    if (name == "aggregate") return EdgeMode::Aggregate;
    throw ValidationError("unknown edge mode '" + std::string(name) +
                          "' (expected primary or aggregate)");
}

// ---- ExperimentSpec ------------------------------------------------------

namespace {

constexpr std::string_view kLayoutPrefix = "layout.";

std::uint64_t parse_seed(const std::string& text) {
    std::uint64_t v = 0;
    const char* first = text.data();
    const char* last = text.data() + text.size();
    int base = 10;
    if (text.size() > 2 && text[0] == '0' && (text[1] == 'x' || text[1] == 'X')) {
        first += 2;
        base = 16;
    }
    const auto [ptr, ec] = std::from_chars(first, last, v, base);
    if (text.empty() || ec != std::errc{} || ptr != last) {
        throw ValidationError("master_seed: '" + text + "' is not an unsigned 64-bit integer");
    }
    return v;
}

template <class T, class F>
std::string join(const std::vector<T>& items, F format) {
    std::string out;
    for (std::size_t i = 0; i < items.size(); ++i) {
        if (i > 0) out += ',';
        out += format(items[i]);
    }
    return out;
}

}  // namespace

PhantomLayout ExperimentSpec::effective_layout() const {
    PhantomLayout l = layout;
    l.contrast_ratio = contrast_ratio;
    return l;
}

std::vector<std::string> ExperimentSpec::violations() const {
    std::vector<std::string> v;
    if (situations.empty()) v.push_back("situations must not be empty");
    std::set<int> seen_situations;
    for (int s : situations) {
        if (s < 0 || s > 6) v.push_back("situation " + std::to_string(s) + " outside 0-6");
        if (!seen_situations.insert(s).second)
            v.push_back("situation " + std::to_string(s) + " listed twice");
    }
    if (filters.empty()) v.push_back("filters must not be empty");
    std::set<FilterMethod> seen_filters;
    for (FilterMethod f : filters) {
        if (!seen_filters.insert(f).second)
            v.push_back("filter " + std::string(to_string(f)) + " listed twice");
    }
    if (replications < 1) v.push_back("replications must be at least 1");
    if (replications > 0xffffffffULL) v.push_back("replications must fit in 32 bits");
    if (window < 3 || window % 2 == 0) v.push_back("window must be odd and at least 3");
    if (!(contrast_ratio > 0.0) || !std::isfinite(contrast_ratio))
        v.push_back("contrast_ratio must be positive and finite");
    const PhantomLayout l = effective_layout();
    for (const std::string& msg : l.violations()) v.push_back("layout: " + msg);
    if (window > 0 && static_cast<std::size_t>(window) > std::min(l.width, l.height))
        v.push_back("window exceeds the layout dimensions");
    return v;
}

void ExperimentSpec::validate() const {
    auto v = violations();
    if (!v.empty()) throw ValidationError(std::move(v));
}

KeyValues ExperimentSpec::to_key_values() const {
    KeyValues kv;
    kv.set("situations", join(situations, [](int s) { return std::to_string(s); }));
    kv.set("filters", join(filters, [](FilterMethod f) { return std::string(to_string(f)); }));
    kv.set("replications", std::to_string(replications));
    kv.set("master_seed", std::to_string(master_seed));
    kv.set("looks", format_real(looks.value()));
    kv.set("window", std::to_string(window));
    kv.set("contrast_ratio", format_real(contrast_ratio));
    kv.set("fallback", std::string(to_string(fallback)));
    kv.set("edge_mode", std::string(to_string(edge_mode)));
    const KeyValues layout_kv = layout.to_key_values();
    for (const auto& [key, value] : layout_kv.entries()) {
        if (key == "contrast_ratio") continue;
        kv.set(std::string(kLayoutPrefix) + key, value);
    }
    return kv;
}

ExperimentSpec ExperimentSpec::from_key_values(const KeyValues& kv) {
    ExperimentSpec spec;
    KeyValues layout_kv;
    std::vector<std::string> errors;
    for (const auto& [key, value] : kv.entries()) {
        try {
            if (key == "situations") {
                spec.situations.clear();
                for (const auto& s : split(value, ','))
                    spec.situations.push_back(static_cast<int>(parse_integer(s, key)));
            } else if (key == "filters") {
                spec.filters.clear();
                for (const auto& f : split(value, ',')) spec.filters.push_back(parse_filter_method(f));
            } else if (key == "replications") {
                const long long n = parse_integer(value, key);
                if (n < 1) throw ValidationError("replications must be at least 1");
                spec.replications = static_cast<std::size_t>(n);
            } else if (key == "master_seed") {
                spec.master_seed = parse_seed(value);
            } else if (key == "looks") {
                spec.looks = Looks(parse_real(value, key));
            } else if (key == "window") {
                spec.window = static_cast<int>(parse_integer(value, key));
            } else if (key == "contrast_ratio") {
                spec.contrast_ratio = parse_real(value, key);
            } else if (key == "fallback") {
                spec.fallback = parse_fallback(value);
            } else if (key == "edge_mode") {
                spec.edge_mode = parse_edge_mode(value);
            } else if (key.starts_with(kLayoutPrefix) &&
                       key.substr(kLayoutPrefix.size()) != "contrast_ratio") {
                layout_kv.set(key.substr(kLayoutPrefix.size()), value);
            } else {
                errors.push_back("unknown key '" + key + "'");
            }
        } catch (const ValidationError& e) {
            errors.insert(errors.end(), e.violations().begin(), e.violations().end());
        } catch (const std::exception& e) {
            errors.push_back(key + ": " + e.what());
        }
    }
    if (!errors.empty()) throw ValidationError(std::move(errors));
    spec.layout = PhantomLayout::from_key_values(layout_kv);
    spec.validate();
    return spec;
}

// ---- run_experiment ------------------------------------------------------

bool canonical_less(const ReplicationResult& a, const ReplicationResult& b) {
    return std::tie(a.situation, a.replication, a.filter) <
           std::tie(b.situation, b.replication, b.filter);
}

void sort_canonical(std::vector<ReplicationResult>& results) {
    std::stable_sort(results.begin(), results.end(), canonical_less);
}

namespace {

std::string describe_cell(int situation, std::size_t replication,
                          std::optional<FilterMethod> filter) {
    std::string s = "situation " + std::to_string(situation) + ", replication " +
                    std::to_string(replication);
    if (filter) s += ", filter " + std::string(to_string(*filter));
    return s;
}

}  // namespace

ExperimentError::ExperimentError(int situation, std::size_t replication,
                                 std::optional<FilterMethod> filter, const std::string& cause)
    : std::runtime_error(describe_cell(situation, replication, filter) + ": " + cause),
      situation_(situation),
      replication_(replication),
      filter_(filter) {}

std::vector<ReplicationResult> run_experiment(const ExperimentSpec& spec,
                                              const RunOptions& options) {
    spec.validate();
    const PhantomLayout layout = spec.effective_layout();

    std::vector<int> situations = spec.situations;
    std::sort(situations.begin(), situations.end());
    std::vector<FilterMethod> filters = spec.filters;
    std::sort(filters.begin(), filters.end());

    std::map<int, Situation> models;
    std::map<int, Image> truths;
    for (int s : situations) {
        models.emplace(s, make_situation(s, layout, spec.looks));
        truths.emplace(s, situation_truth(s, layout));
    }

    std::vector<Cell> cells;
    for (int s : situations)
        for (std::size_t r = 0; r < spec.replications; ++r)
            if (!options.skip.contains({s, r})) cells.emplace_back(s, r);

    std::vector<std::vector<ReplicationResult>> slots(cells.size());
    std::mutex sink_mutex;
    std::atomic<std::size_t> next{0};
    std::atomic<bool> stop{false};
    std::exception_ptr failure;

    const auto run_cell = [&](std::size_t index) {
        const auto [s, r] = cells[index];
        const std::uint64_t seed = derive_seed(spec.master_seed, s, r);
        const Image corrupted = [&] {
            try {
                Rng rng(seed);
                return corrupt(layout, models.at(s), rng);
            } catch (const std::exception& e) {
                throw ExperimentError(s, r, std::nullopt, e.what());
            }
        }();
        std::vector<ReplicationResult> records;
        for (FilterMethod f : filters) {
            try {
                if (options.filter_input) options.filter_input(s, r, f, corrupted);
                const Image filtered =
                    apply_filter(corrupted, FilterSpec{f, spec.window, spec.looks, spec.fallback});
                records.push_back({s, f, r, seed, assess(filtered, layout, truths.at(s), spec.edge_mode)});
            } catch (const std::exception& e) {
                throw ExperimentError(s, r, f, e.what());
            }
        }
        std::lock_guard lock(sink_mutex);
        if (options.sink) options.sink(records);
        slots[index] = std::move(records);
    };

    const auto worker = [&] {
        while (!stop.load()) {
            const std::size_t index = next.fetch_add(1);
            if (index >= cells.size()) return;
            try {
                run_cell(index);
            } catch (...) {
                std::lock_guard lock(sink_mutex);
                if (!failure) failure = std::current_exception();
                stop = true;
            }
        }
    };

    const unsigned threads =
        std::clamp<unsigned>(options.threads, 1, static_cast<unsigned>(std::max<std::size_t>(cells.size(), 1)));
    if (threads == 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
    }
    if (failure) std::rethrow_exception(failure);

    std::vector<ReplicationResult> results;
    results.reserve(cells.size() * filters.size());
    for (auto& slot : slots)
        for (auto& rec : slot) results.push_back(rec);
    return results;
}

// ---- summaries -----------------------------------------------------------

namespace {

double median_of_sorted(const double* first, std::size_t n) {
    return n % 2 == 1 ? first[n / 2] : 0.5 * (first[n / 2 - 1] + first[n / 2]);
}

}  // namespace

Quartiles tukey_quartiles(std::vector<double> values) {
    if (values.empty()) throw DomainError("quartiles of an empty sample");
    std::sort(values.begin(), values.end());
    const std::size_t n = values.size();
    if (n == 1) return {values[0], values[0], values[0]};
    const std::size_t half = n / 2;
    return {median_of_sorted(values.data(), half), median_of_sorted(values.data(), n),
            median_of_sorted(values.data() + (n - half), half)};
}

BoxplotSummary summarize_values(std::vector<double> values) {
    if (values.size() < 5) {
        throw ValidationError("boxplot summary needs at least 5 replications, got " +
                              std::to_string(values.size()));
    }
    for (double v : values)
        if (std::isnan(v)) throw DomainError("boxplot summary of a NaN value");
    std::sort(values.begin(), values.end());
    const Quartiles q = tukey_quartiles(values);
    const double iqr = q.q3 - q.q1;
    const double low_fence = q.q1 - 1.5 * iqr;
    const double high_fence = q.q3 + 1.5 * iqr;

    BoxplotSummary b;
    b.n = values.size();
    b.q1 = q.q1;
    b.median = q.median;
    b.q3 = q.q3;
    bool have_inlier = false;
    for (double v : values) {
        if (v < low_fence || v > high_fence) {
            b.outliers.push_back(v);
            continue;
        }
        if (!have_inlier) b.min = v;
        b.max = v;
        have_inlier = true;
    }
    return b;
}

std::vector<BoxplotSummary> summarize(const std::vector<ReplicationResult>& results,
                                      Metric metric) {
    std::map<std::pair<int, FilterMethod>, std::vector<double>> groups;
    for (const auto& rec : results) groups[{rec.situation, rec.filter}].push_back(rec.metrics.get(metric));
    std::vector<BoxplotSummary> out;
    for (auto& [key, values] : groups) {
        BoxplotSummary b;
        try {
            b = summarize_values(std::move(values));
        } catch (const ValidationError& e) {
            throw ValidationError("situation " + std::to_string(key.first) + ", filter " +
                                  std::string(to_string(key.second)) + ": " + e.what());
        }
        b.metric = metric;
        b.situation = key.first;
        b.filter = key.second;
        out.push_back(std::move(b));
    }
    return out;
}

std::vector<ConflictEntry> conflict_report(const std::vector<ReplicationResult>& results) {
    // situation -> replication -> records of that cell in canonical filter order
    std::map<int, std::map<std::size_t, std::vector<const ReplicationResult*>>> cells;
    std::map<int, std::set<FilterMethod>> filters_of;
    for (const auto& rec : results) {
        cells[rec.situation][rec.replication].push_back(&rec);
        filters_of[rec.situation].insert(rec.filter);
    }
    std::vector<ConflictEntry> out;
    for (auto& [situation, reps] : cells) {
        const std::set<FilterMethod>& filters = filters_of[situation];
        for (Metric metric : kAllMetrics) {
            std::map<FilterMethod, std::size_t> wins;
            for (auto& [rep, recs] : reps) {
                std::sort(recs.begin(), recs.end(),
                          [](const auto* a, const auto* b) { return a->filter < b->filter; });
                const ReplicationResult* best = recs.front();
                for (const auto* rec : recs)
                    if (better(metric, rec->metrics.get(metric), best->metrics.get(metric))) best = rec;
                ++wins[best->filter];
            }
            ConflictEntry entry;
            entry.situation = situation;
            entry.metric = metric;
            entry.replications = reps.size();
            double top = 0.0;
            for (FilterMethod f : filters) {
                const double fraction =
                    static_cast<double>(wins[f]) / static_cast<double>(reps.size());
                entry.win_fraction.emplace_back(f, fraction);
                top = std::max(top, fraction);
            }
            if (reps.size() >= 2 && filters.size() >= 2) entry.unstable = top <= 0.8;
            out.push_back(std::move(entry));
        }
    }
    return out;
}

}  // namespace speckle
