#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "speckle/distributions.hpp"
#include "speckle/filters.hpp"
#include "speckle/io.hpp"
#include "speckle/metrics.hpp"
#include "speckle/phantom.hpp"

namespace speckle {

inline constexpr std::uint64_t kDefaultMasterSeed = 0xC0FFEE;

/// Seed of the corrupted image for one (situation, replication) cell:
/// mix64(master ^ mix64(situation << 32 | replication)). mix64 is a bijection,
/// so for a fixed master the map is injective over situation, replication < 2^32.
/// Filters do not enter the seed; they all see the same image.
std::uint64_t derive_seed(std::uint64_t master, int situation, std::size_t replication) noexcept;

struct ExperimentSpec {
    std::vector<int> situations = {0, 1, 2, 3, 4, 5, 6};
    std::vector<FilterMethod> filters = {FilterMethod::Lee, FilterMethod::MapG0,
                                         FilterMethod::MapGH};
    std::size_t replications = 100;
    std::uint64_t master_seed = kDefaultMasterSeed;
    Looks looks{1.0};
    int window = 7;
    double contrast_ratio = 4.0;
    PhantomLayout layout = PhantomLayout::canonical();
    Fallback fallback = Fallback::WindowMean;
    EdgeMode edge_mode = EdgeMode::Primary;

    /// The layout with this spec's contrast ratio applied.
    PhantomLayout effective_layout() const;

    std::vector<std::string> violations() const;
    void validate() const;

    /// Keys: situations, filters, replications, master_seed, looks, window,
    /// contrast_ratio, fallback, edge_mode, and layout.<key> for every layout
    /// key except contrast_ratio. Missing keys keep their defaults.
    KeyValues to_key_values() const;
    static ExperimentSpec from_key_values(const KeyValues& kv);
};

std::string_view to_string(EdgeMode mode);
EdgeMode parse_edge_mode(std::string_view name);

struct ReplicationResult {
    int situation = 0;
    FilterMethod filter = FilterMethod::Lee;
    std::size_t replication = 0;
    std::uint64_t seed = 0;
    MetricRecord metrics;

    friend bool operator==(const ReplicationResult&, const ReplicationResult&) = default;
};

/// (situation, replication, filter) ascending.
bool canonical_less(const ReplicationResult& a, const ReplicationResult& b);
void sort_canonical(std::vector<ReplicationResult>& results);

using Cell = std::pair<int, std::size_t>;

/// Raised when any component fails inside run_experiment.
class ExperimentError : public std::runtime_error {
public:
    ExperimentError(int situation, std::size_t replication, std::optional<FilterMethod> filter,
                    const std::string& cause);

    int situation() const noexcept { return situation_; }
    std::size_t replication() const noexcept { return replication_; }
    std::optional<FilterMethod> filter() const noexcept { return filter_; }

private:
    int situation_;
    std::size_t replication_;
    std::optional<FilterMethod> filter_;
};

struct RunOptions {
    unsigned threads = 1;
    /// Cells already done; they are neither computed nor returned.
    std::set<Cell> skip;
    /// Receives the records of each finished cell, one call at a time.
    std::function<void(const std::vector<ReplicationResult>&)> sink;
    /// Sees the corrupted image handed to every filter of every cell.
    std::function<void(int situation, std::size_t replication, FilterMethod filter,
                       const Image& corrupted)>
        filter_input;
};

/// Corrupts each (situation, replication) cell once, filters it with every
/// requested filter and assesses each result against the situation's truth.
/// The returned list is in canonical order whatever the thread count.
std::vector<ReplicationResult> run_experiment(const ExperimentSpec& spec,
                                              const RunOptions& options = {});

struct BoxplotSummary {
    Metric metric = Metric::Enl;
    int situation = 0;
    FilterMethod filter = FilterMethod::Lee;
    std::size_t n = 0;
    double min = 0.0;
    double q1 = 0.0;
    double median = 0.0;
    double q3 = 0.0;
    double max = 0.0;
    std::vector<double> outliers;
};

struct Quartiles {
    double q1;
    double median;
    double q3;
};

/// Tukey hinges: q1 and q3 are the medians of the lower and upper halves,
/// the overall median excluded from both halves when n is odd.
Quartiles tukey_quartiles(std::vector<double> values);

/// Five-number summary of one group. Values beyond 1.5 IQR from the hinges
/// are outliers; min and max are taken over the remaining values.
/// Needs at least 5 values.
BoxplotSummary summarize_values(std::vector<double> values);

/// One summary per (situation, filter) group, in canonical order.
std::vector<BoxplotSummary> summarize(const std::vector<ReplicationResult>& results,
                                      Metric metric);

struct ConflictEntry {
    int situation = 0;
    Metric metric = Metric::Enl;
    std::size_t replications = 0;
    /// Fraction of replications each filter wins, in canonical filter order.
    std::vector<std::pair<FilterMethod, double>> win_fraction;
    /// True when no filter wins more than 80% of replications; empty when
    /// undefined (fewer than two replications or fewer than two filters).
    std::optional<bool> unstable;
};

/// Per situation and metric, which filter is best in each replication.
/// Ties go to the first filter in canonical order.
std::vector<ConflictEntry> conflict_report(const std::vector<ReplicationResult>& results);

}  // namespace speckle
