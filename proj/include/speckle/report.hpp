#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "speckle/montecarlo.hpp"

namespace speckle {

/// situation,filter,replication,seed,enl,line_pres,edge_gradient,edge_variance
std::string results_csv_header();
/// Reals are written with 17 significant digits, so rows round-trip exactly.
std::string results_csv_row(const ReplicationResult& record);
void write_results_csv(std::ostream& out, const std::vector<ReplicationResult>& results);

struct ParsedResults {
    std::vector<ReplicationResult> records;
    /// True when the last line had no terminating newline and was dropped.
    bool truncated_tail = false;
};

/// Reads a results CSV. With `allow_truncated_tail`, an unterminated final
/// line (a write cut short) is dropped instead of rejected.
ParsedResults read_results_csv(std::istream& in, bool allow_truncated_tail = false);
ParsedResults read_results_csv(const std::filesystem::path& path,
                               bool allow_truncated_tail = false);

/// situation,filter,metric,min,q1,median,q3,max,n_outliers
void write_summary_csv(std::ostream& out, const std::vector<BoxplotSummary>& summaries);

/// situation,metric,filter,win_fraction,unstable (unstable: yes, no or undefined)
void write_conflict_csv(std::ostream& out, const std::vector<ConflictEntry>& entries);

/// Standalone SVG with one box per (situation, filter) group of one metric,
/// labelled L, G or H followed by the situation digit.
void write_boxplot_svg(std::ostream& out, Metric metric,
                       const std::vector<BoxplotSummary>& summaries);

/// Single-letter label used on boxplot axes: L, G or H.
char filter_letter(FilterMethod method);

}  // namespace speckle
