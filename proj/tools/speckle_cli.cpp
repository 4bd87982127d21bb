// speckle: phantom generation, corruption, filtering, assessment and Monte
// Carlo runs from the command line.
//
// Exit codes: 0 success, 1 runtime error, 2 validation error.

#include <CLI11.hpp>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "speckle/errors.hpp"
#include "speckle/filters.hpp"
#include "speckle/io.hpp"
#include "speckle/metrics.hpp"
#include "speckle/montecarlo.hpp"
#include "speckle/phantom.hpp"
#include "speckle/report.hpp"

namespace fs = std::filesystem;
using namespace speckle;

namespace {

constexpr int kExitRuntime = 1;
constexpr int kExitValidation = 2;
constexpr const char* kVersion = "1.0.0";

/// Sidecar next to an artifact: "<artifact>.prov", a key=value file that
/// records every resolved option.
fs::path sidecar_path(const fs::path& artifact) {
    return fs::path(artifact.string() + ".prov");
}

/// `notes` are written as comments, so the sidecar of `mc` stays a valid spec file.
void write_sidecar(const fs::path& artifact, const std::string& command, const KeyValues& kv,
                   const KeyValues& notes = {}) {
    std::ofstream out(sidecar_path(artifact), std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + sidecar_path(artifact).string());
    out << "# speckle " << kVersion << ' ' << command << '\n';
    for (const auto& [key, value] : notes.entries()) out << "# " << key << '=' << value << '\n';
    kv.write(out);
    if (!out) throw std::runtime_error("write failed: " + sidecar_path(artifact).string());
}

void write_image(const Image& image, const fs::path& out, const std::optional<fs::path>& pgm,
                 KeyValues& prov) {
    write_fimg(image, out);
    prov.set("output", out.string());
    prov.set("output_fnv1a", hex64(file_digest(out)));
    if (pgm) {
        const PgmQuantization q = write_pgm16(image, *pgm);
        prov.set("pgm", pgm->string());
        prov.set("pgm_low", format_real(q.low));
        prov.set("pgm_high", format_real(q.high));
    }
}

PhantomLayout load_layout(const std::optional<fs::path>& path) {
    if (!path) return PhantomLayout::canonical();
    return PhantomLayout::from_key_values(KeyValues::read(*path));
}

void record_layout(KeyValues& prov, const std::optional<fs::path>& path,
                   const PhantomLayout& layout) {
    prov.set("layout_file", path ? path->string() : "");
    const KeyValues kv = layout.to_key_values();
    for (const auto& [key, value] : kv.entries()) prov.set("layout." + key, value);
}

void record_input(KeyValues& prov, const std::string& key, const fs::path& path) {
    prov.set(key, path.string());
    prov.set(key + "_fnv1a", hex64(file_digest(path)));
}

// ---- phantom / corrupt / filter / assess ---------------------------------

struct PhantomArgs {
    std::optional<fs::path> layout;
    fs::path out;
    std::optional<fs::path> pgm;
};

int cmd_phantom(const PhantomArgs& a) {
    const PhantomLayout layout = load_layout(a.layout);
    KeyValues prov;
    record_layout(prov, a.layout, layout);
    write_image(build_phantom(layout), a.out, a.pgm, prov);
    write_sidecar(a.out, "phantom", prov);
    return 0;
}

struct CorruptArgs {
    std::optional<fs::path> layout;
    int situation = 0;
    double looks = 1.0;
    std::uint64_t seed = 0;
    fs::path out;
    std::optional<fs::path> truth;
    std::optional<fs::path> pgm;
};

int cmd_corrupt(const CorruptArgs& a) {
    const PhantomLayout layout = load_layout(a.layout);
    layout.validate();
    const Situation situation = make_situation(a.situation, layout, Looks(a.looks));
    Rng rng(a.seed);
    const Image noisy = corrupt(layout, situation, rng);

    KeyValues prov;
    record_layout(prov, a.layout, layout);
    prov.set("situation", std::to_string(a.situation));
    prov.set("looks", format_real(a.looks));
    prov.set("seed", std::to_string(a.seed));
    prov.set("background", situation.background.describe());
    prov.set("foreground", situation.foreground.describe());
    if (a.truth) {
        const Image truth = situation_truth(a.situation, layout);
        write_fimg(truth, *a.truth);
        prov.set("truth", a.truth->string());
        prov.set("truth_fnv1a", hex64(file_digest(*a.truth)));
    }
    write_image(noisy, a.out, a.pgm, prov);
    write_sidecar(a.out, "corrupt", prov);
    return 0;
}

struct FilterArgs {
    fs::path in;
    fs::path out;
    std::string method = "lee";
    int window = 7;
    double looks = 1.0;
    std::string fallback = "window_mean";
    std::optional<fs::path> pgm;
};

int cmd_filter(const FilterArgs& a) {
    const FilterSpec spec{parse_filter_method(a.method), a.window, Looks(a.looks),
                          parse_fallback(a.fallback)};
    const Image in = read_fimg(a.in);
    const Image out = apply_filter(in, spec);

    KeyValues prov;
    record_input(prov, "input", a.in);
    prov.set("method", std::string(to_string(spec.method)));
    prov.set("window", std::to_string(spec.window));
    prov.set("looks", format_real(spec.looks.value()));
    prov.set("fallback", std::string(to_string(spec.fallback)));
    write_image(out, a.out, a.pgm, prov);
    write_sidecar(a.out, "filter", prov);
    return 0;
}

struct AssessArgs {
    fs::path in;
    fs::path truth;
    std::optional<fs::path> layout;
    std::string edge_mode = "primary";
    fs::path out;
};

int cmd_assess(const AssessArgs& a) {
    const PhantomLayout layout = load_layout(a.layout);
    layout.validate();
    const EdgeMode mode = parse_edge_mode(a.edge_mode);
    const MetricRecord rec = assess(read_fimg(a.in), layout, read_fimg(a.truth), mode);

    std::ofstream out(a.out, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + a.out.string());
    out << "enl,line_pres,edge_gradient,edge_variance\n"
        << format_real(rec.enl) << ',' << format_real(rec.line_preservation) << ','
        << format_real(rec.edge_gradient) << ',' << format_real(rec.edge_variance) << '\n';
    out.close();

    KeyValues prov;
    record_input(prov, "input", a.in);
    record_input(prov, "truth", a.truth);
    record_layout(prov, a.layout, layout);
    prov.set("edge_mode", std::string(to_string(mode)));
    prov.set("output", a.out.string());
    write_sidecar(a.out, "assess", prov);
    return 0;
}

// ---- mc / report ----------------------------------------------------------

fs::path with_suffix(const fs::path& out, const std::string& suffix) {
    return out.parent_path() / (out.stem().string() + suffix);
}

void write_text_atomically(const fs::path& path, const std::string& text) {
    const fs::path tmp = fs::path(path.string() + ".tmp");
    {
        std::ofstream out(tmp, std::ios::binary);
        if (!out) throw std::runtime_error("cannot write " + tmp.string());
        out << text;
        if (!out.flush()) throw std::runtime_error("write failed: " + tmp.string());
    }
    fs::rename(tmp, path);
}

/// Summary CSV, conflict CSV and one SVG per metric next to `results_path`.
/// Returns the written paths.
std::vector<fs::path> write_reports(const std::vector<ReplicationResult>& results,
                                    const fs::path& results_path) {
    std::vector<fs::path> written;
    std::vector<BoxplotSummary> all;
    for (Metric m : kAllMetrics) {
        const auto s = summarize(results, m);
        all.insert(all.end(), s.begin(), s.end());
    }
    std::ostringstream summary;
    write_summary_csv(summary, all);
    written.push_back(with_suffix(results_path, "_summary.csv"));
    write_text_atomically(written.back(), summary.str());

    std::ostringstream conflicts;
    write_conflict_csv(conflicts, conflict_report(results));
    written.push_back(with_suffix(results_path, "_conflicts.csv"));
    write_text_atomically(written.back(), conflicts.str());

    for (Metric m : kAllMetrics) {
        std::ostringstream svg;
        write_boxplot_svg(svg, m, all);
        written.push_back(with_suffix(results_path, "_" + std::string(to_string(m)) + ".svg"));
        write_text_atomically(written.back(), svg.str());
    }
    return written;
}

struct McArgs {
    std::optional<fs::path> spec;
    fs::path out;
    unsigned threads = 1;
    bool resume = false;
    std::optional<std::size_t> replications;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> situations;
    std::optional<std::string> filters;
    std::size_t abort_after = 0;
};

ExperimentSpec resolve_spec(const McArgs& a) {
    KeyValues kv;
    if (a.spec) kv = KeyValues::read(*a.spec);
    if (a.replications) kv.set("replications", std::to_string(*a.replications));
    if (a.seed) kv.set("master_seed", std::to_string(*a.seed));
    if (a.situations) kv.set("situations", *a.situations);
    if (a.filters) kv.set("filters", *a.filters);
    return ExperimentSpec::from_key_values(kv);
}

std::string spec_text(const ExperimentSpec& spec) {
    std::ostringstream out;
    spec.to_key_values().write(out);
    return out.str();
}

/// Records of complete cells (every filter present, seed as derived) from a
/// partial results file; anything else is dropped.
std::vector<ReplicationResult> completed_cells(const std::vector<ReplicationResult>& records,
                                               const ExperimentSpec& spec) {
    const std::set<int> situations(spec.situations.begin(), spec.situations.end());
    const std::set<FilterMethod> filters(spec.filters.begin(), spec.filters.end());
    std::map<Cell, std::map<FilterMethod, ReplicationResult>> cells;
    for (const auto& r : records) {
        if (!situations.contains(r.situation) || !filters.contains(r.filter) ||
            r.replication >= spec.replications ||
            r.seed != derive_seed(spec.master_seed, r.situation, r.replication)) {
            throw ValidationError("partial results do not belong to this experiment (situation " +
                                  std::to_string(r.situation) + ", replication " +
                                  std::to_string(r.replication) + ")");
        }
        cells[{r.situation, r.replication}][r.filter] = r;
    }
    std::vector<ReplicationResult> out;
    for (const auto& [cell, by_filter] : cells) {
        if (by_filter.size() != filters.size()) continue;
        for (const auto& [f, r] : by_filter) out.push_back(r);
    }
    sort_canonical(out);
    return out;
}

int cmd_mc(const McArgs& a) {
    const ExperimentSpec spec = resolve_spec(a);
    const fs::path partial = fs::path(a.out.string() + ".partial");
    const fs::path partial_spec = fs::path(a.out.string() + ".partial.spec");
    const std::string resolved = spec_text(spec);

    std::vector<ReplicationResult> done;
    if (fs::exists(partial)) {
        if (!a.resume) {
            throw ValidationError("partial results " + partial.string() +
                                  " exist; pass --resume to continue them or delete the file");
        }
        std::ifstream saved(partial_spec, std::ios::binary);
        std::stringstream saved_text;
        saved_text << saved.rdbuf();
        if (!saved || saved_text.str() != resolved) {
            throw ValidationError("partial results " + partial.string() +
                                  " were produced by a different experiment spec");
        }
        done = completed_cells(read_results_csv(partial, true).records, spec);
    } else {
        std::ofstream out(partial_spec, std::ios::binary);
        out << resolved;
        if (!out.flush()) throw std::runtime_error("cannot write " + partial_spec.string());
    }

    // Rewrite the partial file with whole cells only, then append as cells finish.
    {
        std::ostringstream text;
        write_results_csv(text, done);
        write_text_atomically(partial, text.str());
    }
    std::ofstream append(partial, std::ios::binary | std::ios::app);
    if (!append) throw std::runtime_error("cannot append to " + partial.string());

    RunOptions options;
    options.threads = a.threads;
    for (const auto& r : done) options.skip.insert({r.situation, r.replication});
    std::size_t finished = 0;
    options.sink = [&](const std::vector<ReplicationResult>& batch) {
        for (const auto& r : batch) append << results_csv_row(r) << '\n';
        append.flush();
        if (!append) throw std::runtime_error("write failed: " + partial.string());
        if (a.abort_after > 0 && ++finished >= a.abort_after) {
            std::fprintf(stderr, "speckle mc: aborting after %zu cells as requested\n", finished);
            std::_Exit(kExitRuntime);
        }
    };
    auto results = run_experiment(spec, options);
    append.close();
    results.insert(results.end(), done.begin(), done.end());
    sort_canonical(results);

    std::ostringstream text;
    write_results_csv(text, results);
    write_text_atomically(a.out, text.str());

    KeyValues notes;
    notes.set("threads", std::to_string(a.threads));
    notes.set("resumed_cells", std::to_string(done.size() / spec.filters.size()));
    notes.set("output_fnv1a", hex64(file_digest(a.out)));
    if (spec.replications >= 5) {
        const auto written = write_reports(results, a.out);
        for (std::size_t i = 0; i < written.size(); ++i)
            notes.set("report_" + std::to_string(i), written[i].string());
    } else {
        std::fprintf(stderr,
                     "speckle mc: boxplot summaries need at least 5 replications; skipped\n");
    }
    write_sidecar(a.out, "mc", spec.to_key_values(), notes);
    fs::remove(partial);
    fs::remove(partial_spec);
    return 0;
}

struct ReportArgs {
    fs::path results;
};

int cmd_report(const ReportArgs& a) {
    auto results = read_results_csv(a.results).records;
    sort_canonical(results);
    const auto written = write_reports(results, a.results);
    KeyValues prov;
    record_input(prov, "results", a.results);
    for (std::size_t i = 0; i < written.size(); ++i)
        prov.set("report_" + std::to_string(i), written[i].string());
    write_sidecar(with_suffix(a.results, "_report"), "report", prov);
    return 0;
}

void report_validation(const ValidationError& e) {
    std::fprintf(stderr, "speckle: validation failed\n");
    for (const auto& v : e.violations()) std::fprintf(stderr, "  - %s\n", v.c_str());
}

}  // namespace

int main(int argc, char** argv) {
    const CLI::Range kLooksRange(1.0, std::numeric_limits<double>::max(), "LOOKS >= 1");
    CLI::App app{"Speckle simulation, despeckling filters and Monte Carlo filter assessment"};
    app.set_version_flag("--version", kVersion);
    app.require_subcommand(1);

    PhantomArgs phantom;
    auto* sp = app.add_subcommand("phantom", "Write the noiseless phantom image");
    sp->add_option("--layout", phantom.layout, "Layout key=value file (default: canonical)")
        ->check(CLI::ExistingFile);
    sp->add_option("-o,--out", phantom.out, "Output FIMG file")->required();
    sp->add_option("--pgm", phantom.pgm, "Also export a 16-bit PGM");

    CorruptArgs corrupt_args;
    auto* sc = app.add_subcommand("corrupt", "Simulate a speckled image of one situation");
    sc->add_option("--layout", corrupt_args.layout, "Layout key=value file")
        ->check(CLI::ExistingFile);
    sc->add_option("--situation", corrupt_args.situation, "Situation 0-6")
        ->required()
        ->check(CLI::Range(0, 6));
    sc->add_option("--looks", corrupt_args.looks, "Number of looks")->capture_default_str()->check(kLooksRange);
    sc->add_option("--seed", corrupt_args.seed, "Random seed")->required();
    sc->add_option("-o,--out", corrupt_args.out, "Output FIMG file")->required();
    sc->add_option("--truth", corrupt_args.truth, "Also write the situation's truth image");
    sc->add_option("--pgm", corrupt_args.pgm, "Also export a 16-bit PGM");

    FilterArgs filter_args;
    auto* sf = app.add_subcommand("filter", "Despeckle an image");
    sf->add_option("-i,--in", filter_args.in, "Input FIMG file")
        ->required()
        ->check(CLI::ExistingFile);
    sf->add_option("-o,--out", filter_args.out, "Output FIMG file")->required();
    sf->add_option("--method", filter_args.method, "lee, mapg0 or mapgh")->capture_default_str();
    sf->add_option("--window", filter_args.window, "Odd window side")->capture_default_str();
    sf->add_option("--looks", filter_args.looks, "Number of looks")->capture_default_str()->check(kLooksRange);
    sf->add_option("--fallback", filter_args.fallback, "window_mean or identity")
        ->capture_default_str();
    sf->add_option("--pgm", filter_args.pgm, "Also export a 16-bit PGM");

    AssessArgs assess_args;
    auto* sa = app.add_subcommand("assess", "Quality measures of a filtered image");
    sa->add_option("-i,--in", assess_args.in, "Filtered FIMG file")
        ->required()
        ->check(CLI::ExistingFile);
    sa->add_option("--truth", assess_args.truth, "Truth FIMG file")
        ->required()
        ->check(CLI::ExistingFile);
    sa->add_option("--layout", assess_args.layout, "Layout key=value file")
        ->check(CLI::ExistingFile);
    sa->add_option("--edge-mode", assess_args.edge_mode, "primary or aggregate")
        ->capture_default_str();
    sa->add_option("-o,--out", assess_args.out, "Output CSV file")->required();

    McArgs mc;
    auto* sm = app.add_subcommand("mc", "Run a Monte Carlo experiment");
    sm->add_option("--spec", mc.spec, "Experiment key=value file (default: full experiment)")
        ->check(CLI::ExistingFile);
    sm->add_option("-o,--out", mc.out, "Results CSV")->required();
    sm->add_option("--threads", mc.threads, "Worker threads")
        ->capture_default_str()
        ->check(CLI::Range(1u, 1024u));
    sm->add_flag("--resume", mc.resume, "Continue from <out>.partial");
    sm->add_option("--replications", mc.replications, "Override the replication count");
    sm->add_option("--seed", mc.seed, "Override the master seed");
    sm->add_option("--situations", mc.situations, "Override situations, e.g. 0,1,2");
    sm->add_option("--filters", mc.filters, "Override filters, e.g. lee,mapg0");
    sm->add_option("--abort-after", mc.abort_after,
                   "Testing aid: exit abruptly after this many cells");

    ReportArgs report;
    auto* sr = app.add_subcommand("report", "Summaries and boxplots from a results CSV");
    sr->add_option("results", report.results, "Results CSV")
        ->required()
        ->check(CLI::ExistingFile);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitValidation;
    }

    try {
        if (*sp) return cmd_phantom(phantom);
        if (*sc) return cmd_corrupt(corrupt_args);
        if (*sf) return cmd_filter(filter_args);
        if (*sa) return cmd_assess(assess_args);
        if (*sm) return cmd_mc(mc);
        if (*sr) return cmd_report(report);
    } catch (const ValidationError& e) {
        report_validation(e);
        return kExitValidation;
    } catch (const ExperimentError& e) {
        std::fprintf(stderr, "speckle: %s\n", e.what());
        return kExitRuntime;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "speckle: %s\n", e.what());
        return kExitRuntime;
    }
    return kExitRuntime;
}
