#include "speckle/report.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <tuple>

#include "speckle/errors.hpp"

namespace speckle {

namespace {

constexpr const char* kResultsHeader =
    "situation,filter,replication,seed,enl,line_pres,edge_gradient,edge_variance";

std::uint64_t parse_u64(const std::string& text, const std::string& what) {
    std::uint64_t v = 0;
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (text.empty() || ec != std::errc{} || ptr != text.data() + text.size()) {
        throw ValidationError(what + ": '" + text + "' is not an unsigned integer");
    }
    return v;
}

std::string svg_number(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    return buf;
}

std::string tick_label(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.4g", v);
    return buf;
}

std::string xml_escape(const std::string& s) {
    std::string out;
    for (char c : s) {
        switch (c) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '"': out += "&quot;"; break;
            default: out += c;
        }
    }
    return out;
}

}  // namespace

std::string results_csv_header() { return kResultsHeader; }

std::string results_csv_row(const ReplicationResult& r) {
    return std::to_string(r.situation) + ',' + csv_field(std::string(to_string(r.filter))) + ',' +
           std::to_string(r.replication) + ',' + std::to_string(r.seed) + ',' +
           format_real(r.metrics.enl) + ',' + format_real(r.metrics.line_preservation) + ',' +
           format_real(r.metrics.edge_gradient) + ',' + format_real(r.metrics.edge_variance);
}

void write_results_csv(std::ostream& out, const std::vector<ReplicationResult>& results) {
    out << kResultsHeader << '\n';
    for (const auto& r : results) out << results_csv_row(r) << '\n';
}

ParsedResults read_results_csv(std::istream& in, bool allow_truncated_tail) {
    ParsedResults parsed;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const bool terminated = !in.eof();
        if (!terminated && allow_truncated_tail) {
            parsed.truncated_tail = !line.empty();
            break;
        }
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line_no == 1) {
            if (line != kResultsHeader) {
                throw ValidationError("results CSV: unexpected header '" + line + "'");
            }
            continue;
        }
        if (line.empty()) continue;
        const auto fields = parse_csv_record(line);
        const std::string where = "results CSV line " + std::to_string(line_no);
        if (fields.size() != 8) {
            throw ValidationError(where + ": expected 8 fields, got " +
                                  std::to_string(fields.size()));
        }
        ReplicationResult r;
        r.situation = static_cast<int>(parse_integer(fields[0], where + " situation"));
        r.filter = parse_filter_method(fields[1]);
        r.replication = static_cast<std::size_t>(parse_u64(fields[2], where + " replication"));
        r.seed = parse_u64(fields[3], where + " seed");
        r.metrics.enl = parse_real(fields[4], where + " enl");
        r.metrics.line_preservation = parse_real(fields[5], where + " line_pres");
        r.metrics.edge_gradient = parse_real(fields[6], where + " edge_gradient");
        r.metrics.edge_variance = parse_real(fields[7], where + " edge_variance");
        parsed.records.push_back(r);
    }
    if (line_no == 0 && !allow_truncated_tail) throw ValidationError("results CSV is empty");
    return parsed;
}

ParsedResults read_results_csv(const std::filesystem::path& path, bool allow_truncated_tail) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path.string());
    return read_results_csv(in, allow_truncated_tail);
}

void write_summary_csv(std::ostream& out, const std::vector<BoxplotSummary>& summaries) {
    out << "situation,filter,metric,min,q1,median,q3,max,n_outliers\n";
    for (const auto& b : summaries) {
        out << b.situation << ',' << csv_field(std::string(to_string(b.filter))) << ','
            << csv_field(std::string(to_string(b.metric))) << ',' << format_real(b.min) << ','
            << format_real(b.q1) << ',' << format_real(b.median) << ',' << format_real(b.q3)
            << ',' << format_real(b.max) << ',' << b.outliers.size() << '\n';
    }
}

void write_conflict_csv(std::ostream& out, const std::vector<ConflictEntry>& entries) {
    out << "situation,metric,filter,win_fraction,unstable\n";
    for (const auto& e : entries) {
        const std::string unstable = e.unstable ? (*e.unstable ? "yes" : "no") : "undefined";
        for (const auto& [filter, fraction] : e.win_fraction) {
            out << e.situation << ',' << to_string(e.metric) << ',' << to_string(filter) << ','
                << format_real(fraction) << ',' << unstable << '\n';
        }
    }
}

char filter_letter(FilterMethod method) {
    switch (method) {
        case FilterMethod::Lee: return 'L';
        case FilterMethod::MapG0: return 'G';
        case FilterMethod::MapGH: return 'H';
    }
    return '?';
}

void write_boxplot_svg(std::ostream& out, Metric metric,
                       const std::vector<BoxplotSummary>& summaries) {
    constexpr double kSlot = 34.0;
    constexpr double kBox = 20.0;
    constexpr double kLeft = 70.0;
    constexpr double kRight = 20.0;
    constexpr double kTop = 40.0;
    constexpr double kPlot = 320.0;
    constexpr double kBottom = 50.0;

    std::vector<const BoxplotSummary*> boxes;
    for (const auto& b : summaries)
        if (b.metric == metric) boxes.push_back(&b);
    std::stable_sort(boxes.begin(), boxes.end(), [](const auto* a, const auto* b) {
        return std::tie(a->situation, a->filter) < std::tie(b->situation, b->filter);
    });

    double lo = INFINITY;
    double hi = -INFINITY;
    for (const auto* b : boxes) {
        lo = std::min(lo, b->min);
        hi = std::max(hi, b->max);
        for (double v : b->outliers) {
            if (!std::isfinite(v)) continue;
            lo = std::min(lo, v);
            hi = std::max(hi, v);
        }
    }
    if (!std::isfinite(lo) || !std::isfinite(hi)) {
        lo = 0.0;
        hi = 1.0;
    }
    if (hi <= lo) {
        const double pad = lo == 0.0 ? 1.0 : 0.05 * std::abs(lo);
        lo -= pad;
        hi += pad;
    }
    const double span = hi - lo;
    lo -= 0.04 * span;
    hi += 0.04 * span;

    const double width = kLeft + kRight + kSlot * static_cast<double>(std::max<std::size_t>(boxes.size(), 1));
    const double height = kTop + kPlot + kBottom;
    const auto y = [&](double v) {
        const double clamped = std::clamp(v, lo, hi);
        return kTop + kPlot * (hi - clamped) / (hi - lo);
    };

    const std::string name(to_string(metric));
    out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
        << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << svg_number(width)
        << "\" height=\"" << svg_number(height) << "\" viewBox=\"0 0 " << svg_number(width) << ' '
        << svg_number(height) << "\" font-family=\"sans-serif\" font-size=\"11\">\n"
        << "<title>" << xml_escape(name) << "</title>\n"
        << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
        << "<text x=\"" << svg_number(width / 2) << "\" y=\"22\" text-anchor=\"middle\" font-size=\"14\">"
        << xml_escape(name) << "</text>\n";

    // axes and ticks
    out << "<line x1=\"" << kLeft << "\" y1=\"" << kTop << "\" x2=\"" << kLeft << "\" y2=\""
        << kTop + kPlot << "\" stroke=\"black\"/>\n"
        << "<line x1=\"" << kLeft << "\" y1=\"" << kTop + kPlot << "\" x2=\""
        << svg_number(width - kRight) << "\" y2=\"" << kTop + kPlot << "\" stroke=\"black\"/>\n";
    constexpr int kTicks = 5;
    for (int i = 0; i <= kTicks; ++i) {
        const double v = lo + (hi - lo) * i / kTicks;
        const std::string ty = svg_number(y(v));
        out << "<line x1=\"" << kLeft - 4 << "\" y1=\"" << ty << "\" x2=\"" << kLeft << "\" y2=\""
            << ty << "\" stroke=\"black\"/>\n"
            << "<text x=\"" << kLeft - 6 << "\" y=\"" << ty
            << "\" text-anchor=\"end\" dominant-baseline=\"middle\">" << tick_label(v)
            << "</text>\n";
    }

    for (std::size_t i = 0; i < boxes.size(); ++i) {
        const BoxplotSummary& b = *boxes[i];
        const double cx = kLeft + kSlot * (static_cast<double>(i) + 0.5);
        const std::string x0 = svg_number(cx - kBox / 2);
        const std::string x1 = svg_number(cx + kBox / 2);
        const std::string xc = svg_number(cx);
        out << "<g>\n"
            << "<line x1=\"" << xc << "\" y1=\"" << svg_number(y(b.max)) << "\" x2=\"" << xc
            << "\" y2=\"" << svg_number(y(b.q3)) << "\" stroke=\"black\"/>\n"
            << "<line x1=\"" << xc << "\" y1=\"" << svg_number(y(b.q1)) << "\" x2=\"" << xc
            << "\" y2=\"" << svg_number(y(b.min)) << "\" stroke=\"black\"/>\n"
            << "<line x1=\"" << svg_number(cx - kBox / 4) << "\" y1=\"" << svg_number(y(b.max))
            << "\" x2=\"" << svg_number(cx + kBox / 4) << "\" y2=\"" << svg_number(y(b.max))
            << "\" stroke=\"black\"/>\n"
            << "<line x1=\"" << svg_number(cx - kBox / 4) << "\" y1=\"" << svg_number(y(b.min))
            << "\" x2=\"" << svg_number(cx + kBox / 4) << "\" y2=\"" << svg_number(y(b.min))
            << "\" stroke=\"black\"/>\n"
            << "<rect x=\"" << x0 << "\" y=\"" << svg_number(y(b.q3)) << "\" width=\"" << kBox
            << "\" height=\"" << svg_number(std::max(y(b.q1) - y(b.q3), 0.5))
            << "\" fill=\"#dde6f0\" stroke=\"black\"/>\n"
            << "<line x1=\"" << x0 << "\" y1=\"" << svg_number(y(b.median)) << "\" x2=\"" << x1
            << "\" y2=\"" << svg_number(y(b.median)) << "\" stroke=\"black\" stroke-width=\"2\"/>\n";
        for (double v : b.outliers) {
            out << "<circle cx=\"" << xc << "\" cy=\"" << svg_number(y(v))
                << "\" r=\"2\" fill=\"none\" stroke=\"black\"/>\n";
        }
        out << "<text x=\"" << xc << "\" y=\"" << svg_number(kTop + kPlot + 16)
            << "\" text-anchor=\"middle\">" << filter_letter(b.filter) << b.situation
            << "</text>\n"
            << "</g>\n";
    }
    out << "</svg>\n";
}

}  // namespace speckle
