#include "speckle/phantom.hpp"

#include <algorithm>
#include <sstream>

#include "speckle/errors.hpp"

namespace speckle {

namespace {

std::string describe(const Rect& r) {
    std::ostringstream out;
    out << "cols " << r.col0 << "-" << r.col1 << " x rows " << r.row0 << "-" << r.row1;
    return out.str();
}

template <class T>
std::string join_list(const std::vector<T>& values) {
    std::ostringstream out;
    for (std::size_t i = 0; i < values.size(); ++i) out << (i ? "," : "") << values[i];
    return out.str();
}

std::vector<std::size_t> parse_size_list(const std::string& text, const std::string& key) {
    std::vector<std::size_t> out;
    for (const auto& item : split(text, ',')) {
        const long long v = parse_integer(item, key);
        if (v < 0) throw ValidationError(key + ": negative entry " + item);
        out.push_back(static_cast<std::size_t>(v));
    }
    return out;
}

}  // namespace

PhantomLayout PhantomLayout::canonical() {
    PhantomLayout layout;
    layout.strip_widths = {1, 3, 5, 7, 9, 11, 13};
    std::size_t column = 20;
    for (int w : layout.strip_widths) {
        layout.strip_columns.push_back(column);
        column += static_cast<std::size_t>(w) + 12;
    }
    for (std::size_t i = 0; i < 5; ++i) layout.point_columns.push_back(20 + 16 * i);
    layout.homogeneous_block = {160, 8, 248, 120};
    return layout;
}

bool PhantomLayout::is_feature(std::size_t col, std::size_t row) const {
    if (row >= strip_row_begin && row <= strip_row_end) {
        for (std::size_t i = 0; i < strip_widths.size() && i < strip_columns.size(); ++i) {
            const std::size_t c0 = strip_columns[i];
            if (col >= c0 && col < c0 + static_cast<std::size_t>(strip_widths[i])) return true;
        }
    }
    if (row == point_row) {
        return std::find(point_columns.begin(), point_columns.end(), col) != point_columns.end();
    }
    return false;
}

RoiRegistry PhantomLayout::rois() const {
    RoiRegistry reg;
    reg.homogeneous_block = homogeneous_block;
    bool have_line = false;
    for (std::size_t i = 0; i < strip_widths.size() && i < strip_columns.size(); ++i) {
        const std::size_t c = strip_columns[i];
        const auto w = static_cast<std::size_t>(strip_widths[i]);
        if (w == 1 && !have_line && c >= 1) {
            have_line = true;
            reg.line.line = {c, strip_row_begin, c, strip_row_end};
            reg.line.left = {c - 1, strip_row_begin, c - 1, strip_row_end};
            reg.line.right = {c + 1, strip_row_begin, c + 1, strip_row_end};
        }
        if (w >= edge_band_offset + edge_band_width && c >= edge_band_offset + edge_band_width) {
            EdgePair pair;
            pair.strip_width = strip_widths[i];
            pair.inside = {c + edge_band_offset, strip_row_begin,
                           c + edge_band_offset + edge_band_width - 1, strip_row_end};
            pair.outside = {c - edge_band_offset - edge_band_width, strip_row_begin,
                            c - edge_band_offset - 1, strip_row_end};
            if (reg.edges.empty() || pair.strip_width > reg.edges[reg.primary_edge].strip_width) {
                reg.primary_edge = reg.edges.size();
            }
            reg.edges.push_back(pair);
        }
    }
    return reg;
}

std::vector<std::string> PhantomLayout::violations() const {
    std::vector<std::string> v;
    if (width < 1 || height < 1) {
        v.push_back("image dimensions must be at least 1x1");
        return v;
    }
    if (!(background_mean > 0.0)) v.push_back("background_mean must be positive");
    if (!(contrast_ratio > 1.0)) v.push_back("contrast_ratio must exceed 1");
    if (strip_widths.size() != strip_columns.size()) {
        v.push_back("strip_widths and strip_columns must have the same length");
        return v;
    }
    if (strip_row_begin > strip_row_end || strip_row_end >= height) {
        v.push_back("strip rows " + std::to_string(strip_row_begin) + "-" +
                    std::to_string(strip_row_end) + " do not fit the image height");
    }
    for (std::size_t i = 0; i < strip_widths.size(); ++i) {
        if (strip_widths[i] < 1) {
            v.push_back("strip " + std::to_string(i) + " has nonpositive width");
            continue;
        }
        if (strip_columns[i] + static_cast<std::size_t>(strip_widths[i]) > width) {
            v.push_back("strip " + std::to_string(i) + " extends past the right border");
        }
        for (std::size_t j = 0; j < i; ++j) {
            if (strip_widths[j] < 1) continue;
            const std::size_t a0 = strip_columns[i];
            const std::size_t a1 = a0 + static_cast<std::size_t>(strip_widths[i]);
            const std::size_t b0 = strip_columns[j];
            const std::size_t b1 = b0 + static_cast<std::size_t>(strip_widths[j]);
            if (a0 <= b1 && b0 <= a1) {
                v.push_back("strips " + std::to_string(j) + " and " + std::to_string(i) +
                            " overlap or touch");
            }
        }
    }
    if (point_row >= height && !point_columns.empty()) v.push_back("point row outside the image");
    for (std::size_t i = 0; i < point_columns.size(); ++i) {
        const std::size_t c = point_columns[i];
        if (c >= width) {
            v.push_back("point " + std::to_string(i) + " outside the image");
            continue;
        }
        for (std::size_t j = 0; j < i; ++j) {
            const std::size_t d = point_columns[j];
            if (d + 1 >= c && c + 1 >= d) {
                v.push_back("points " + std::to_string(j) + " and " + std::to_string(i) +
                            " coincide or touch");
            }
        }
        if (point_row + 1 >= strip_row_begin && point_row <= strip_row_end + 1) {
            for (std::size_t s = 0; s < strip_widths.size(); ++s) {
                const std::size_t c0 = strip_columns[s];
                const std::size_t c1 = c0 + static_cast<std::size_t>(std::max(strip_widths[s], 1));
                if (c + 1 >= c0 && c <= c1) {
                    v.push_back("point " + std::to_string(i) + " touches strip " + std::to_string(s));
                }
            }
        }
    }
    if (!v.empty()) return v;

    const auto inside = [&](const Rect& r) {
        return r.col0 <= r.col1 && r.row0 <= r.row1 && r.col0 >= 1 && r.row0 >= 1 &&
               r.col1 + 2 <= width && r.row1 + 2 <= height;
    };
    const auto all = [&](const Rect& r, bool feature) {
        for (std::size_t row = r.row0; row <= r.row1; ++row)
            for (std::size_t col = r.col0; col <= r.col1; ++col)
                if (is_feature(col, row) != feature) return false;
        return true;
    };
    const auto check_roi = [&](const Rect& r, bool feature, const std::string& name) {
        if (!inside(r)) {
            v.push_back(name + " (" + describe(r) + ") is not strictly inside the image");
        } else if (!all(r, feature)) {
            v.push_back(name + " (" + describe(r) + ") must contain only " +
                        (feature ? "feature" : "background") + " pixels");
        }
    };

    check_roi(homogeneous_block, false, "homogeneous_block");
    const auto width_one = std::count(strip_widths.begin(), strip_widths.end(), 1);
    if (width_one != 1) {
        v.push_back("layout needs exactly one width-1 strip for the line measure, found " +
                    std::to_string(width_one));
    } else {
        const RoiRegistry reg = rois();
        if (reg.line.line.col0 < 1) {
            v.push_back("width-1 strip must not touch the left border");
        } else {
            check_roi(reg.line.line, true, "line column");
            check_roi(reg.line.left, false, "left line neighbour");
            check_roi(reg.line.right, false, "right line neighbour");
        }
        if (reg.edges.empty()) v.push_back("no strip is wide enough for the edge bands");
        for (const auto& e : reg.edges) {
            const std::string tag = "width-" + std::to_string(e.strip_width) + " strip ";
            check_roi(e.inside, true, tag + "inside edge band");
            check_roi(e.outside, false, tag + "outside edge band");
        }
    }
    return v;
}

void PhantomLayout::validate() const {
    auto v = violations();
    if (!v.empty()) throw ValidationError(std::move(v));
}

KeyValues PhantomLayout::to_key_values() const {
    KeyValues kv;
    kv.set("width", std::to_string(width));
    kv.set("height", std::to_string(height));
    kv.set("background_mean", format_real(background_mean));
    kv.set("contrast_ratio", format_real(contrast_ratio));
    kv.set("strip_widths", join_list(strip_widths));
    kv.set("strip_columns", join_list(strip_columns));
    kv.set("strip_rows", std::to_string(strip_row_begin) + "," + std::to_string(strip_row_end));
    kv.set("point_row", std::to_string(point_row));
    kv.set("point_columns", join_list(point_columns));
    const Rect& b = homogeneous_block;
    kv.set("homogeneous_block", join_list(std::vector<std::size_t>{b.col0, b.row0, b.col1, b.row1}));
    kv.set("edge_band_width", std::to_string(edge_band_width));
    kv.set("edge_band_offset", std::to_string(edge_band_offset));
    return kv;
}

PhantomLayout PhantomLayout::from_key_values(const KeyValues& kv) {
    static const std::vector<std::string> known = {
        "width",         "height",    "background_mean", "contrast_ratio",
        "strip_widths",  "strip_columns", "strip_rows",  "point_row",
        "point_columns", "homogeneous_block", "edge_band_width", "edge_band_offset"};
    std::vector<std::string> problems;
    for (const auto& [key, value] : kv.entries()) {
        if (std::find(known.begin(), known.end(), key) == known.end()) {
            problems.push_back("unknown layout key '" + key + "'");
        }
    }
    if (!problems.empty()) throw ValidationError(problems);

    PhantomLayout layout = canonical();
    const auto size_of = [&](const std::string& key, std::size_t& target) {
        if (!kv.contains(key)) return;
        const long long v = parse_integer(kv.get(key), key);
        if (v < 0) throw ValidationError(key + " must be nonnegative");
        target = static_cast<std::size_t>(v);
    };
    size_of("width", layout.width);
    size_of("height", layout.height);
    if (kv.contains("background_mean"))
        layout.background_mean = parse_real(kv.get("background_mean"), "background_mean");
    if (kv.contains("contrast_ratio"))
        layout.contrast_ratio = parse_real(kv.get("contrast_ratio"), "contrast_ratio");
    if (kv.contains("strip_widths")) {
        layout.strip_widths.clear();
        for (const auto& item : split(kv.get("strip_widths"), ','))
            layout.strip_widths.push_back(static_cast<int>(parse_integer(item, "strip_widths")));
    }
    if (kv.contains("strip_columns"))
        layout.strip_columns = parse_size_list(kv.get("strip_columns"), "strip_columns");
    if (kv.contains("strip_rows")) {
        const auto rows = parse_size_list(kv.get("strip_rows"), "strip_rows");
        if (rows.size() != 2) throw ValidationError("strip_rows needs two entries: begin,end");
        layout.strip_row_begin = rows[0];
        layout.strip_row_end = rows[1];
    }
    size_of("point_row", layout.point_row);
    if (kv.contains("point_columns"))
        layout.point_columns = parse_size_list(kv.get("point_columns"), "point_columns");
    if (kv.contains("homogeneous_block")) {
        const auto b = parse_size_list(kv.get("homogeneous_block"), "homogeneous_block");
        if (b.size() != 4) throw ValidationError("homogeneous_block needs col0,row0,col1,row1");
        layout.homogeneous_block = {b[0], b[1], b[2], b[3]};
    }
    size_of("edge_band_width", layout.edge_band_width);
    size_of("edge_band_offset", layout.edge_band_offset);
    return layout;
}

Image build_phantom(const PhantomLayout& layout) {
    layout.validate();
    Image img(layout.width, layout.height, layout.background_mean);
    const double fg = layout.feature_mean();
    for (std::size_t r = 0; r < layout.height; ++r)
        for (std::size_t c = 0; c < layout.width; ++c)
            if (layout.is_feature(c, r)) img(c, r) = fg;
    return img;
}

double situation_background_mean(int id, const PhantomLayout& layout) {
    if (id == 0) return layout.background_mean;
    for (const auto& row : kSituationTable)
        if (row.id == id) return row.background_mean;
    throw ValidationError("situation id must be in 0..6, got " + std::to_string(id));
}

Situation make_situation(int id, const PhantomLayout& layout, Looks looks) {
    if (id == 0) {
        return {0, ReturnModel::constant(layout.background_mean, looks.value()),
                ReturnModel::constant(layout.feature_mean(), looks.value())};
    }
    for (const auto& row : kSituationTable) {
        if (row.id == id) {
            return {id, ReturnModel::g0(row.alpha, row.gamma, looks.value()),
                    ReturnModel::g0(row.alpha, row.gamma * layout.contrast_ratio, looks.value())};
        }
    }
    throw ValidationError("situation id must be in 0..6, got " + std::to_string(id));
}

Image situation_truth(int id, const PhantomLayout& layout) {
    PhantomLayout scaled = layout;
    scaled.background_mean = situation_background_mean(id, layout);
    return build_phantom(scaled);
}

Image corrupt(const PhantomLayout& layout, const Situation& situation, Rng& rng) {
    layout.validate();
    Rng background = rng.split();
    Rng foreground = rng.split();
    std::vector<double> pixels(layout.width * layout.height);
    for (std::size_t r = 0; r < layout.height; ++r) {
        for (std::size_t c = 0; c < layout.width; ++c) {
            pixels[r * layout.width + c] =
                layout.is_feature(c, r) ? sample_one(foreground, situation.foreground)
                                        : sample_one(background, situation.background);
        }
    }
    return Image(layout.width, layout.height, std::move(pixels));
}

}  // namespace speckle
