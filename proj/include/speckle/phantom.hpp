#pragma once

#include <array>
#include <cstddef>
#include <string>
#include <vector>

#include "speckle/distributions.hpp"
#include "speckle/image.hpp"
#include "speckle/io.hpp"
#include "speckle/rng.hpp"

namespace speckle {

/// Inclusive pixel rectangle.
struct Rect {
    std::size_t col0 = 0;
    std::size_t row0 = 0;
    std::size_t col1 = 0;
    std::size_t row1 = 0;

    std::size_t width() const { return col1 - col0 + 1; }
    std::size_t height() const { return row1 - row0 + 1; }
    std::size_t area() const { return width() * height(); }
    bool contains(std::size_t col, std::size_t row) const {
        return col >= col0 && col <= col1 && row >= row0 && row <= row1;
    }

    friend bool operator==(const Rect&, const Rect&) = default;
};

/// The width-1 strip column and its two neighbours.
struct LineTriple {
    Rect line;
    Rect left;
    Rect right;
};

/// Bands on either side of one strip's left edge.
struct EdgePair {
    int strip_width = 0;
    Rect inside;
    Rect outside;
};

struct RoiRegistry {
    Rect homogeneous_block;
    LineTriple line;
    /// One pair per strip wide enough to hold an inside band, in layout order.
    std::vector<EdgePair> edges;
    /// Index into `edges` of the widest strip, the default measured edge.
    std::size_t primary_edge = 0;
};

/// Binary phantom geometry: vertical strips and isolated points on a
/// constant background, plus the regions the quality measures read.
struct PhantomLayout {
    std::size_t width = 256;
    std::size_t height = 256;
    double background_mean = 230.0;
    double contrast_ratio = 4.0;
    std::vector<int> strip_widths;
    /// Leftmost column of each strip.
    std::vector<std::size_t> strip_columns;
    std::size_t strip_row_begin = 20;
    std::size_t strip_row_end = 235;  // inclusive
    std::size_t point_row = 245;
    std::vector<std::size_t> point_columns;
    Rect homogeneous_block;
    std::size_t edge_band_width = 3;
    std::size_t edge_band_offset = 1;

    /// 256x256; strips of widths 1..13 from column 20 with 12-pixel gaps on
    /// rows 20-235; five points on row 245 every 16 columns; homogeneous
    /// block columns 160-248 x rows 8-120.
    static PhantomLayout canonical();

    /// Every violated invariant, empty when the layout is valid.
    std::vector<std::string> violations() const;
    /// Throws ValidationError listing all violations.
    void validate() const;

    bool is_feature(std::size_t col, std::size_t row) const;
    double feature_mean() const { return contrast_ratio * background_mean; }
    RoiRegistry rois() const;

    KeyValues to_key_values() const;
    static PhantomLayout from_key_values(const KeyValues& kv);
};

/// Background pixels at background_mean, features at contrast_ratio times it.
Image build_phantom(const PhantomLayout& layout);

/// One row of the experiment design.
struct Situation {
    int id = 0;
    ReturnModel background;
    ReturnModel foreground;
};

struct G0Row {
    int id;
    double alpha;
    double gamma;
    double background_mean;
};

/// Situations 1-6: G0 (alpha, gamma) and the tabulated background mean.
inline constexpr std::array<G0Row, 6> kSituationTable = {{
    {1, -2.0, 230.0, 230.0},
    {2, -2.0, 50.0, 50.0},
    {3, -4.0, 690.0, 230.0},
    {4, -4.0, 150.0, 50.0},
    {5, -10.0, 2070.0, 230.0},
    {6, -10.0, 450.0, 50.0},
}};

/// Situation 0 is pure speckle on the layout's constant truth; 1-6 use G0
/// on both regions with the foreground gamma scaled by contrast_ratio.
Situation make_situation(int id, const PhantomLayout& layout, Looks looks);

/// Mean backscatter of the situation's background region.
double situation_background_mean(int id, const PhantomLayout& layout);

/// Phantom whose background sits at the situation's background mean.
Image situation_truth(int id, const PhantomLayout& layout);

/// Independent draws per pixel: background pixels from situation.background,
/// feature pixels from situation.foreground. The two regions consume
/// separate split streams of `rng`.
Image corrupt(const PhantomLayout& layout, const Situation& situation, Rng& rng);

}  // namespace speckle
