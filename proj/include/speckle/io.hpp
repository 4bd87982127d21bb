#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "speckle/image.hpp"

namespace speckle {

/// Ordered `key=value` lines. Blank lines and lines starting with '#' are
/// ignored on read; keys are unique.
class KeyValues {
public:
    void set(const std::string& key, const std::string& value);
    bool contains(const std::string& key) const;
    const std::string& get(const std::string& key) const;
    std::string get_or(const std::string& key, const std::string& fallback) const;
    const std::vector<std::pair<std::string, std::string>>& entries() const { return entries_; }

    static KeyValues parse(std::istream& in);
    static KeyValues read(const std::filesystem::path& path);
    void write(std::ostream& out) const;
    void write(const std::filesystem::path& path) const;

private:
    std::vector<std::pair<std::string, std::string>> entries_;
    std::map<std::string, std::size_t> index_;
};

/// Reals with 17 significant digits, enough to round-trip any double.
std::string format_real(double value);
double parse_real(const std::string& text, const std::string& what);
long long parse_integer(const std::string& text, const std::string& what);
std::vector<std::string> split(const std::string& text, char delimiter);

/// RFC-4180 field quoting: fields containing separators, quotes or line
/// breaks are wrapped in double quotes with embedded quotes doubled.
std::string csv_field(const std::string& field);
/// Splits one CSV record (no embedded line breaks).
std::vector<std::string> parse_csv_record(const std::string& line);

// FIMG v1: "FIMG 1 <width> <height>\n" then width*height little-endian
// IEEE-754 binary64 values in row-major order.
void write_fimg(const Image& image, std::ostream& out);
void write_fimg(const Image& image, const std::filesystem::path& path);
Image read_fimg(std::istream& in);
Image read_fimg(const std::filesystem::path& path);

/// 64-bit FNV-1a over raw bytes.
std::uint64_t fnv1a64(std::string_view bytes, std::uint64_t hash = 0xcbf29ce484222325ULL);
/// FNV-1a of a file's full contents.
std::uint64_t file_digest(const std::filesystem::path& path);
/// FNV-1a of the image's FIMG encoding, equal to file_digest of a written file.
std::uint64_t fimg_digest(const Image& image);
/// 16 lowercase hex digits.
std::string hex64(std::uint64_t value);

/// Linear map of [low, high] onto the 16-bit PGM range.
struct PgmQuantization {
    double low = 0.0;
    double high = 0.0;
};

/// Binary P5, maxval 65535, big-endian samples. v -> round(65535 (v - low)
/// / (high - low)) with low/high the image range; a flat image maps to 0.
PgmQuantization write_pgm16(const Image& image, const std::filesystem::path& path);
/// Reads a P5 file and undoes the quantization.
Image read_pgm16(const std::filesystem::path& path, const PgmQuantization& q);

}  // namespace speckle
