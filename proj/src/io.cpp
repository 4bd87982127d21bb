#include "speckle/io.hpp"

#include <algorithm>
#include <bit>
#include <cerrno>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <sstream>

#include "speckle/errors.hpp"

namespace speckle {

namespace {

std::string trim(const std::string& s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string::npos) return {};
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

std::ifstream open_in(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open '" + path.string() + "' for reading");
    return in;
}

std::ofstream open_out(const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open '" + path.string() + "' for writing");
    return out;
}

std::uint64_t to_little_endian(std::uint64_t v) {
    if constexpr (std::endian::native == std::endian::big) {
        std::uint64_t r = 0;
        for (int i = 0; i < 8; ++i) r |= ((v >> (8 * i)) & 0xffu) << (8 * (7 - i));
        return r;
    }
    return v;
}

}  // namespace

void KeyValues::set(const std::string& key, const std::string& value) {
    if (const auto it = index_.find(key); it != index_.end()) {
        entries_[it->second].second = value;
        return;
    }
    index_[key] = entries_.size();
    entries_.emplace_back(key, value);
}

bool KeyValues::contains(const std::string& key) const { return index_.contains(key); }

const std::string& KeyValues::get(const std::string& key) const {
    const auto it = index_.find(key);
    if (it == index_.end()) throw ValidationError("missing key '" + key + "'");
    return entries_[it->second].second;
}

std::string KeyValues::get_or(const std::string& key, const std::string& fallback) const {
    return contains(key) ? get(key) : fallback;
}

KeyValues KeyValues::parse(std::istream& in) {
    KeyValues kv;
    std::vector<std::string> problems;
    std::string line;
    int number = 0;
    while (std::getline(in, line)) {
        ++number;
        const std::string t = trim(line);
        if (t.empty() || t.front() == '#') continue;
        const auto eq = t.find('=');
        if (eq == std::string::npos) {
            problems.push_back("line " + std::to_string(number) + ": expected key=value");
            continue;
        }
        const std::string key = trim(t.substr(0, eq));
        if (key.empty()) {
            problems.push_back("line " + std::to_string(number) + ": empty key");
            continue;
        }
        if (kv.contains(key)) {
            problems.push_back("line " + std::to_string(number) + ": duplicate key '" + key + "'");
            continue;
        }
        kv.set(key, trim(t.substr(eq + 1)));
    }
    if (!problems.empty()) throw ValidationError(problems);
    return kv;
}

KeyValues KeyValues::read(const std::filesystem::path& path) {
    auto in = open_in(path);
    return parse(in);
}

void KeyValues::write(std::ostream& out) const {
    for (const auto& [k, v] : entries_) out << k << '=' << v << '\n';
}

void KeyValues::write(const std::filesystem::path& path) const {
    auto out = open_out(path);
    write(out);
}

std::string format_real(double value) {
    char buf[64];
    const int n = std::snprintf(buf, sizeof buf, "%.17g", value);
    return std::string(buf, static_cast<std::size_t>(n));
}

double parse_real(const std::string& text, const std::string& what) {
    const std::string t = trim(text);
    char* end = nullptr;
    errno = 0;
    const double v = std::strtod(t.c_str(), &end);
    if (t.empty() || end != t.c_str() + t.size() || errno == ERANGE) {
        throw ValidationError(what + ": '" + text + "' is not a real number");
    }
    return v;
}

long long parse_integer(const std::string& text, const std::string& what) {
    const std::string t = trim(text);
    long long v = 0;
    const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
    if (t.empty() || ec != std::errc{} || ptr != t.data() + t.size()) {
        throw ValidationError(what + ": '" + text + "' is not an integer");
    }
    return v;
}

std::vector<std::string> split(const std::string& text, char delimiter) {
    std::vector<std::string> out;
    if (trim(text).empty()) return out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, delimiter)) out.push_back(trim(item));
    return out;
}

std::string csv_field(const std::string& field) {
    if (field.find_first_of(",\"\r\n") == std::string::npos) return field;
    std::string out = "\"";
    for (char c : field) {
        if (c == '"') out += '"';
        out += c;
    }
    out += '"';
    return out;
}

std::vector<std::string> parse_csv_record(const std::string& line) {
    std::vector<std::string> fields;
    std::string current;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
        if (quoted) {
            if (c == '"') {
                if (i + 1 < line.size() && line[i + 1] == '"') {
                    current += '"';
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                current += c;
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            fields.push_back(std::move(current));
            current.clear();
        } else if (c != '\r') {
            current += c;
        }
    }
    if (quoted) throw ValidationError("unterminated quoted CSV field");
    fields.push_back(std::move(current));
    return fields;
}

void write_fimg(const Image& image, std::ostream& out) {
    out << "FIMG 1 " << image.width() << ' ' << image.height() << '\n';
    for (double v : image.pixels()) {
        const std::uint64_t bits = to_little_endian(std::bit_cast<std::uint64_t>(v));
        char bytes[8];
        std::memcpy(bytes, &bits, 8);
        out.write(bytes, 8);
    }
    if (!out) throw std::runtime_error("failed writing FIMG data");
}

void write_fimg(const Image& image, const std::filesystem::path& path) {
    auto out = open_out(path);
    write_fimg(image, out);
}

Image read_fimg(std::istream& in) {
    std::string header;
    if (!std::getline(in, header)) throw ValidationError("FIMG: missing header line");
    std::istringstream hs(header);
    std::string magic;
    int version = 0;
    long long width = 0, height = 0;
    std::string extra;
    if (!(hs >> magic >> version >> width >> height) || (hs >> extra) || magic != "FIMG" ||
        version != 1 || width < 1 || height < 1) {
        throw ValidationError("FIMG: malformed header '" + header + "'");
    }
    const auto count = static_cast<std::size_t>(width) * static_cast<std::size_t>(height);
    std::vector<double> pixels(count);
    for (auto& v : pixels) {
        char bytes[8];
        if (!in.read(bytes, 8)) throw ValidationError("FIMG: truncated pixel data");
        std::uint64_t bits = 0;
        std::memcpy(&bits, bytes, 8);
        v = std::bit_cast<double>(to_little_endian(bits));
    }
    if (in.peek() != std::char_traits<char>::eof()) throw ValidationError("FIMG: trailing bytes");
    return Image(static_cast<std::size_t>(width), static_cast<std::size_t>(height),
                 std::move(pixels));
}

Image read_fimg(const std::filesystem::path& path) {
    auto in = open_in(path);
    return read_fimg(in);
}

PgmQuantization write_pgm16(const Image& image, const std::filesystem::path& path) {
    const auto [lo, hi] = std::minmax_element(image.pixels().begin(), image.pixels().end());
    const PgmQuantization q{*lo, *hi};
    const double span = q.high - q.low;
    auto out = open_out(path);
    out << "P5\n" << image.width() << ' ' << image.height() << "\n65535\n";
    for (double v : image.pixels()) {
        const auto level =
            span > 0.0 ? static_cast<std::uint16_t>(std::lround(65535.0 * (v - q.low) / span)) : 0;
        const char bytes[2] = {static_cast<char>(level >> 8), static_cast<char>(level & 0xff)};
        out.write(bytes, 2);
    }
    if (!out) throw std::runtime_error("failed writing PGM data");
    return q;
}

Image read_pgm16(const std::filesystem::path& path, const PgmQuantization& q) {
    auto in = open_in(path);
    std::string magic;
    std::size_t width = 0, height = 0;
    int maxval = 0;
    if (!(in >> magic >> width >> height >> maxval) || magic != "P5" || maxval != 65535) {
        throw ValidationError("PGM: expected a 16-bit P5 header");
    }
    in.get();
    std::vector<double> pixels(width * height);
    const double span = q.high - q.low;
    for (auto& v : pixels) {
        unsigned char bytes[2];
        if (!in.read(reinterpret_cast<char*>(bytes), 2)) throw ValidationError("PGM: truncated");
        const unsigned level = (unsigned{bytes[0]} << 8) | bytes[1];
        v = q.low + span * level / 65535.0;
    }
    return Image(width, height, std::move(pixels));
}

std::uint64_t fnv1a64(std::string_view bytes, std::uint64_t hash) {
    for (unsigned char c : bytes) {
        hash ^= c;
        hash *= 0x100000001b3ULL;
    }
    return hash;
}

std::uint64_t file_digest(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path.string());
    std::uint64_t hash = fnv1a64({});
    char buf[1 << 16];
    while (in) {
        in.read(buf, sizeof buf);
        hash = fnv1a64(std::string_view(buf, static_cast<std::size_t>(in.gcount())), hash);
    }
    return hash;
}

std::uint64_t fimg_digest(const Image& image) {
    std::ostringstream out(std::ios::binary);
    write_fimg(image, out);
    return fnv1a64(out.str());
}

std::string hex64(std::uint64_t value) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(value));
    return buf;
}

}  // namespace speckle
