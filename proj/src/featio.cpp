#include "oneseed/featio.hpp"

#include <algorithm>
#include <bit>
#include <charconv>
#include <cmath>
#include <cctype>
#include <cstring>
#include <fstream>
#include <istream>
#include <iterator>
#include <ostream>
#include <sstream>

#include "oneseed/error.hpp"

namespace oneseed {

namespace {

constexpr char kFmapMagic[5] = {'F', 'M', 'A', 'P', '1'};
constexpr std::size_t kFmapHeaderBytes = 5 + 3 * 4;

void put_u32(std::string& out, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFFu));
}

std::uint32_t get_u32(const char* p) {
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(static_cast<unsigned char>(p[i])) << (8 * i);
    return v;
}

void check_capacity(std::uint64_t h, std::uint64_t w, std::uint64_t c, const FmapLimits& limits) {
    // Guard the multiplication itself against overflow before comparing.
    const std::uint64_t cap = limits.max_elements;
    if (h != 0 && w > cap / h) throw CapacityError("FMAP exceeds size cap");
    const std::uint64_t hw = h * w;
    if (hw != 0 && c > cap / hw) throw CapacityError("FMAP exceeds size cap");
    if (hw * c > cap)
        throw CapacityError("FMAP of " + std::to_string(hw * c) + " elements exceeds cap of " + std::to_string(cap));
}

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IOError("cannot open " + path.string());
    return std::string(std::istreambuf_iterator<char>(in), {});
}

void write_file(const std::filesystem::path& path, const std::string& bytes) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IOError("cannot write " + path.string());
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw IOError("short write to " + path.string());
}

std::string format_double(double v) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, ptr);
}

}  // namespace

FeatureMap::FeatureMap(std::size_t height, std::size_t width, std::size_t channels, std::vector<float> data)
    : height_(height), width_(width), channels_(channels), data_(std::move(data)) {
    if (data_.size() != height * width * channels) throw DimError("FeatureMap: data length does not match dims");
}

std::string encode_fmap(const FeatureMap& map, const FmapLimits& limits) {
    check_capacity(map.height(), map.width(), map.channels(), limits);
    for (float v : map.data())
        if (!std::isfinite(v)) throw ValueError("FMAP values must be finite");
    if (map.height() > UINT32_MAX || map.width() > UINT32_MAX || map.channels() > UINT32_MAX)
        throw CapacityError("FMAP dimension exceeds 32 bits");

    std::string out;
    out.reserve(kFmapHeaderBytes + map.data().size() * 4);
    out.append(kFmapMagic, sizeof kFmapMagic);
    put_u32(out, static_cast<std::uint32_t>(map.height()));
    put_u32(out, static_cast<std::uint32_t>(map.width()));
    put_u32(out, static_cast<std::uint32_t>(map.channels()));
    for (float v : map.data()) put_u32(out, std::bit_cast<std::uint32_t>(v));
    return out;
}

FeatureMap decode_fmap(std::span<const char> bytes, const FmapLimits& limits) {
    if (bytes.size() < kFmapHeaderBytes || std::memcmp(bytes.data(), kFmapMagic, sizeof kFmapMagic) != 0)
        throw FormatError("not an FMAP1 file (bad magic or short header)");
    const std::uint32_t h = get_u32(bytes.data() + 5);
    const std::uint32_t w = get_u32(bytes.data() + 9);
    const std::uint32_t c = get_u32(bytes.data() + 13);
    check_capacity(h, w, c, limits);
    const std::uint64_t expected = kFmapHeaderBytes + std::uint64_t{h} * w * c * 4;
    if (bytes.size() != expected)
        throw FormatError("FMAP size mismatch: expected " + std::to_string(expected) + " bytes, got " +
                          std::to_string(bytes.size()));
    std::vector<float> data(std::size_t{h} * w * c);
    const char* p = bytes.data() + kFmapHeaderBytes;
    for (std::size_t i = 0; i < data.size(); ++i, p += 4) {
        data[i] = std::bit_cast<float>(get_u32(p));
        if (!std::isfinite(data[i])) throw ValueError("FMAP contains a non-finite value");
    }
    return FeatureMap(h, w, c, std::move(data));
}

void write_fmap(const FeatureMap& map, const std::filesystem::path& path, const FmapLimits& limits) {
    write_file(path, encode_fmap(map, limits));
}

FeatureMap read_fmap(const std::filesystem::path& path, const FmapLimits& limits) {
    const std::string bytes = read_file(path);
    try {
        return decode_fmap(bytes, limits);
    } catch (const FormatError& e) {
        throw FormatError(path.string() + ": " + e.what());
    }
}

void write_pgm(const PgmImage& image, const std::filesystem::path& path) {
    if (image.values.size() != image.height * image.width) throw DimError("PGM: value count does not match dims");
    if (image.maxval == 0) throw ValueError("PGM maxval must be positive");
    std::string out = "P5\n" + std::to_string(image.width) + " " + std::to_string(image.height) + "\n" +
                      std::to_string(image.maxval) + "\n";
    const bool wide = image.maxval > 255;
    for (std::uint16_t v : image.values) {
        if (v > image.maxval) throw ValueError("PGM value exceeds maxval");
        if (wide) out.push_back(static_cast<char>(v >> 8));
        out.push_back(static_cast<char>(v & 0xFFu));
    }
    write_file(path, out);
}

PgmImage read_pgm(const std::filesystem::path& path) {
    const std::string bytes = read_file(path);
    std::size_t pos = 0;
    auto skip_space_and_comments = [&] {
        while (pos < bytes.size()) {
            if (bytes[pos] == '#') {
                while (pos < bytes.size() && bytes[pos] != '\n') ++pos;
            } else if (std::isspace(static_cast<unsigned char>(bytes[pos]))) {
                ++pos;
            } else {
                break;
            }
        }
    };
    auto read_number = [&](const char* what) -> std::size_t {
        skip_space_and_comments();
        std::size_t value = 0;
        auto [ptr, ec] = std::from_chars(bytes.data() + pos, bytes.data() + bytes.size(), value);
        if (ec != std::errc() || ptr == bytes.data() + pos)
            throw FormatError(path.string() + ": bad PGM " + what);
        pos = static_cast<std::size_t>(ptr - bytes.data());
        return value;
    };

    if (bytes.size() < 2 || bytes[0] != 'P' || bytes[1] != '5') throw FormatError(path.string() + ": not a P5 PGM");
    pos = 2;
    PgmImage img;
    img.width = read_number("width");
    img.height = read_number("height");
    const std::size_t maxval = read_number("maxval");
    if (maxval == 0 || maxval > 65535) throw FormatError(path.string() + ": PGM maxval out of range");
    img.maxval = static_cast<std::uint16_t>(maxval);
    if (pos >= bytes.size() || !std::isspace(static_cast<unsigned char>(bytes[pos])))
        throw FormatError(path.string() + ": PGM header not terminated");
    ++pos;

    const std::size_t bpp = maxval > 255 ? 2 : 1;
    const std::size_t expected = pos + img.width * img.height * bpp;
    if (bytes.size() != expected)
        throw FormatError(path.string() + ": PGM size mismatch: expected " + std::to_string(expected) +
                          " bytes, got " + std::to_string(bytes.size()));
    img.values.resize(img.width * img.height);
    for (std::size_t i = 0; i < img.values.size(); ++i) {
        const auto hi = static_cast<unsigned char>(bytes[pos + i * bpp]);
        img.values[i] = bpp == 2 ? static_cast<std::uint16_t>((hi << 8) | static_cast<unsigned char>(bytes[pos + i * 2 + 1]))
                                 : hi;
        if (img.values[i] > maxval) throw FormatError(path.string() + ": PGM value exceeds maxval");
    }
    return img;
}

std::filesystem::path scores_path_for(const std::filesystem::path& label_path) {
    auto p = label_path;
    p.replace_extension(".scores.fmap");
    return p;
}

void write_labelmap(const LabelMap& map, const std::filesystem::path& path) {
    if (map.labels.size() != map.height * map.width) throw DimError("LabelMap: label count does not match dims");
    PgmImage img{map.height, map.width, 255, std::vector<std::uint16_t>(map.labels.begin(), map.labels.end())};
    write_pgm(img, path);
    const auto sp = scores_path_for(path);
    if (map.scores) {
        if (map.scores->size() != map.labels.size()) throw DimError("LabelMap: score count does not match dims");
        write_fmap(FeatureMap(map.height, map.width, 1, *map.scores), sp);
    } else {
        std::error_code ec;
        std::filesystem::remove(sp, ec);
    }
}

LabelMap read_labelmap(const std::filesystem::path& path) {
    const PgmImage img = read_pgm(path);
    if (img.maxval != 255) throw FormatError(path.string() + ": label maps must have maxval 255");
    LabelMap map;
    map.height = img.height;
    map.width = img.width;
    map.labels.assign(img.values.begin(), img.values.end());
    const auto sp = scores_path_for(path);
    if (std::filesystem::exists(sp)) {
        FeatureMap s = read_fmap(sp);
        if (s.height() != map.height || s.width() != map.width || s.channels() != 1)
            throw FormatError(sp.string() + ": score map dims do not match labels");
        map.scores = s.data();
    }
    return map;
}

LabelMap read_labelmap(const std::filesystem::path& path, const ClassCatalog& catalog) {
    LabelMap map = read_labelmap(path);
    validate_labelmap(map, catalog);
    return map;
}

void validate_labelmap(const LabelMap& map, const ClassCatalog& catalog) {
    for (std::uint8_t v : map.labels)
        if (v != kIgnoreLabel && !catalog.contains(v))
            throw ValidationError("label " + std::to_string(v) + " is not a catalog class");
    if (map.scores)
        for (float s : *map.scores)
            if (!(s >= 0.0f && s <= 1.0f)) throw ValidationError("label score outside [0,1]");
}

SlicePlan make_slice_plan(int rows, int cols) {
    if (rows < 4 || cols < 6)
        throw RangeError("slice plan needs at least 4x6 pixels, got " + std::to_string(rows) + "x" +
                         std::to_string(cols));
    SlicePlan plan;
    plan.rows = rows;
    plan.cols = cols;
    const int h = (rows + 1) / 2;
    const int w = (cols + 2) / 3;
    for (int m = 0; m < kSliceRows; ++m) {
        for (int n = 0; n < 5; ++n) {
            Slice s;
            s.index = m * kSliceCols + n;
            s.row = rows * m / 4;
            s.col = cols * n / 6;
            s.height = std::min(h, rows - s.row);
            s.width = std::min(w, cols - s.col);
            s.center_row = s.row + (s.height - 1) / 2.0;
            s.center_col = s.col + (s.width - 1) / 2.0;
            plan.slices.push_back(s);
        }
    }
    return plan;
}

void write_slice_plan(const SlicePlan& plan, std::ostream& out) {
    out << "SLICEPLAN v1\n";
    for (const auto& s : plan.slices)
        out << s.index << ' ' << s.row << ' ' << s.col << ' ' << s.height << ' ' << s.width << ' '
            << format_double(s.center_row) << ' ' << format_double(s.center_col) << '\n';
}

void save_slice_plan(const SlicePlan& plan, const std::filesystem::path& path) {
    std::ostringstream ss;
    write_slice_plan(plan, ss);
    write_file(path, ss.str());
}

SlicePlan parse_slice_plan(std::istream& in) {
    std::string line;
    if (!std::getline(in, line) || line != "SLICEPLAN v1") throw FormatError("slice plan: missing 'SLICEPLAN v1' header");
    SlicePlan plan;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        std::istringstream ls(line);
        Slice s;
        if (!(ls >> s.index >> s.row >> s.col >> s.height >> s.width >> s.center_row >> s.center_col))
            throw FormatError("slice plan line " + std::to_string(line_no) + ": expected 7 fields");
        plan.slices.push_back(s);
    }
    if (plan.slices.size() != kSliceCount)
        throw FormatError("slice plan must list 15 slices, got " + std::to_string(plan.slices.size()));
    for (std::size_t i = 0; i < plan.slices.size(); ++i) {
        const Slice& s = plan.slices[i];
        if (s.index != static_cast<int>(i)) throw FormatError("slice plan indices must run 0..14 in order");
        if (s.row < 0 || s.col < 0 || s.height <= 0 || s.width <= 0) throw FormatError("slice plan: bad geometry");
        plan.rows = std::max(plan.rows, s.row + s.height);
        plan.cols = std::max(plan.cols, s.col + s.width);
    }
    return plan;
}

SlicePlan load_slice_plan(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IOError("cannot open slice plan " + path.string());
    return parse_slice_plan(in);
}

}  // namespace oneseed
