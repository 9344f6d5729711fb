#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "oneseed/catalog.hpp"

namespace oneseed {

/// Dense H x W x C raster of 32-bit floats, row-major with channels innermost.
class FeatureMap {
public:
    FeatureMap() = default;
    FeatureMap(std::size_t height, std::size_t width, std::size_t channels, float fill = 0.0f)
        : height_(height), width_(width), channels_(channels), data_(height * width * channels, fill) {}
    FeatureMap(std::size_t height, std::size_t width, std::size_t channels, std::vector<float> data);

    std::size_t height() const { return height_; }
    std::size_t width() const { return width_; }
    std::size_t channels() const { return channels_; }
    std::size_t pixel_count() const { return height_ * width_; }

    float& at(std::size_t r, std::size_t c, std::size_t ch = 0) { return data_[(r * width_ + c) * channels_ + ch]; }
    float at(std::size_t r, std::size_t c, std::size_t ch = 0) const {
        return data_[(r * width_ + c) * channels_ + ch];
    }
    std::span<float> pixel(std::size_t r, std::size_t c) {
        return {data_.data() + (r * width_ + c) * channels_, channels_};
    }
    std::span<const float> pixel(std::size_t r, std::size_t c) const {
        return {data_.data() + (r * width_ + c) * channels_, channels_};
    }
    std::span<const float> pixel(std::size_t index) const { return {data_.data() + index * channels_, channels_}; }

    const std::vector<float>& data() const { return data_; }
    std::vector<float>& data() { return data_; }

    friend bool operator==(const FeatureMap&, const FeatureMap&) = default;

private:
    std::size_t height_ = 0;
    std::size_t width_ = 0;
    std::size_t channels_ = 0;
    std::vector<float> data_;
};

/// Per-pixel class labels (255 = ignored) with optional per-pixel scores.
struct LabelMap {
    std::size_t height = 0;
    std::size_t width = 0;
    std::vector<std::uint8_t> labels;
    std::optional<std::vector<float>> scores;

    LabelMap() = default;
    LabelMap(std::size_t h, std::size_t w, std::uint8_t fill = kIgnoreLabel)
        : height(h), width(w), labels(h * w, fill) {}

    std::uint8_t at(std::size_t r, std::size_t c) const { return labels[r * width + c]; }
    std::uint8_t& at(std::size_t r, std::size_t c) { return labels[r * width + c]; }

    friend bool operator==(const LabelMap&, const LabelMap&) = default;
};

/// Size guard applied before any FMAP allocation.
struct FmapLimits {
    std::uint64_t max_elements = std::uint64_t{1} << 28;
};

std::string encode_fmap(const FeatureMap& map, const FmapLimits& limits = {});
FeatureMap decode_fmap(std::span<const char> bytes, const FmapLimits& limits = {});
void write_fmap(const FeatureMap& map, const std::filesystem::path& path, const FmapLimits& limits = {});
FeatureMap read_fmap(const std::filesystem::path& path, const FmapLimits& limits = {});

/// Generic binary PGM (P5) raster; maxval up to 65535 (two bytes, big-endian, per Netpbm).
struct PgmImage {
    std::size_t height = 0;
    std::size_t width = 0;
    std::uint16_t maxval = 255;
    std::vector<std::uint16_t> values;
};
void write_pgm(const PgmImage& image, const std::filesystem::path& path);
PgmImage read_pgm(const std::filesystem::path& path);

/// Sibling score file of a label map: `labels.pgm` -> `labels.scores.fmap`.
std::filesystem::path scores_path_for(const std::filesystem::path& label_path);

void write_labelmap(const LabelMap& map, const std::filesystem::path& path);
/// Reads the PGM and, when present, its sibling score FMAP.
LabelMap read_labelmap(const std::filesystem::path& path);
LabelMap read_labelmap(const std::filesystem::path& path, const ClassCatalog& catalog);
/// Throws ValidationError when a non-255 label is not a catalog id.
void validate_labelmap(const LabelMap& map, const ClassCatalog& catalog);

struct Slice {
    int index = 0;
    int row = 0;
    int col = 0;
    int height = 0;
    int width = 0;
    double center_row = 0.0;
    double center_col = 0.0;

    bool contains(int r, int c) const { return r >= row && r < row + height && c >= col && c < col + width; }
    friend bool operator==(const Slice&, const Slice&) = default;
};

inline constexpr int kSliceRows = 3;
inline constexpr int kSliceCols = 5;
inline constexpr int kSliceCount = kSliceRows * kSliceCols;

/// Fifteen overlapping half-height, third-width slices. Slice index = 5*m + n.
struct SlicePlan {
    int rows = 0;
    int cols = 0;
    std::vector<Slice> slices;

    friend bool operator==(const SlicePlan&, const SlicePlan&) = default;
};

/// Corners at (floor(l*m/4), floor(w*n/6)), sizes (ceil(l/2), ceil(w/3)) clamped to the image.
/// Throws RangeError when l < 4 or w < 6.
SlicePlan make_slice_plan(int rows, int cols);

void write_slice_plan(const SlicePlan& plan, std::ostream& out);
void save_slice_plan(const SlicePlan& plan, const std::filesystem::path& path);
SlicePlan parse_slice_plan(std::istream& in);
SlicePlan load_slice_plan(const std::filesystem::path& path);

}  // namespace oneseed
