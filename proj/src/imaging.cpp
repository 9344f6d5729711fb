#include "oneseed/imaging.hpp"

#include <algorithm>
#include <cmath>

#include "oneseed/error.hpp"

namespace oneseed::imaging {

namespace {

std::vector<int> cuts(int extent, std::initializer_list<int> interior) {
    std::vector<int> out{0};
    for (int c : interior)
        if (c > out.back() && c < extent) out.push_back(c);
    out.push_back(extent);
    return out;
}

std::vector<CropRect> grid(const std::vector<int>& rows, const std::vector<int>& cols) {
    std::vector<CropRect> out;
    for (std::size_t i = 0; i + 1 < rows.size(); ++i)
        for (std::size_t j = 0; j + 1 < cols.size(); ++j)
            out.push_back({rows[i], cols[j], rows[i + 1] - rows[i], cols[j + 1] - cols[j]});
    return out;
}

void normalize_to_unit(FeatureMap& m) {
    float hi = 0.0f;
    for (float v : m.data()) hi = std::max(hi, v);
    if (hi > 0.0f)
        for (float& v : m.data()) v = std::clamp(v / hi, 0.0f, 1.0f);
}

FeatureMap lightness(const FeatureMap& color) {
    FeatureMap out(color.height(), color.width(), 1);
    for (std::size_t p = 0; p < color.pixel_count(); ++p) {
        double s = 0.0;
        for (float v : color.pixel(p)) s += v;
        out.data()[p] = static_cast<float>(s / static_cast<double>(std::max<std::size_t>(1, color.channels())));
    }
    return out;
}

// Mean over a (2r+1)^2 window clipped to the image, per channel, via summed-area tables.
FeatureMap box_mean(const FeatureMap& m, int radius) {
    const std::size_t h = m.height(), w = m.width(), ch = m.channels();
    std::vector<double> sat((h + 1) * (w + 1));
    FeatureMap out(h, w, ch);
    for (std::size_t c = 0; c < ch; ++c) {
        std::fill(sat.begin(), sat.end(), 0.0);
        for (std::size_t r = 0; r < h; ++r)
            for (std::size_t col = 0; col < w; ++col)
                sat[(r + 1) * (w + 1) + col + 1] = m.at(r, col, c) + sat[r * (w + 1) + col + 1] +
                                                   sat[(r + 1) * (w + 1) + col] - sat[r * (w + 1) + col];
        for (std::size_t r = 0; r < h; ++r)
            for (std::size_t col = 0; col < w; ++col) {
                const std::size_t r0 = r >= static_cast<std::size_t>(radius) ? r - radius : 0;
                const std::size_t c0 = col >= static_cast<std::size_t>(radius) ? col - radius : 0;
                const std::size_t r1 = std::min(h, r + radius + 1), c1 = std::min(w, col + radius + 1);
                const double s = sat[r1 * (w + 1) + c1] - sat[r0 * (w + 1) + c1] - sat[r1 * (w + 1) + c0] +
                                 sat[r0 * (w + 1) + c0];
                out.at(r, col, c) = static_cast<float>(s / static_cast<double>((r1 - r0) * (c1 - c0)));
            }
    }
    return out;
}

FeatureMap gradient_magnitude(const FeatureMap& color) {
    const FeatureMap l = lightness(color);
    const long h = static_cast<long>(l.height()), w = static_cast<long>(l.width());
    auto at = [&](long r, long c) {
        r = std::clamp(r, 0L, h - 1);
        c = std::clamp(c, 0L, w - 1);
        return static_cast<double>(l.at(r, c));
    };
    FeatureMap out(l.height(), l.width(), 1);
    for (long r = 0; r < h; ++r)
        for (long c = 0; c < w; ++c) {
            const double gx = (at(r - 1, c + 1) + 2 * at(r, c + 1) + at(r + 1, c + 1)) -
                              (at(r - 1, c - 1) + 2 * at(r, c - 1) + at(r + 1, c - 1));
            const double gy = (at(r + 1, c - 1) + 2 * at(r + 1, c) + at(r + 1, c + 1)) -
                              (at(r - 1, c - 1) + 2 * at(r - 1, c) + at(r - 1, c + 1));
            out.at(r, c) = static_cast<float>(std::hypot(gx, gy));
        }
    return out;
}

}  // namespace

std::array<std::vector<CropRect>, 2> local_crop_views(int rows, int cols) {
    if (rows < 1 || cols < 1) throw RangeError("local_crop_views: empty image");
    return {grid(cuts(rows, {rows / 2}), cuts(cols, {cols / 2})),
            grid(cuts(rows, {rows / 4, rows * 3 / 4}), cuts(cols, {cols / 4, cols * 3 / 4}))};
}

FeatureMap crop(const FeatureMap& map, const CropRect& rect) {
    if (rect.row < 0 || rect.col < 0 || rect.row + rect.height > static_cast<int>(map.height()) ||
        rect.col + rect.width > static_cast<int>(map.width()))
        throw RangeError("crop rectangle outside the map");
    FeatureMap out(rect.height, rect.width, map.channels());
    for (int r = 0; r < rect.height; ++r)
        for (int c = 0; c < rect.width; ++c) {
            const auto src = map.pixel(rect.row + r, rect.col + c);
            std::copy(src.begin(), src.end(), out.pixel(r, c).begin());
        }
    return out;
}

FeatureMap compose_view(const FeatureMap& source, const std::vector<CropRect>& view,
                        const std::function<FeatureMap(const FeatureMap&)>& per_crop) {
    FeatureMap out(source.height(), source.width(), 1);
    for (const CropRect& rect : view) {
        const FeatureMap part = per_crop(crop(source, rect));
        if (part.height() != static_cast<std::size_t>(rect.height) ||
            part.width() != static_cast<std::size_t>(rect.width) || part.channels() != 1)
            throw DimError("compose_view: per-crop result must be a single-channel map of the crop's size");
        for (int r = 0; r < rect.height; ++r)
            for (int c = 0; c < rect.width; ++c) out.at(rect.row + r, rect.col + c) = part.at(r, c);
    }
    return out;
}

FeatureMap fallback_edge(const FeatureMap& color) {
    FeatureMap g = gradient_magnitude(color);
    normalize_to_unit(g);
    return g;
}

FeatureMap fallback_texture(const FeatureMap& color) {
    FeatureMap t = box_mean(gradient_magnitude(color), 2);
    normalize_to_unit(t);
    return t;
}

FeatureMap fallback_saliency(const FeatureMap& color) {
    const int radius = std::max<int>(1, static_cast<int>(std::min(color.height(), color.width()) / 4));
    const FeatureMap surround = box_mean(color, radius);
    FeatureMap out(color.height(), color.width(), 1);
    for (std::size_t p = 0; p < color.pixel_count(); ++p) {
        const auto a = color.pixel(p);
        const auto b = surround.pixel(p);
        double d = 0.0;
        for (std::size_t c = 0; c < a.size(); ++c) d += (a[c] - b[c]) * (a[c] - b[c]);
        out.data()[p] = static_cast<float>(std::sqrt(d));
    }
    normalize_to_unit(out);
    return out;
}

SaliencyViews fallback_saliency_views(const FeatureMap& color) {
    const auto views = local_crop_views(static_cast<int>(color.height()), static_cast<int>(color.width()));
    return {fallback_saliency(color), compose_view(color, views[0], fallback_saliency),
            compose_view(color, views[1], fallback_saliency)};
}

}  // namespace oneseed::imaging
