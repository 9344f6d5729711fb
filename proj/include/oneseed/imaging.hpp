#pragma once

#include <array>
#include <functional>
#include <vector>

#include "oneseed/featio.hpp"
#include "oneseed/superpix.hpp"

namespace oneseed::imaging {

struct CropRect {
    int row = 0;
    int col = 0;
    int height = 0;
    int width = 0;

    bool contains(int r, int c) const { return r >= row && r < row + height && c >= col && c < col + width; }
    friend bool operator==(const CropRect&, const CropRect&) = default;
};

/// The two local cropping views used for local saliency. View 1 is a 2x2 grid
/// of half-size crops; view 2 shifts that grid by a quarter of each dimension
/// (clamped to the image, giving up to 3x3 crops). Each view partitions the image.
std::array<std::vector<CropRect>, 2> local_crop_views(int rows, int cols);

FeatureMap crop(const FeatureMap& map, const CropRect& rect);

/// Assembles a single-channel map by running `per_crop` on every crop of a view
/// and pasting each result back at the crop position.
FeatureMap compose_view(const FeatureMap& source, const std::vector<CropRect>& view,
                        const std::function<FeatureMap(const FeatureMap&)>& per_crop);

/// Sobel gradient magnitude of channel-mean lightness, scaled to [0,1].
FeatureMap fallback_edge(const FeatureMap& color);
/// Gradient magnitude box-averaged over a 5x5 window, scaled to [0,1].
FeatureMap fallback_texture(const FeatureMap& color);
/// Centre-surround colour contrast, scaled to [0,1].
FeatureMap fallback_saliency(const FeatureMap& color);
/// Global saliency on the full image plus both local views.
SaliencyViews fallback_saliency_views(const FeatureMap& color);

}  // namespace oneseed::imaging
