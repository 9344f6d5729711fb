#pragma once

#include <optional>
#include <string>
#include <vector>

#include "oneseed/featio.hpp"
#include "oneseed/superpix.hpp"

namespace oneseed {

/// Everything an image contributes before encoding.
struct RawImage {
    std::string id;
    FeatureMap color;  // 3 channels in [0,1]
    std::optional<FeatureMap> texture;
    std::optional<FeatureMap> edge;
    std::optional<SaliencyViews> saliency;
    SlicePlan plan;
    std::vector<FeatureMap> slice_heat;  // one per slice, at slice resolution
    std::optional<LabelMap> ground_truth;
};

/// Encoded per-image state shared by fitting, inference and iteration.
struct ImageArtifacts {
    std::string id;
    std::size_t height = 0;
    std::size_t width = 0;
    RegionSet regions;
    std::vector<RegionDescriptor> descriptors;
    ContextMatrix context;
    std::optional<LabelMap> ground_truth;
};

struct EncodeOptions {
    int target_regions = 96;
    SegmentOptions segment;
    DescribeOptions describe;
};

/// Fills missing texture/edge/saliency maps with the built-in fallbacks.
void complete_feature_maps(RawImage& raw);

/// Fuses the slice heat maps, segments, describes and builds the context matrix.
/// When `regions` is given the segmentation step is skipped.
ImageArtifacts encode_image(RawImage raw, const EncodeOptions& options = {},
                            std::optional<RegionSet> regions = std::nullopt);

/// Encodes from an already fused heat map (used when fusion happened elsewhere).
ImageArtifacts encode_fused(const RawImage& raw, const FeatureMap& fused_heat, const EncodeOptions& options,
                            std::optional<RegionSet> regions = std::nullopt);

}  // namespace oneseed
