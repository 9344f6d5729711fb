#include "oneseed/artifacts.hpp"

#include "oneseed/error.hpp"
#include "oneseed/imaging.hpp"
#include "oneseed/mosf.hpp"

namespace oneseed {

void complete_feature_maps(RawImage& raw) {
    if (raw.color.channels() != 3) throw DimError("image " + raw.id + ": colour map must have 3 channels");
    if (!raw.texture) raw.texture = imaging::fallback_texture(raw.color);
    if (!raw.edge) raw.edge = imaging::fallback_edge(raw.color);
    if (!raw.saliency) raw.saliency = imaging::fallback_saliency_views(raw.color);
}

ImageArtifacts encode_fused(const RawImage& raw_in, const FeatureMap& fused_heat, const EncodeOptions& options,
                            std::optional<RegionSet> regions) {
    RawImage raw = raw_in;
    complete_feature_maps(raw);
    if (fused_heat.height() != raw.color.height() || fused_heat.width() != raw.color.width())
        throw DimError("image " + raw.id + ": fused heat map dims differ from the colour map");

    ImageArtifacts out;
    out.id = raw.id;
    out.height = raw.color.height();
    out.width = raw.color.width();
    out.regions = regions ? std::move(*regions) : segment(raw.color, options.target_regions, options.segment);
    if (out.regions.height != out.height || out.regions.width != out.width)
        throw DimError("image " + raw.id + ": region raster dims differ from the colour map");
    out.descriptors = describe(out.regions, fused_heat, raw.color, *raw.texture, *raw.saliency, options.describe);
    out.context = context_matrix(out.regions, out.descriptors, edge_similarity(out.regions, *raw.edge));
    out.ground_truth = raw.ground_truth;
    return out;
}

ImageArtifacts encode_image(RawImage raw, const EncodeOptions& options, std::optional<RegionSet> regions) {
    const FeatureMap fused = mosf::fuse(raw.plan, raw.slice_heat);
    raw.slice_heat.clear();
    return encode_fused(raw, fused, options, std::move(regions));
}

}  // namespace oneseed
