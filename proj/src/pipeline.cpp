#include "oneseed/pipeline.hpp"

#include <algorithm>

#include "oneseed/error.hpp"
#include "oneseed/parallel.hpp"

namespace oneseed {

std::vector<ImageArtifacts> encode_all(const std::vector<RawImage>& images, const EncodeOptions& options, int jobs) {
    std::vector<ImageArtifacts> out(images.size());
    parallel_for(images.size(), jobs, [&](std::size_t i) { out[i] = encode_image(images[i], options); });
    return out;
}

ImageLookup lookup_in(const std::vector<ImageArtifacts>& images) {
    return [&images](const std::string& id) -> const ImageArtifacts* {
        for (const auto& im : images)
            if (im.id == id) return &im;
        return nullptr;
    };
}

std::vector<PseudoLabels> infer_all(const std::vector<ImageArtifacts>& images, const Registry& registry,
                                    const ClassCatalog& catalog, const InferOptions& options, int jobs) {
    std::vector<PseudoLabels> out(images.size());
    parallel_for(images.size(), jobs,
                 [&](std::size_t i) { out[i] = infer_initial(images[i], registry, catalog, options); });
    return out;
}

ConfusionMatrix pseudo_confusion(const std::vector<ImageArtifacts>& images, const std::vector<LabelMap>& labels,
                                 const ClassCatalog& catalog, const std::vector<bool>& include) {
    if (labels.size() != images.size()) throw DimError("one label map per image expected");
    ConfusionMatrix cm(catalog.ids());
    for (std::size_t i = 0; i < images.size(); ++i) {
        if (!include.empty() && !include[i]) continue;
        if (images[i].ground_truth) cm.add(confusion(labels[i], *images[i].ground_truth, catalog));
    }
    return cm;
}

LabelMap band_allowed_pure_truth(const ImageArtifacts& image, const ClassCatalog& catalog) {
    if (!image.ground_truth) throw ValidationError("image " + image.id + " has no ground truth");
    const LabelMap& gt = *image.ground_truth;
    LabelMap out(gt.height, gt.width);
    const RegionSet& regions = image.regions;
    for (int j = 0; j < regions.count; ++j) {
        const auto& members = regions.members[j];
        const std::uint8_t label = gt.labels[members.front()];
        const bool pure = std::all_of(members.begin(), members.end(),
                                      [&](std::size_t p) { return gt.labels[p] == label; });
        if (!pure || label == kIgnoreLabel) continue;
        if (!catalog.get(label).allows_band(region_band(regions, j))) continue;
        for (const std::size_t p : members) out.labels[p] = label;
    }
    return out;
}

}  // namespace oneseed
