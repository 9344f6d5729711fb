#pragma once

#include <vector>

#include "oneseed/artifacts.hpp"
#include "oneseed/infer.hpp"
#include "oneseed/metrics.hpp"
#include "oneseed/represent.hpp"

namespace oneseed {

/// Encodes every image; output order follows input order whatever `jobs` is.
std::vector<ImageArtifacts> encode_all(const std::vector<RawImage>& images, const EncodeOptions& options, int jobs);

/// Id lookup over a list of encoded images.
ImageLookup lookup_in(const std::vector<ImageArtifacts>& images);

/// Initial-mode pseudo labels for every image.
std::vector<PseudoLabels> infer_all(const std::vector<ImageArtifacts>& images, const Registry& registry,
                                    const ClassCatalog& catalog, const InferOptions& options, int jobs);

/// Confusion of pseudo labels against ground truth over the selected images;
/// images without ground truth are skipped.
ConfusionMatrix pseudo_confusion(const std::vector<ImageArtifacts>& images, const std::vector<LabelMap>& labels,
                                 const ClassCatalog& catalog, const std::vector<bool>& include = {});

/// Pixels of ground-truth-pure regions whose class is allowed in the region's
/// band; everything else becomes 255 in the returned copy of the ground truth.
LabelMap band_allowed_pure_truth(const ImageArtifacts& image, const ClassCatalog& catalog);

}  // namespace oneseed
