#pragma once

#include <cstdint>
#include <vector>

#include "oneseed/artifacts.hpp"
#include "oneseed/catalog.hpp"
#include "oneseed/matrix.hpp"
#include "oneseed/represent.hpp"

namespace oneseed {

/// Class-by-region score matrix; column j holds region j's scores, row i
/// belongs to class_ids[i].
struct SimilarityField {
    std::vector<int> class_ids;
    Matrix scores;
};

struct ObjectSceneField {
    SimilarityField objects;
    SimilarityField scenes;
};

/// M_obj from object centers on the heat descriptor, M_sce as the best
/// colour x texture match over each scene pool. Rows follow catalog order.
ObjectSceneField score_regions(const std::vector<RegionDescriptor>& descriptors, const Registry& registry,
                               const ClassCatalog& catalog);

/// Divides each column by its sum. Throws ShapeError on a non-square matrix,
/// negative entries or an all-zero column.
Matrix normalize_columns(const Matrix& similarity);

/// M_r = M * column-normalized(Sim_c).
SimilarityField refine(const SimilarityField& field, const Matrix& context_similarity);

/// Location band of a region: floor(4 * centroid_row / height), clamped to 3.
int region_band(const RegionSet& regions, int region);

/// Field plus the per-entry permission used during selection. Masked entries
/// keep their stored score; they are only skipped by the argmax.
struct MaskedField {
    SimilarityField field;
    std::vector<std::vector<char>> allowed;  // [class row][region]
};

MaskedField apply_location_prior(SimilarityField field, const RegionSet& regions, const ClassCatalog& catalog);
/// Everything allowed; used when the location prior is switched off.
MaskedField unmasked(SimilarityField field);

/// Per-region winner: allowed argmax (ties to the smaller class id) or 255
/// when the best allowed score is below theta.
struct RegionLabels {
    std::vector<std::uint8_t> label;
    std::vector<double> score;
};

RegionLabels select_labels(const MaskedField& masked, double theta);

/// Object label where it is not 255, scene label otherwise.
RegionLabels fuse_object_scene(const RegionLabels& objects, const RegionLabels& scenes);

LabelMap broadcast(const RegionSet& regions, const RegionLabels& labels);

enum class InferMode { initial, iteration };

inline constexpr double kInitialTheta = 0.05;
inline constexpr double kIterationTheta = 0.5;

struct InferOptions {
    InferMode mode = InferMode::initial;
    double theta = kInitialTheta;
    bool use_context = true;
    bool use_location = true;
};

struct PseudoLabels {
    RegionLabels regions;
    LabelMap map;
};

/// Initial mode: score, refine objects and scenes separately, mask, threshold, fuse.
PseudoLabels infer_initial(const ImageArtifacts& image, const Registry& registry, const ClassCatalog& catalog,
                           const InferOptions& options);

/// Iteration mode: a single joint field over all classes, refined, masked and
/// thresholded with one argmax.
PseudoLabels infer_iteration(const ImageArtifacts& image, const SimilarityField& joint, const ClassCatalog& catalog,
                             const InferOptions& options);

}  // namespace oneseed
