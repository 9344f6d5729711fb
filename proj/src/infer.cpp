#include "oneseed/infer.hpp"

#include <algorithm>

#include "oneseed/error.hpp"

namespace oneseed {

ObjectSceneField score_regions(const std::vector<RegionDescriptor>& descriptors, const Registry& registry,
                               const ClassCatalog& catalog) {
    const std::size_t k = descriptors.size();
    ObjectSceneField out;
    out.objects.class_ids = catalog.object_ids();
    out.scenes.class_ids = catalog.scene_ids();
    out.objects.scores = Matrix(out.objects.class_ids.size(), k);
    out.scenes.scores = Matrix(out.scenes.class_ids.size(), k);

    for (std::size_t i = 0; i < out.objects.class_ids.size(); ++i) {
        const int id = out.objects.class_ids[i];
        const ObjectRep* rep = registry.find_object(id);
        if (!rep) throw DimError("registry has no object representation for class " + std::to_string(id));
        for (std::size_t j = 0; j < k; ++j) out.objects.scores(i, j) = sim_hist(rep->center, descriptors[j].heat);
    }
    for (std::size_t i = 0; i < out.scenes.class_ids.size(); ++i) {
        const int id = out.scenes.class_ids[i];
        const SceneRep* rep = registry.find_scene(id);
        if (!rep) throw DimError("registry has no scene representation for class " + std::to_string(id));
        for (std::size_t j = 0; j < k; ++j) {
            double best = 0.0;
            for (std::size_t g = 0; g < rep->pool.size(); ++g)
                best = std::max(best, sim_hist(rep->color(g), descriptors[j].color) *
                                          sim_hist(rep->texture(g), descriptors[j].texture));
            out.scenes.scores(i, j) = best;
        }
    }
    return out;
}

Matrix normalize_columns(const Matrix& similarity) {
    if (similarity.rows() != similarity.cols()) throw ShapeError("context similarity must be square");
    Matrix out = similarity;
    for (std::size_t j = 0; j < out.cols(); ++j) {
        double s = 0.0;
        for (std::size_t i = 0; i < out.rows(); ++i) {
            if (out(i, j) < 0.0) throw ShapeError("context similarity has a negative entry");
            s += out(i, j);
        }
        if (s <= 0.0) throw ShapeError("context similarity column " + std::to_string(j) + " sums to zero");
        for (std::size_t i = 0; i < out.rows(); ++i) out(i, j) /= s;
    }
    return out;
}

SimilarityField refine(const SimilarityField& field, const Matrix& context_similarity) {
    if (field.scores.cols() != context_similarity.rows())
        throw ShapeError("refine: field has " + std::to_string(field.scores.cols()) + " regions, context has " +
                         std::to_string(context_similarity.rows()));
    return {field.class_ids, multiply(field.scores, normalize_columns(context_similarity))};
}

int region_band(const RegionSet& regions, int region) {
    const double row = regions.centroids[region].first;
    const int band = static_cast<int>(kBandCount * row / static_cast<double>(regions.height));
    return std::clamp(band, 0, kBandCount - 1);
}

MaskedField apply_location_prior(SimilarityField field, const RegionSet& regions, const ClassCatalog& catalog) {
    if (field.scores.cols() != static_cast<std::size_t>(regions.count))
        throw ShapeError("location prior: field and region set disagree on K");
    MaskedField out{std::move(field), {}};
    out.allowed.assign(out.field.class_ids.size(), std::vector<char>(regions.count, 1));
    for (int j = 0; j < regions.count; ++j) {
        const int band = region_band(regions, j);
        for (std::size_t i = 0; i < out.field.class_ids.size(); ++i)
            out.allowed[i][j] = catalog.get(out.field.class_ids[i]).allows_band(band) ? 1 : 0;
    }
    return out;
}

MaskedField unmasked(SimilarityField field) {
    MaskedField out{std::move(field), {}};
    out.allowed.assign(out.field.class_ids.size(), std::vector<char>(out.field.scores.cols(), 1));
    return out;
}

RegionLabels select_labels(const MaskedField& masked, double theta) {
    if (!(theta >= 0.0 && theta <= 1.0)) throw RangeError("theta must lie in [0,1]");
    const auto& f = masked.field;
    const std::size_t k = f.scores.cols();
    RegionLabels out{std::vector<std::uint8_t>(k, kIgnoreLabel), std::vector<double>(k, 0.0)};
    for (std::size_t j = 0; j < k; ++j) {
        int best_id = -1;
        double best = -1.0;
        for (std::size_t i = 0; i < f.class_ids.size(); ++i) {
            if (!masked.allowed[i][j]) continue;
            const double s = f.scores(i, j);
            const int id = f.class_ids[i];
            if (s > best || (s == best && id < best_id)) {
                best = s;
                best_id = id;
            }
        }
        if (best_id < 0) continue;
        out.score[j] = std::clamp(best, 0.0, 1.0);
        if (best >= theta) out.label[j] = static_cast<std::uint8_t>(best_id);
    }
    return out;
}

RegionLabels fuse_object_scene(const RegionLabels& objects, const RegionLabels& scenes) {
    if (objects.label.size() != scenes.label.size()) throw ShapeError("fuse: region counts differ");
    RegionLabels out = scenes;
    for (std::size_t j = 0; j < objects.label.size(); ++j) {
        if (objects.label[j] != kIgnoreLabel) {
            out.label[j] = objects.label[j];
            out.score[j] = objects.score[j];
        } else if (scenes.label[j] == kIgnoreLabel) {
            out.score[j] = std::max(objects.score[j], scenes.score[j]);
        }
    }
    return out;
}

LabelMap broadcast(const RegionSet& regions, const RegionLabels& labels) {
    if (labels.label.size() != static_cast<std::size_t>(regions.count)) throw ShapeError("broadcast: region count");
    LabelMap map(regions.height, regions.width);
    map.scores.emplace(map.labels.size());
    for (std::size_t p = 0; p < map.labels.size(); ++p) {
        const int k = regions.labels[p];
        map.labels[p] = labels.label[k];
        (*map.scores)[p] = static_cast<float>(labels.score[k]);
    }
    return map;
}

namespace {

MaskedField refine_and_mask(SimilarityField field, const ImageArtifacts& image, const ClassCatalog& catalog,
                            const InferOptions& options) {
    if (options.use_context) field = refine(field, image.context.similarity);
    return options.use_location ? apply_location_prior(std::move(field), image.regions, catalog)
                                : unmasked(std::move(field));
}

}  // namespace

PseudoLabels infer_initial(const ImageArtifacts& image, const Registry& registry, const ClassCatalog& catalog,
                           const InferOptions& options) {
    ObjectSceneField field = score_regions(image.descriptors, registry, catalog);
    const RegionLabels objects = select_labels(refine_and_mask(std::move(field.objects), image, catalog, options),
                                               options.theta);
    const RegionLabels scenes = select_labels(refine_and_mask(std::move(field.scenes), image, catalog, options),
                                              options.theta);
    PseudoLabels out;
    out.regions = fuse_object_scene(objects, scenes);
    out.map = broadcast(image.regions, out.regions);
    return out;
}

PseudoLabels infer_iteration(const ImageArtifacts& image, const SimilarityField& joint, const ClassCatalog& catalog,
                             const InferOptions& options) {
    if (joint.scores.cols() != static_cast<std::size_t>(image.regions.count))
        throw ShapeError("joint field does not match the image's region count");
    PseudoLabels out;
    out.regions = select_labels(refine_and_mask(joint, image, catalog, options), options.theta);
    out.map = broadcast(image.regions, out.regions);
    return out;
}

}  // namespace oneseed
