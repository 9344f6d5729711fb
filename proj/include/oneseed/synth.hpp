#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "oneseed/artifacts.hpp"
#include "oneseed/catalog.hpp"
#include "oneseed/represent.hpp"

namespace oneseed::synth {

/// Noise levels in [0,1]: heat-map confusion, colour/texture jitter, saliency noise.
struct NoiseLevels {
    double heat = 0.0;
    double color = 0.0;
    double saliency = 0.0;
};

/// Axis-aligned rectangle of one scene class; segments are painted in order.
struct SceneSegment {
    int class_id = 0;
    int row = 0;
    int col = 0;
    int height = 0;
    int width = 0;
    int mode = 0;  // colour mode of the class
    int shade_col = 0;    // columns [shade_col, shade_col + shade_width) use the other mode
    int shade_width = 0;
};

enum class Shape { rectangle, ellipse };

struct ObjectBlob {
    int class_id = 0;
    Shape shape = Shape::rectangle;
    double center_row = 0.0;
    double center_col = 0.0;
    double half_height = 0.0;
    double half_width = 0.0;
    int confuser = -1;   // class whose heat signature leaks into this object, -1 for none
    double leak = 0.0;   // share of the heat signal taken by the confuser

    bool contains(int r, int c) const;
};

/// False heat activation on scene pixels.
struct HeatPatch {
    int class_id = 0;
    int row = 0;
    int col = 0;
    int height = 0;
    int width = 0;
    double amplitude = 0.0;
};

struct SceneSpec {
    std::uint64_t seed = 0;
    std::string id;
    int height = 64;
    int width = 128;
    std::vector<SceneSegment> layout;
    std::vector<ObjectBlob> objects;  // painted over the layout in order
    std::vector<HeatPatch> patches;
    NoiseLevels noise;
};

/// Fixed per-class appearance: colour modes, texture and saliency levels and,
/// for objects, the heat channels that carry the class signature.
struct ClassAppearance {
    int class_id = 0;
    ClassKind kind = ClassKind::scene;
    std::vector<std::array<float, 3>> colors;
    float texture = 0.0f;
    float saliency = 0.0f;
    std::array<int, 2> channels{};        // objects only
    std::array<double, 2> weights{};
};

struct AppearanceModel {
    int heat_channels = 0;
    std::vector<ClassAppearance> classes;  // catalog order

    const ClassAppearance& get(int class_id) const;
};

inline constexpr int kDefaultHeatChannels = 64;
inline constexpr double kObjectBaseHeat = 0.0002;
/// Scene pixels respond on the channels no object class uses, with a weak floor elsewhere.
inline constexpr double kSceneBaseHeat = 0.01;
inline constexpr double kSceneFloorHeat = 0.001;
inline constexpr int kMinBackgroundChannels = 8;

/// Throws SpecError unless there are two heat channels per object class plus
/// at least kMinBackgroundChannels more.
AppearanceModel appearance_model(const ClassCatalog& catalog, int heat_channels = kDefaultHeatChannels);

/// Random but seeded scene layout that always contains scene class
/// `cover mod C_sce` and object class `cover mod C_obj`.
SceneSpec random_scene(const ClassCatalog& catalog, std::uint64_t seed, int cover, int height, int width,
                       const NoiseLevels& noise);

/// Throws SpecError on unknown classes, a layout that leaves pixels uncovered
/// or objects overlapping by more than 10% of the smaller one.
void validate_spec(const SceneSpec& spec, const ClassCatalog& catalog);

/// Rasterises a scene: colour, texture, edge and saliency maps, the slice plan,
/// per-slice heat maps and ground truth. Pure in (spec, model).
RawImage generate_scene(const SceneSpec& spec, const ClassCatalog& catalog, const AppearanceModel& model);

/// Registry matching the noise-free appearance exactly.
Registry exact_registry(const AppearanceModel& model, const ClassCatalog& catalog, int bins = kDefaultBins);

struct CorpusOptions {
    int count = 30;
    int height = 64;
    int width = 128;
    int heat_channels = kDefaultHeatChannels;
    NoiseLevels noise;
    std::uint64_t seed = 0;
    int heldout_every = 5;  // scene i is held out when i % heldout_every == heldout_every - 1
};

struct Corpus {
    ClassCatalog catalog;  // with seed pixels attached
    std::vector<RawImage> images;
    std::vector<bool> heldout;
};

/// Places each class's seed at the training-split pixel farthest from any label
/// change (first scene, then row-major order on ties).
ClassCatalog place_seeds(const ClassCatalog& catalog, const std::vector<RawImage>& images,
                         const std::vector<bool>& heldout);

Corpus generate_corpus(const ClassCatalog& catalog, const CorpusOptions& options, int jobs = 1);

/// Seed of scene `index` derived from a corpus seed.
std::uint64_t scene_seed(std::uint64_t corpus_seed, int index);

std::string scene_id(int index);

}  // namespace oneseed::synth
