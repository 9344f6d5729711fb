#pragma once

#include <filesystem>
#include <functional>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "oneseed/artifacts.hpp"
#include "oneseed/catalog.hpp"

namespace oneseed {

/// Semantic center of an object class.
struct ObjectRep {
    int class_id = 0;
    std::vector<double> center;  // L1-normalized
    std::vector<double> trace;   // objective after every accepted round, starting at initialization
};

/// Colour-texture pool of a scene class. Each member is the colour part
/// (`color_dim` entries) followed by the texture part, each summing to 1.
struct SceneRep {
    int class_id = 0;
    std::size_t color_dim = 0;
    std::vector<std::vector<double>> pool;

    std::span<const double> color(std::size_t g) const { return {pool[g].data(), color_dim}; }
    std::span<const double> texture(std::size_t g) const {
        return {pool[g].data() + color_dim, pool[g].size() - color_dim};
    }
};

struct Registry {
    std::vector<ObjectRep> objects;
    std::vector<SceneRep> scenes;

    const ObjectRep* find_object(int id) const;
    const SceneRep* find_scene(int id) const;
};

struct FitOptions {
    double top_fraction = 0.01;       // share of regions re-selected around an object center each round
    int max_rounds = 50;
    double tolerance = 1e-4;          // L1 change of a center that counts as converged
    double context_threshold = 0.5;   // scene neighbourhood: Sim_c(sp, seed) above this
    double grouping_threshold = 0.5;  // colour x texture similarity linking two neighbours
    int max_groups = 5;
};

/// Objective sum_{x in members} sum_n min(x_n, center_n).
double intersection_objective(std::span<const std::vector<double>> members, std::span<const double> center);

struct CenterFit {
    std::vector<double> center;
    std::vector<double> trace;
    std::vector<std::size_t> members;  // final selection, including the seed
};

/// Single-center E-M: start at vectors[seed], repeatedly select the top
/// max(1, ceil(top_fraction * n)) vectors by intersection with the center
/// (plus the seed), move the center to their L1-normalized mean, and stop on
/// convergence, on a would-be decrease of the objective, or after max_rounds.
CenterFit fit_center(const std::vector<std::vector<double>>& vectors, std::size_t seed, const FitOptions& options);

/// Region containing a seed pixel. Throws SeedError when the pixel lies outside the image.
int seed_region(const ImageArtifacts& image, int row, int col);

ObjectRep fit_object(int class_id, const ImageArtifacts& seed_image, int row, int col,
                     const FitOptions& options = {});
SceneRep fit_scene(int class_id, const ImageArtifacts& seed_image, int row, int col, const FitOptions& options = {});

/// Looks up encoded images by id; returns nullptr for unknown ids.
using ImageLookup = std::function<const ImageArtifacts*(const std::string&)>;

/// One representation per catalog class from its seed image. Throws
/// MissingSeedError naming the class when its seed or seed image is absent.
Registry fit_all(const ClassCatalog& catalog, const ImageLookup& lookup, const FitOptions& options = {});

/// `REPS v1` registry file: a text header line per class
/// (`<id> object 1 <dim>` or `<id> scene <G> <dim> <color_dim>`) followed by
/// G * dim little-endian float32 values.
void write_registry(const Registry& registry, std::ostream& out);
Registry read_registry(std::istream& in);
void save_registry(const Registry& registry, const std::filesystem::path& path);
Registry load_registry(const std::filesystem::path& path);

}  // namespace oneseed
