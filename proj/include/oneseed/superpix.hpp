#pragma once

#include <cstddef>
#include <filesystem>
#include <span>
#include <utility>
#include <vector>

#include "oneseed/featio.hpp"
#include "oneseed/matrix.hpp"

namespace oneseed {

/// Superpixel partition of one image plus its region adjacency graph.
struct RegionSet {
    struct Adjacency {
        int a = 0;  // a < b
        int b = 0;
        std::vector<std::size_t> boundary;  // pixel indices on either side of the shared border, sorted
    };

    std::size_t height = 0;
    std::size_t width = 0;
    std::vector<int> labels;  // pixel -> region index in [0, count)
    int count = 0;
    std::vector<std::vector<std::size_t>> members;
    std::vector<std::pair<double, double>> centroids;  // (row, col)
    std::vector<Adjacency> adjacency;                   // sorted by (a, b)
    std::vector<std::vector<int>> neighbors;

    std::size_t size(int region) const { return members[region].size(); }
    int region_at(std::size_t r, std::size_t c) const { return labels[r * width + c]; }
};

/// Builds the region graph from a label raster. Labels must cover 0..K-1 with
/// every region non-empty and 4-connected; throws ValidationError otherwise.
RegionSet build_region_set(std::size_t height, std::size_t width, std::vector<int> labels);

struct SegmentOptions {
    double compactness = 0.1;  // weight of spatial distance, in colour units per grid step
    int iterations = 10;
};

/// Local k-means in joint colour-position space seeded on a regular grid,
/// followed by a connectivity pass that keeps the largest fragment of every
/// cluster and grows those fragments over the rest.
/// Throws RangeError unless 1 <= target_k <= pixel count.
RegionSet segment(const FeatureMap& color, int target_k, const SegmentOptions& options = {});

/// Histogram intersection: sum_n min(x_n, y_n). Throws DimError on length mismatch.
double sim_hist(std::span<const double> x, std::span<const double> y);

/// Uniform-bin histogram on [0,1] (top edge inclusive, values clamped), L1-normalized.
std::vector<double> unit_histogram(std::span<const float> values, int bins);

inline constexpr int kDefaultBins = 32;

struct SaliencyViews {
    FeatureMap global;
    FeatureMap local1;
    FeatureMap local2;
};

struct RegionDescriptor {
    std::vector<double> heat;     // C_h, L1-normalized
    std::vector<double> color;    // 3 * bins, each channel L1-normalized then scaled by 1/3
    std::vector<double> texture;  // bins
    std::vector<double> sal_global;
    std::vector<double> sal_local1;
    std::vector<double> sal_local2;
};

struct DescribeOptions {
    int bins = kDefaultBins;
};

/// Per-region descriptors. Heat values are clamped at zero before averaging;
/// a region with an all-zero mean heat vector gets the uniform vector.
std::vector<RegionDescriptor> describe(const RegionSet& regions, const FeatureMap& fused_heat,
                                       const FeatureMap& color, const FeatureMap& texture,
                                       const SaliencyViews& saliency, const DescribeOptions& options = {});

struct WeightedEdge {
    int a = 0;
    int b = 0;
    double weight = 0.0;
};

/// Maximin (widest-path) values between every pair of nodes of an undirected
/// weighted graph, computed on its maximum spanning forest. Diagonal is 1;
/// pairs in different components get 0.
Matrix widest_path_closure(int node_count, const std::vector<WeightedEdge>& edges);

/// E(i,j): 1 - mean edge magnitude along the shared border for adjacent pairs,
/// widest-path value over the adjacency graph for the rest, 1 on the diagonal.
Matrix edge_similarity(const RegionSet& regions, const FeatureMap& edge);

struct ContextMatrix {
    Matrix similarity;  // E * Sim_g * max(Sim_l1, Sim_l2)
    Matrix edge;
    Matrix global;
    Matrix local1;
    Matrix local2;
};

ContextMatrix context_matrix(const RegionSet& regions, const std::vector<RegionDescriptor>& descriptors,
                             const Matrix& edge);

/// Region raster as PGM (16-bit when K > 256) plus a `REGIONS v1` text sidecar
/// (`regions.pgm` -> `regions.txt`) listing centroids and adjacency.
void save_regions(const RegionSet& regions, const std::filesystem::path& pgm_path);
RegionSet load_regions(const std::filesystem::path& pgm_path);

}  // namespace oneseed
