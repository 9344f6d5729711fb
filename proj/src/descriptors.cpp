#include <algorithm>
#include <cmath>
#include <numeric>

#include "oneseed/error.hpp"
#include "oneseed/superpix.hpp"

namespace oneseed {

double sim_hist(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size())
        throw DimError("sim_hist: length " + std::to_string(x.size()) + " vs " + std::to_string(y.size()));
    double s = 0.0;
    for (std::size_t n = 0; n < x.size(); ++n) s += std::min(x[n], y[n]);
    return s;
}

namespace {

int bin_of(double v, int bins) {
    v = std::clamp(v, 0.0, 1.0);
    return std::min(static_cast<int>(v * bins), bins - 1);
}

void check_dims(const FeatureMap& m, const RegionSet& rs, std::size_t channels, const char* what) {
    if (m.height() != rs.height || m.width() != rs.width)
        throw DimError(std::string("describe: ") + what + " map dims differ from the region raster");
    if (channels != 0 && m.channels() != channels)
        throw DimError(std::string("describe: ") + what + " map must have " + std::to_string(channels) +
                       " channel(s)");
}

std::vector<double> region_histogram(const FeatureMap& map, std::size_t channel,
                                     const std::vector<std::size_t>& pixels, int bins) {
    std::vector<double> h(bins, 0.0);
    for (std::size_t p : pixels) h[bin_of(map.pixel(p)[channel], bins)] += 1.0;
    const auto n = static_cast<double>(pixels.size());
    for (double& v : h) v /= n;
    return h;
}

}  // namespace

std::vector<double> unit_histogram(std::span<const float> values, int bins) {
    if (bins < 1) throw RangeError("histogram needs at least one bin");
    std::vector<double> h(bins, 0.0);
    if (values.empty()) return h;
    for (float v : values) h[bin_of(v, bins)] += 1.0;
    for (double& v : h) v /= static_cast<double>(values.size());
    return h;
}

std::vector<RegionDescriptor> describe(const RegionSet& regions, const FeatureMap& fused_heat,
                                       const FeatureMap& color, const FeatureMap& texture,
                                       const SaliencyViews& saliency, const DescribeOptions& options) {
    check_dims(fused_heat, regions, 0, "heat");
    check_dims(color, regions, 3, "colour");
    check_dims(texture, regions, 1, "texture");
    check_dims(saliency.global, regions, 1, "global saliency");
    check_dims(saliency.local1, regions, 1, "local saliency 1");
    check_dims(saliency.local2, regions, 1, "local saliency 2");
    const int bins = options.bins;
    if (bins < 1) throw RangeError("describe: bins must be positive");

    const std::size_t ch = fused_heat.channels();
    std::vector<RegionDescriptor> out(regions.count);
    for (int k = 0; k < regions.count; ++k) {
        const auto& px = regions.members[k];
        RegionDescriptor& d = out[k];

        d.heat.assign(ch, 0.0);
        for (std::size_t p : px) {
            const auto v = fused_heat.pixel(p);
            for (std::size_t c = 0; c < ch; ++c) d.heat[c] += std::max(0.0f, v[c]);
        }
        const double total = std::accumulate(d.heat.begin(), d.heat.end(), 0.0);
        if (total > 0.0) {
            for (double& v : d.heat) v /= total;
        } else if (ch > 0) {
            std::fill(d.heat.begin(), d.heat.end(), 1.0 / static_cast<double>(ch));
        }

        d.color.reserve(3 * bins);
        for (std::size_t c = 0; c < 3; ++c) {
            for (double v : region_histogram(color, c, px, bins)) d.color.push_back(v / 3.0);
        }
        d.texture = region_histogram(texture, 0, px, bins);
        d.sal_global = region_histogram(saliency.global, 0, px, bins);
        d.sal_local1 = region_histogram(saliency.local1, 0, px, bins);
        d.sal_local2 = region_histogram(saliency.local2, 0, px, bins);
    }
    return out;
}

Matrix widest_path_closure(int node_count, const std::vector<WeightedEdge>& edges) {
    const auto k = static_cast<std::size_t>(node_count);
    // Kruskal on descending weights; ties resolved by (a, b) for determinism.
    std::vector<WeightedEdge> sorted = edges;
    std::stable_sort(sorted.begin(), sorted.end(), [](const WeightedEdge& x, const WeightedEdge& y) {
        if (x.weight != y.weight) return x.weight > y.weight;
        return std::pair(x.a, x.b) < std::pair(y.a, y.b);
    });
    std::vector<int> parent(k);
    std::iota(parent.begin(), parent.end(), 0);
    auto find = [&](int v) {
        while (parent[v] != v) v = parent[v] = parent[parent[v]];
        return v;
    };
    std::vector<std::vector<std::pair<int, double>>> tree(k);
    for (const auto& e : sorted) {
        const int ra = find(e.a), rb = find(e.b);
        if (ra == rb) continue;
        parent[ra] = rb;
        tree[e.a].push_back({e.b, e.weight});
        tree[e.b].push_back({e.a, e.weight});
    }

    Matrix out(k, k, 0.0);
    std::vector<int> stack;
    std::vector<double> bottleneck(k);
    std::vector<char> seen(k);
    for (std::size_t src = 0; src < k; ++src) {
        std::fill(seen.begin(), seen.end(), 0);
        bottleneck[src] = 1.0;
        seen[src] = 1;
        stack.assign(1, static_cast<int>(src));
        while (!stack.empty()) {
            const int v = stack.back();
            stack.pop_back();
            out(src, v) = bottleneck[v];
            for (const auto& [w, weight] : tree[v]) {
                if (seen[w]) continue;
                seen[w] = 1;
                bottleneck[w] = std::min(bottleneck[v], weight);
                stack.push_back(w);
            }
        }
        out(src, src) = 1.0;
    }
    return out;
}

Matrix edge_similarity(const RegionSet& regions, const FeatureMap& edge) {
    if (edge.height() != regions.height || edge.width() != regions.width || edge.channels() != 1)
        throw DimError("edge_similarity: edge map must be a single-channel map of the region raster's size");
    std::vector<WeightedEdge> edges;
    edges.reserve(regions.adjacency.size());
    for (const auto& adj : regions.adjacency) {
        double s = 0.0;
        for (std::size_t p : adj.boundary) s += std::clamp(static_cast<double>(edge.pixel(p)[0]), 0.0, 1.0);
        edges.push_back({adj.a, adj.b, 1.0 - s / static_cast<double>(adj.boundary.size())});
    }
    Matrix e = widest_path_closure(regions.count, edges);
    for (const auto& w : edges) {
        e(w.a, w.b) = w.weight;
        e(w.b, w.a) = w.weight;
    }
    return e;
}

ContextMatrix context_matrix(const RegionSet& regions, const std::vector<RegionDescriptor>& descriptors,
                             const Matrix& edge) {
    const auto k = static_cast<std::size_t>(regions.count);
    if (descriptors.size() != k) throw DimError("context_matrix: one descriptor per region required");
    if (edge.rows() != k || edge.cols() != k) throw ShapeError("context_matrix: edge matrix must be K x K");

    ContextMatrix ctx{Matrix(k, k), edge, Matrix(k, k), Matrix(k, k), Matrix(k, k)};
    for (std::size_t i = 0; i < k; ++i) {
        ctx.similarity(i, i) = ctx.global(i, i) = ctx.local1(i, i) = ctx.local2(i, i) = 1.0;
        for (std::size_t j = i + 1; j < k; ++j) {
            const double g = sim_hist(descriptors[i].sal_global, descriptors[j].sal_global);
            const double l1 = sim_hist(descriptors[i].sal_local1, descriptors[j].sal_local1);
            const double l2 = sim_hist(descriptors[i].sal_local2, descriptors[j].sal_local2);
            const double s = edge(i, j) * g * std::max(l1, l2);
            ctx.global(i, j) = ctx.global(j, i) = g;
            ctx.local1(i, j) = ctx.local1(j, i) = l1;
            ctx.local2(i, j) = ctx.local2(j, i) = l2;
            ctx.similarity(i, j) = ctx.similarity(j, i) = s;
        }
    }
    return ctx;
}

}  // namespace oneseed
