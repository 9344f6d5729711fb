#include "oneseed/superpix.hpp"

#include <algorithm>
#include <deque>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>

#include "oneseed/error.hpp"

namespace oneseed {

RegionSet build_region_set(std::size_t height, std::size_t width, std::vector<int> labels) {
    if (labels.size() != height * width) throw DimError("region raster size does not match dims");
    if (labels.empty()) throw ValidationError("region raster is empty");
    RegionSet rs;
    rs.height = height;
    rs.width = width;
    int max_label = -1;
    for (int l : labels) {
        if (l < 0) throw ValidationError("negative region label");
        max_label = std::max(max_label, l);
    }
    rs.count = max_label + 1;
    rs.labels = std::move(labels);
    rs.members.assign(rs.count, {});
    for (std::size_t p = 0; p < rs.labels.size(); ++p) rs.members[rs.labels[p]].push_back(p);

    rs.centroids.resize(rs.count);
    for (int k = 0; k < rs.count; ++k) {
        if (rs.members[k].empty()) throw ValidationError("region " + std::to_string(k) + " is empty");
        double sr = 0.0, sc = 0.0;
        for (std::size_t p : rs.members[k]) {
            sr += static_cast<double>(p / width);
            sc += static_cast<double>(p % width);
        }
        const auto n = static_cast<double>(rs.members[k].size());
        rs.centroids[k] = {sr / n, sc / n};
    }

    // Connectivity: flood each region from its first member.
    std::vector<char> seen(rs.labels.size(), 0);
    std::vector<std::size_t> stack;
    for (int k = 0; k < rs.count; ++k) {
        std::size_t reached = 0;
        stack.assign(1, rs.members[k].front());
        seen[stack.back()] = 1;
        while (!stack.empty()) {
            const std::size_t p = stack.back();
            stack.pop_back();
            ++reached;
            const std::size_t r = p / width, c = p % width;
            const std::size_t nbrs[4] = {r > 0 ? p - width : p, r + 1 < height ? p + width : p,
                                         c > 0 ? p - 1 : p, c + 1 < width ? p + 1 : p};
            for (std::size_t q : nbrs)
                if (!seen[q] && rs.labels[q] == k) {
                    seen[q] = 1;
                    stack.push_back(q);
                }
        }
        if (reached != rs.members[k].size())
            throw ValidationError("region " + std::to_string(k) + " is not connected");
    }

    std::map<std::pair<int, int>, std::vector<std::size_t>> borders;
    auto touch = [&](std::size_t p, std::size_t q) {
        const int a = rs.labels[p], b = rs.labels[q];
        if (a == b) return;
        auto& list = borders[{std::min(a, b), std::max(a, b)}];
        list.push_back(p);
        list.push_back(q);
    };
    for (std::size_t r = 0; r < height; ++r)
        for (std::size_t c = 0; c < width; ++c) {
            const std::size_t p = r * width + c;
            if (c + 1 < width) touch(p, p + 1);
            if (r + 1 < height) touch(p, p + width);
        }
    rs.neighbors.assign(rs.count, {});
    for (auto& [key, pixels] : borders) {
        std::sort(pixels.begin(), pixels.end());
        pixels.erase(std::unique(pixels.begin(), pixels.end()), pixels.end());
        rs.adjacency.push_back({key.first, key.second, std::move(pixels)});
        rs.neighbors[key.first].push_back(key.second);
        rs.neighbors[key.second].push_back(key.first);
    }
    for (auto& n : rs.neighbors) std::sort(n.begin(), n.end());
    return rs;
}

namespace {

struct Center {
    std::vector<double> feature;
    double row = 0.0;  // pixel-center coordinates
    double col = 0.0;
};

// Keeps the largest 4-connected fragment of every cluster and grows the kept
// fragments breadth-first over the remaining pixels, so every region is connected.
std::vector<int> enforce_connectivity(const std::vector<int>& raw, std::size_t height, std::size_t width) {
    const std::size_t n = raw.size();
    std::vector<int> component(n, -1);
    std::vector<std::size_t> sizes, firsts;
    std::vector<std::size_t> stack;
    const auto for_neighbors = [&](std::size_t p, auto&& fn) {
        const std::size_t r = p / width, c = p % width;
        if (r > 0) fn(p - width);
        if (r + 1 < height) fn(p + width);
        if (c > 0) fn(p - 1);
        if (c + 1 < width) fn(p + 1);
    };
    for (std::size_t start = 0; start < n; ++start) {
        if (component[start] >= 0) continue;
        const int id = static_cast<int>(sizes.size());
        std::size_t size = 0;
        component[start] = id;
        stack.assign(1, start);
        while (!stack.empty()) {
            const std::size_t p = stack.back();
            stack.pop_back();
            ++size;
            for_neighbors(p, [&](std::size_t q) {
                if (component[q] < 0 && raw[q] == raw[start]) {
                    component[q] = id;
                    stack.push_back(q);
                }
            });
        }
        sizes.push_back(size);
        firsts.push_back(start);
    }

    // Largest fragment per cluster; the earlier fragment wins ties.
    std::map<int, int> best;
    for (std::size_t f = 0; f < sizes.size(); ++f) {
        const int cluster = raw[firsts[f]];
        if (cluster < 0) continue;
        auto it = best.find(cluster);
        if (it == best.end() || sizes[f] > sizes[static_cast<std::size_t>(it->second)]) best[cluster] = static_cast<int>(f);
    }
    std::vector<int> region_of_fragment(sizes.size(), -1);
    std::vector<std::pair<std::size_t, int>> kept;  // (first pixel, fragment) in raster order
    for (const auto& [cluster, f] : best) kept.emplace_back(firsts[static_cast<std::size_t>(f)], f);
    std::sort(kept.begin(), kept.end());
    for (std::size_t i = 0; i < kept.size(); ++i) region_of_fragment[static_cast<std::size_t>(kept[i].second)] = static_cast<int>(i);

    std::vector<int> out(n, -1);
    std::deque<std::size_t> queue;
    for (std::size_t p = 0; p < n; ++p) {
        const int region = region_of_fragment[static_cast<std::size_t>(component[p])];
        if (region < 0) continue;
        out[p] = region;
        queue.push_back(p);
    }
    if (queue.empty()) return std::vector<int>(n, 0);
    while (!queue.empty()) {
        const std::size_t p = queue.front();
        queue.pop_front();
        for_neighbors(p, [&](std::size_t q) {
            if (out[q] < 0) {
                out[q] = out[p];
                queue.push_back(q);
            }
        });
    }
    return out;
}

}  // namespace

RegionSet segment(const FeatureMap& color, int target_k, const SegmentOptions& options) {
    const std::size_t height = color.height(), width = color.width(), channels = color.channels();
    const std::size_t n = height * width;
    if (target_k < 1 || static_cast<std::size_t>(target_k) > n)
        throw RangeError("target_K must lie in [1, pixel count], got " + std::to_string(target_k));
    if (channels == 0) throw DimError("segment: colour map has no channels");

    const double aspect = static_cast<double>(width) / static_cast<double>(height);
    int grid_cols = std::max(1, static_cast<int>(std::lround(std::sqrt(target_k * aspect))));
    grid_cols = std::min<int>(grid_cols, static_cast<int>(width));
    int grid_rows = std::max(1, static_cast<int>(std::lround(static_cast<double>(target_k) / grid_cols)));
    grid_rows = std::min<int>(grid_rows, static_cast<int>(height));
    const double step_r = static_cast<double>(height) / grid_rows;
    const double step_c = static_cast<double>(width) / grid_cols;
    const double step = std::sqrt(step_r * step_c);

    auto lightness = [&](std::size_t r, std::size_t c) {
        double s = 0.0;
        for (float v : color.pixel(r, c)) s += v;
        return s / static_cast<double>(channels);
    };
    auto gradient = [&](std::size_t r, std::size_t c) {
        if (r == 0 || c == 0 || r + 1 >= height || c + 1 >= width) return std::numeric_limits<double>::infinity();
        const double dx = lightness(r, c + 1) - lightness(r, c - 1);
        const double dy = lightness(r + 1, c) - lightness(r - 1, c);
        return dx * dx + dy * dy;
    };

    std::vector<Center> centers;
    for (int i = 0; i < grid_rows; ++i) {
        for (int j = 0; j < grid_cols; ++j) {
            auto r = static_cast<std::size_t>((i + 0.5) * step_r);
            auto c = static_cast<std::size_t>((j + 0.5) * step_c);
            r = std::min(r, height - 1);
            c = std::min(c, width - 1);
            // Move the seed off strong gradients (3x3 neighbourhood, first minimum wins).
            double best = gradient(r, c);
            std::size_t br = r, bc = c;
            if (std::isfinite(best) && best > 0.0) {
                for (std::size_t rr = r - 1; rr <= r + 1; ++rr)
                    for (std::size_t cc = c - 1; cc <= c + 1; ++cc) {
                        const double g = gradient(rr, cc);
                        if (g < best) {
                            best = g;
                            br = rr;
                            bc = cc;
                        }
                    }
            }
            Center ctr;
            const auto px = color.pixel(br, bc);
            ctr.feature.assign(px.begin(), px.end());
            // Unperturbed seeds keep the exact cell centre so uniform images split evenly.
            ctr.row = (br == r && bc == c) ? (i + 0.5) * step_r : br + 0.5;
            ctr.col = (br == r && bc == c) ? (j + 0.5) * step_c : bc + 0.5;
            centers.push_back(std::move(ctr));
        }
    }

    const double spatial_weight = (options.compactness / step) * (options.compactness / step);
    std::vector<int> assign(n, -1);
    std::vector<double> dist(n);
    for (int iter = 0; iter < std::max(1, options.iterations); ++iter) {
        std::fill(dist.begin(), dist.end(), std::numeric_limits<double>::infinity());
        std::fill(assign.begin(), assign.end(), -1);
        for (std::size_t k = 0; k < centers.size(); ++k) {
            const Center& ctr = centers[k];
            const auto r0 = static_cast<long>(std::floor(ctr.row - step_r));
            const auto r1 = static_cast<long>(std::ceil(ctr.row + step_r));
            const auto c0 = static_cast<long>(std::floor(ctr.col - step_c));
            const auto c1 = static_cast<long>(std::ceil(ctr.col + step_c));
            for (long r = std::max(0L, r0); r < std::min<long>(static_cast<long>(height), r1); ++r) {
                for (long c = std::max(0L, c0); c < std::min<long>(static_cast<long>(width), c1); ++c) {
                    const auto px = color.pixel(r, c);
                    double dc = 0.0;
                    for (std::size_t ch = 0; ch < channels; ++ch) {
                        const double d = px[ch] - ctr.feature[ch];
                        dc += d * d;
                    }
                    const double dr = (r + 0.5) - ctr.row, dcol = (c + 0.5) - ctr.col;
                    const double d = dc + spatial_weight * (dr * dr + dcol * dcol);
                    const std::size_t p = static_cast<std::size_t>(r) * width + static_cast<std::size_t>(c);
                    if (d < dist[p]) {
                        dist[p] = d;
                        assign[p] = static_cast<int>(k);
                    }
                }
            }
        }
        std::vector<Center> sums(centers.size());
        std::vector<std::size_t> counts(centers.size(), 0);
        for (auto& s : sums) s.feature.assign(channels, 0.0);
        for (std::size_t p = 0; p < n; ++p) {
            const int k = assign[p];
            if (k < 0) continue;
            const auto px = color.pixel(p);
            for (std::size_t ch = 0; ch < channels; ++ch) sums[k].feature[ch] += px[ch];
            sums[k].row += static_cast<double>(p / width) + 0.5;
            sums[k].col += static_cast<double>(p % width) + 0.5;
            ++counts[k];
        }
        for (std::size_t k = 0; k < centers.size(); ++k) {
            if (counts[k] == 0) continue;
            const auto cnt = static_cast<double>(counts[k]);
            for (std::size_t ch = 0; ch < channels; ++ch) centers[k].feature[ch] = sums[k].feature[ch] / cnt;
            centers[k].row = sums[k].row / cnt;
            centers[k].col = sums[k].col / cnt;
        }
    }

    return build_region_set(height, width, enforce_connectivity(assign, height, width));
}

void save_regions(const RegionSet& regions, const std::filesystem::path& pgm_path) {
    if (regions.count > 65536) throw CapacityError("more than 65536 regions cannot be stored as PGM");
    PgmImage img;
    img.height = regions.height;
    img.width = regions.width;
    img.maxval = static_cast<std::uint16_t>(std::max(255, regions.count - 1));
    img.values.assign(regions.labels.begin(), regions.labels.end());
    write_pgm(img, pgm_path);

    auto txt = pgm_path;
    txt.replace_extension(".txt");
    std::ofstream out(txt);
    if (!out) throw IOError("cannot write " + txt.string());
    out << "REGIONS v1\n" << regions.count << ' ' << regions.height << ' ' << regions.width << '\n';
    out.precision(17);
    for (int k = 0; k < regions.count; ++k)
        out << "region " << k << ' ' << regions.size(k) << ' ' << regions.centroids[k].first << ' '
            << regions.centroids[k].second << '\n';
    for (const auto& adj : regions.adjacency)
        out << "adjacent " << adj.a << ' ' << adj.b << ' ' << adj.boundary.size() << '\n';
}

RegionSet load_regions(const std::filesystem::path& pgm_path) {
    const PgmImage img = read_pgm(pgm_path);
    RegionSet rs = build_region_set(img.height, img.width, std::vector<int>(img.values.begin(), img.values.end()));
    auto txt = pgm_path;
    txt.replace_extension(".txt");
    std::ifstream in(txt);
    if (in) {
        std::string header;
        int count = 0;
        std::getline(in, header);
        if (header != "REGIONS v1" || !(in >> count)) throw FormatError(txt.string() + ": bad REGIONS header");
        if (count != rs.count)
            throw FormatError(txt.string() + ": sidecar lists " + std::to_string(count) + " regions, raster has " +
                              std::to_string(rs.count));
    }
    return rs;
}

}  // namespace oneseed
