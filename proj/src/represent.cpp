#include "oneseed/represent.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <fstream>
#include <istream>
#include <numeric>
#include <ostream>
#include <sstream>

#include "oneseed/error.hpp"

namespace oneseed {

namespace {

void normalize_l1(std::span<double> v) {
    const double s = std::accumulate(v.begin(), v.end(), 0.0);
    if (s > 0.0) {
        for (double& x : v) x /= s;
    } else if (!v.empty()) {
        std::fill(v.begin(), v.end(), 1.0 / static_cast<double>(v.size()));
    }
}

std::vector<double> mean_of(const std::vector<std::vector<double>>& vectors, const std::vector<std::size_t>& members) {
    std::vector<double> m(vectors[members.front()].size(), 0.0);
    for (std::size_t i : members)
        for (std::size_t n = 0; n < m.size(); ++n) m[n] += vectors[i][n];
    for (double& x : m) x /= static_cast<double>(members.size());
    return m;
}

double l1_distance(std::span<const double> a, std::span<const double> b) {
    double d = 0.0;
    for (std::size_t n = 0; n < a.size(); ++n) d += std::abs(a[n] - b[n]);
    return d;
}

double objective_over(const std::vector<std::vector<double>>& vectors, const std::vector<std::size_t>& members,
                      std::span<const double> center) {
    double s = 0.0;
    for (std::size_t i : members) s += sim_hist(vectors[i], center);
    return s;
}

std::vector<std::size_t> select_top(const std::vector<std::vector<double>>& vectors, std::span<const double> center,
                                    std::size_t seed, double top_fraction) {
    const std::size_t n = vectors.size();
    const auto take = std::min(
        n, std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(top_fraction * static_cast<double>(n) - 1e-12))));
    std::vector<double> score(n);
    for (std::size_t i = 0; i < n; ++i) score[i] = sim_hist(vectors[i], center);
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return score[a] > score[b]; });
    std::vector<std::size_t> chosen(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(take));
    if (std::find(chosen.begin(), chosen.end(), seed) == chosen.end()) chosen.push_back(seed);
    std::sort(chosen.begin(), chosen.end());
    return chosen;
}

std::vector<double> concat_scene_vector(const RegionDescriptor& d) {
    std::vector<double> v = d.color;
    v.insert(v.end(), d.texture.begin(), d.texture.end());
    return v;
}

std::vector<double> part_normalized_mean(const std::vector<std::vector<double>>& vectors,
                                         const std::vector<std::size_t>& members, std::size_t color_dim) {
    std::vector<double> m = mean_of(vectors, members);
    normalize_l1(std::span<double>(m.data(), color_dim));
    normalize_l1(std::span<double>(m.data() + color_dim, m.size() - color_dim));
    return m;
}

}  // namespace

const ObjectRep* Registry::find_object(int id) const {
    for (const auto& r : objects)
        if (r.class_id == id) return &r;
    return nullptr;
}

const SceneRep* Registry::find_scene(int id) const {
    for (const auto& r : scenes)
        if (r.class_id == id) return &r;
    return nullptr;
}

double intersection_objective(std::span<const std::vector<double>> members, std::span<const double> center) {
    double s = 0.0;
    for (const auto& x : members) s += sim_hist(x, center);
    return s;
}

CenterFit fit_center(const std::vector<std::vector<double>>& vectors, std::size_t seed, const FitOptions& options) {
    if (vectors.empty()) throw EmptyError("fit_center: no vectors");
    if (seed >= vectors.size()) throw SeedError("fit_center: seed index out of range");

    CenterFit fit;
    fit.center = vectors[seed];
    normalize_l1(fit.center);
    fit.members = select_top(vectors, fit.center, seed, options.top_fraction);
    double objective = objective_over(vectors, fit.members, fit.center);
    fit.trace.push_back(objective);

    for (int round = 0; round < options.max_rounds; ++round) {
        std::vector<double> candidate = mean_of(vectors, fit.members);
        normalize_l1(candidate);
        // M-step guard: the new center must not be worse on the current selection.
        if (objective_over(vectors, fit.members, candidate) < objective) break;
        auto reselected = select_top(vectors, candidate, seed, options.top_fraction);
        const double next = objective_over(vectors, reselected, candidate);
        if (next < objective) break;

        const double change = l1_distance(candidate, fit.center);
        fit.center = std::move(candidate);
        fit.members = std::move(reselected);
        objective = next;
        fit.trace.push_back(objective);
        if (change < options.tolerance) break;
    }
    return fit;
}

int seed_region(const ImageArtifacts& image, int row, int col) {
    if (row < 0 || col < 0 || static_cast<std::size_t>(row) >= image.height ||
        static_cast<std::size_t>(col) >= image.width)
        throw SeedError("seed pixel (" + std::to_string(row) + "," + std::to_string(col) + ") lies outside image " +
                        image.id);
    if (image.regions.count == 0) throw EmptyError("image " + image.id + " has no regions");
    return image.regions.region_at(row, col);
}

ObjectRep fit_object(int class_id, const ImageArtifacts& seed_image, int row, int col, const FitOptions& options) {
    const int seed = seed_region(seed_image, row, col);
    std::vector<std::vector<double>> heat;
    heat.reserve(seed_image.descriptors.size());
    for (const auto& d : seed_image.descriptors) heat.push_back(d.heat);
    CenterFit fit = fit_center(heat, static_cast<std::size_t>(seed), options);
    return ObjectRep{class_id, std::move(fit.center), std::move(fit.trace)};
}

SceneRep fit_scene(int class_id, const ImageArtifacts& seed_image, int row, int col, const FitOptions& options) {
    const int seed = seed_region(seed_image, row, col);
    const auto& desc = seed_image.descriptors;
    const auto& ctx = seed_image.context.similarity;
    const std::size_t color_dim = desc[seed].color.size();

    std::vector<std::size_t> hood;
    for (std::size_t j = 0; j < desc.size(); ++j)
        if (static_cast<int>(j) == seed || ctx(j, seed) > options.context_threshold) hood.push_back(j);

    // Connected components of the colour x texture threshold graph on the neighbourhood.
    std::vector<std::size_t> parent(hood.size());
    std::iota(parent.begin(), parent.end(), 0);
    auto find = [&](std::size_t v) {
        while (parent[v] != v) v = parent[v] = parent[parent[v]];
        return v;
    };
    for (std::size_t a = 0; a < hood.size(); ++a)
        for (std::size_t b = a + 1; b < hood.size(); ++b) {
            const auto& x = desc[hood[a]];
            const auto& y = desc[hood[b]];
            if (sim_hist(x.color, y.color) * sim_hist(x.texture, y.texture) > options.grouping_threshold)
                parent[find(a)] = find(b);
        }
    std::vector<std::vector<std::size_t>> groups;  // region indices
    std::vector<std::size_t> group_of_root(hood.size(), SIZE_MAX);
    for (std::size_t a = 0; a < hood.size(); ++a) {
        const std::size_t root = find(a);
        if (group_of_root[root] == SIZE_MAX) {
            group_of_root[root] = groups.size();
            groups.emplace_back();
        }
        groups[group_of_root[root]].push_back(hood[a]);
    }
    // Groups are created in order of their smallest member, so a stable sort by size keeps that tie-break.
    std::stable_sort(groups.begin(), groups.end(),
                     [](const auto& a, const auto& b) { return a.size() > b.size(); });
    if (groups.size() > static_cast<std::size_t>(std::max(1, options.max_groups)))
        groups.resize(static_cast<std::size_t>(std::max(1, options.max_groups)));

    std::vector<std::vector<double>> vectors;
    std::vector<std::size_t> assignment;
    for (std::size_t g = 0; g < groups.size(); ++g)
        for (std::size_t region : groups[g]) {
            vectors.push_back(concat_scene_vector(desc[region]));
            assignment.push_back(g);
        }
    const std::size_t group_count = groups.size();

    auto centers_for = [&](const std::vector<std::size_t>& assign, const std::vector<std::vector<double>>& previous) {
        std::vector<std::vector<double>> centers = previous;
        for (std::size_t g = 0; g < group_count; ++g) {
            std::vector<std::size_t> members;
            for (std::size_t i = 0; i < assign.size(); ++i)
                if (assign[i] == g) members.push_back(i);
            if (!members.empty()) centers[g] = part_normalized_mean(vectors, members, color_dim);
        }
        return centers;
    };
    auto objective_of = [&](const std::vector<std::size_t>& assign, const std::vector<std::vector<double>>& centers) {
        double s = 0.0;
        for (std::size_t i = 0; i < assign.size(); ++i) s += sim_hist(vectors[i], centers[assign[i]]);
        return s;
    };

    std::vector<std::vector<double>> centers = centers_for(assignment, std::vector<std::vector<double>>(group_count));
    double objective = objective_of(assignment, centers);
    for (int round = 0; round < options.max_rounds; ++round) {
        std::vector<std::size_t> next_assign(vectors.size());
        for (std::size_t i = 0; i < vectors.size(); ++i) {
            std::size_t best = 0;
            double best_sim = -1.0;
            for (std::size_t g = 0; g < group_count; ++g) {
                const double s = sim_hist(vectors[i], centers[g]);
                if (s > best_sim) {
                    best_sim = s;
                    best = g;
                }
            }
            next_assign[i] = best;
        }
        auto next_centers = centers_for(next_assign, centers);
        const double next = objective_of(next_assign, next_centers);
        if (next < objective) break;
        double change = 0.0;
        for (std::size_t g = 0; g < group_count; ++g) change += l1_distance(next_centers[g], centers[g]);
        const bool same = next_assign == assignment;
        centers = std::move(next_centers);
        assignment = std::move(next_assign);
        objective = next;
        if (same && change < options.tolerance) break;
    }

    SceneRep rep{class_id, color_dim, {}};
    for (std::size_t g = 0; g < group_count; ++g)
        if (std::find(assignment.begin(), assignment.end(), g) != assignment.end()) rep.pool.push_back(centers[g]);
    return rep;
}

Registry fit_all(const ClassCatalog& catalog, const ImageLookup& lookup, const FitOptions& options) {
    Registry reg;
    for (const auto& c : catalog.classes()) {
        if (!c.seed) throw MissingSeedError("class '" + c.name + "' has no seed pixel");
        const ImageArtifacts* image = lookup(c.seed->image);
        if (!image)
            throw MissingSeedError("seed image '" + c.seed->image + "' of class '" + c.name + "' is not available");
        if (c.kind == ClassKind::object)
            reg.objects.push_back(fit_object(c.id, *image, c.seed->row, c.seed->col, options));
        else
            reg.scenes.push_back(fit_scene(c.id, *image, c.seed->row, c.seed->col, options));
    }
    return reg;
}

namespace {

void put_floats(std::ostream& out, std::span<const double> values) {
    for (double v : values) {
        const auto bits = std::bit_cast<std::uint32_t>(static_cast<float>(v));
        const char bytes[4] = {static_cast<char>(bits & 0xFF), static_cast<char>((bits >> 8) & 0xFF),
                               static_cast<char>((bits >> 16) & 0xFF), static_cast<char>((bits >> 24) & 0xFF)};
        out.write(bytes, 4);
    }
}

std::vector<double> get_floats(std::istream& in, std::size_t count) {
    std::vector<double> out(count);
    for (auto& v : out) {
        unsigned char b[4];
        if (!in.read(reinterpret_cast<char*>(b), 4)) throw FormatError("registry: truncated vector data");
        const std::uint32_t bits = b[0] | (b[1] << 8) | (b[2] << 16) | (static_cast<std::uint32_t>(b[3]) << 24);
        v = std::bit_cast<float>(bits);
    }
    return out;
}

}  // namespace

void write_registry(const Registry& registry, std::ostream& out) {
    out << "REPS v1\n";
    for (const auto& r : registry.objects) {
        out << r.class_id << " object 1 " << r.center.size() << '\n';
        put_floats(out, r.center);
    }
    for (const auto& r : registry.scenes) {
        const std::size_t dim = r.pool.empty() ? 0 : r.pool.front().size();
        out << r.class_id << " scene " << r.pool.size() << ' ' << dim << ' ' << r.color_dim << '\n';
        for (const auto& v : r.pool) put_floats(out, v);
    }
}

Registry read_registry(std::istream& in) {
    std::string line;
    if (!std::getline(in, line) || line != "REPS v1") throw FormatError("registry: missing 'REPS v1' header");
    Registry reg;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::istringstream ls(line);
        int id = 0;
        std::string kind;
        std::size_t groups = 0, dim = 0;
        if (!(ls >> id >> kind >> groups >> dim)) throw FormatError("registry: bad class header '" + line + "'");
        if (kind == "object") {
            if (groups != 1) throw FormatError("registry: object classes carry exactly one vector");
            reg.objects.push_back({id, get_floats(in, dim), {}});
        } else if (kind == "scene") {
            SceneRep rep{id, 0, {}};
            if (!(ls >> rep.color_dim) || rep.color_dim > dim) throw FormatError("registry: bad scene colour dim");
            for (std::size_t g = 0; g < groups; ++g) rep.pool.push_back(get_floats(in, dim));
            reg.scenes.push_back(std::move(rep));
        } else {
            throw FormatError("registry: unknown kind '" + kind + "'");
        }
    }
    return reg;
}

void save_registry(const Registry& registry, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IOError("cannot write registry " + path.string());
    write_registry(registry, out);
}

Registry load_registry(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IOError("cannot open registry " + path.string());
    return read_registry(in);
}

}  // namespace oneseed
