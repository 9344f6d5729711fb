#include "oneseed/synth.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <random>

#include "oneseed/error.hpp"
#include "oneseed/imaging.hpp"
#include "oneseed/parallel.hpp"

namespace oneseed::synth {

namespace {

constexpr double kObjectHeat = 1.0;
constexpr double kOverlapTolerance = 0.10;
constexpr int kObjectInstanceBase = 1 << 20;

std::uint64_t splitmix(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ull;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
}

std::array<float, 3> hsv(double h, double s, double v) {
    h = h - std::floor(h);
    const double c = v * s;
    const double hp = h * 6.0;
    const double x = c * (1.0 - std::fabs(std::fmod(hp, 2.0) - 1.0));
    double r = 0, g = 0, b = 0;
    switch (static_cast<int>(hp) % 6) {
        case 0: r = c, g = x; break;
        case 1: r = x, g = c; break;
        case 2: g = c, b = x; break;
        case 3: g = x, b = c; break;
        case 4: r = x, b = c; break;
        default: r = c, b = x; break;
    }
    const double m = v - c;
    return {static_cast<float>(r + m), static_cast<float>(g + m), static_cast<float>(b + m)};
}

float clamp01(double v) { return static_cast<float>(std::clamp(v, 0.0, 1.0)); }

class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}
    double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(engine_); }
    int integer(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(engine_); }
    double normal(double sigma) { return sigma > 0.0 ? std::normal_distribution<double>(0.0, sigma)(engine_) : 0.0; }
    bool chance(double p) { return uniform(0.0, 1.0) < p; }
    template <typename T>
    const T& pick(const std::vector<T>& v) { return v[integer(0, static_cast<int>(v.size()) - 1)]; }

private:
    std::mt19937_64 engine_;
};

enum class Zone { top, middle, bottom };

Zone zone_of(const ClassDef& c) {
    if ((c.band_mask & 0b1100) == 0) return Zone::top;
    if ((c.band_mask & 0b0011) == 0) return Zone::bottom;
    return Zone::middle;
}

// Column cut points splitting [0, width) into `pieces` runs of at least `min_width`.
std::vector<int> column_cuts(Rng& rng, int width, int pieces, int min_width) {
    pieces = std::max(1, std::min(pieces, width / std::max(1, min_width)));
    std::vector<int> cuts{0};
    for (int i = 1; i < pieces; ++i) {
        const int lo = cuts.back() + min_width;
        const int hi = width - (pieces - i) * min_width;
        cuts.push_back(lo >= hi ? lo : rng.integer(lo, hi));
    }
    cuts.push_back(width);
    return cuts;
}

int overlap_pixels(const ObjectBlob& a, const ObjectBlob& b, int height, int width) {
    const int r0 = std::max(0, static_cast<int>(std::floor(std::max(a.center_row - a.half_height, b.center_row - b.half_height))));
    const int r1 = std::min(height - 1, static_cast<int>(std::ceil(std::min(a.center_row + a.half_height, b.center_row + b.half_height))));
    const int c0 = std::max(0, static_cast<int>(std::floor(std::max(a.center_col - a.half_width, b.center_col - b.half_width))));
    const int c1 = std::min(width - 1, static_cast<int>(std::ceil(std::min(a.center_col + a.half_width, b.center_col + b.half_width))));
    int n = 0;
    for (int r = r0; r <= r1; ++r)
        for (int c = c0; c <= c1; ++c)
            if (a.contains(r, c) && b.contains(r, c)) ++n;
    return n;
}

int area(const ObjectBlob& o, int height, int width) {
    int n = 0;
    for (int r = std::max(0, static_cast<int>(o.center_row - o.half_height));
         r <= std::min(height - 1, static_cast<int>(o.center_row + o.half_height) + 1); ++r)
        for (int c = std::max(0, static_cast<int>(o.center_col - o.half_width));
             c <= std::min(width - 1, static_cast<int>(o.center_col + o.half_width) + 1); ++c)
            if (o.contains(r, c)) ++n;
    return n;
}

bool overlaps_too_much(const ObjectBlob& a, const ObjectBlob& b, int height, int width) {
    const int shared = overlap_pixels(a, b, height, width);
    if (shared == 0) return false;
    const int smaller = std::min(area(a, height, width), area(b, height, width));
    return shared > kOverlapTolerance * smaller;
}

}  // namespace

bool ObjectBlob::contains(int r, int c) const {
    const double dr = (r - center_row) / std::max(half_height, 0.5);
    const double dc = (c - center_col) / std::max(half_width, 0.5);
    if (shape == Shape::rectangle) return std::fabs(dr) <= 1.0 && std::fabs(dc) <= 1.0;
    return dr * dr + dc * dc <= 1.0;
}

const ClassAppearance& AppearanceModel::get(int class_id) const {
    for (const auto& c : classes)
        if (c.class_id == class_id) return c;
    throw SpecError("no appearance for class " + std::to_string(class_id));
}

AppearanceModel appearance_model(const ClassCatalog& catalog, int heat_channels) {
    const int n_obj = static_cast<int>(catalog.object_count());
    const int n_sce = static_cast<int>(catalog.scene_count());
    if (heat_channels < 2 * n_obj + kMinBackgroundChannels)
        throw SpecError("need at least " + std::to_string(2 * n_obj + kMinBackgroundChannels) + " heat channels for " +
                        std::to_string(n_obj) +
                        " object classes, got " + std::to_string(heat_channels));
    AppearanceModel model;
    model.heat_channels = heat_channels;
    int j = 0, k = 0;
    for (const ClassDef& c : catalog.classes()) {
        ClassAppearance a;
        a.class_id = c.id;
        a.kind = c.kind;
        if (c.kind == ClassKind::object) {
            a.colors = {hsv((j + 0.5) / n_obj, 0.85, 0.95)};
            a.texture = 0.95f;
            a.saliency = 0.85f;
            a.channels = {2 * j, 2 * j + 1};
            a.weights = {0.6, 0.4};
            ++j;
        } else {
            const double t = (k + 0.5) / n_sce;
            a.colors = {hsv(static_cast<double>(k) / n_sce, 0.45, 0.55), hsv(k / static_cast<double>(n_sce) + 0.03, 0.35, 0.7)};
            a.texture = static_cast<float>(0.02 + 0.8 * t);
            a.saliency = static_cast<float>(0.05 + 0.6 * t);
            ++k;
        }
        model.classes.push_back(a);
    }
    return model;
}

std::uint64_t scene_seed(std::uint64_t corpus_seed, int index) {
    return splitmix(splitmix(corpus_seed) ^ static_cast<std::uint64_t>(index));
}

std::string scene_id(int index) {
    std::string digits = std::to_string(index);
    if (digits.size() < 4) digits.insert(0, 4 - digits.size(), '0');
    return "scene_" + digits;
}

SceneSpec random_scene(const ClassCatalog& catalog, std::uint64_t seed, int cover, int height, int width,
                       const NoiseLevels& noise) {
    if (catalog.scene_count() == 0) throw SpecError("catalog has no scene class to lay out");
    Rng rng(seed);
    SceneSpec spec;
    spec.seed = seed;
    spec.height = height;
    spec.width = width;
    spec.noise = noise;

    std::vector<int> top, middle, bottom;
    for (const int id : catalog.scene_ids()) {
        switch (zone_of(catalog.get(id))) {
            case Zone::top: top.push_back(id); break;
            case Zone::middle: middle.push_back(id); break;
            case Zone::bottom: bottom.push_back(id); break;
        }
    }
    const auto& scenes = catalog.scene_ids();
    const int forced_scene = scenes[cover % scenes.size()];
    const auto segment = [&](int id, int row, int col, int h, int w) {
        SceneSegment seg{id, row, col, h, w, rng.integer(0, 1)};
        if (w >= 24 && rng.chance(0.7)) {
            seg.shade_width = rng.integer(w * 3 / 10, w / 2);
            seg.shade_col = col + rng.integer(0, w - seg.shade_width);
        }
        spec.layout.push_back(seg);
    };

    const int top_end = top.empty() ? 0 : static_cast<int>(std::lround(height * rng.uniform(0.22, 0.34)));
    const int bottom_start = bottom.empty() ? height : static_cast<int>(std::lround(height * rng.uniform(0.55, 0.62)));
    const int mid_begin = middle.empty() ? (bottom.empty() ? height : bottom_start) : top_end;
    const int mid_end = middle.empty() ? mid_begin : bottom_start;

    // Top zone, widened down to the middle when there is no middle class.
    if (!top.empty()) {
        const int end = middle.empty() ? bottom_start : top_end;
        const int pieces = std::min<int>(static_cast<int>(top.size()), rng.integer(1, 2));
        const auto cuts = column_cuts(rng, width, pieces, 16);
        for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
            int id = rng.pick(top);
            if (i == 0 && zone_of(catalog.get(forced_scene)) == Zone::top) id = forced_scene;
            segment(id, 0, cuts[i], end, cuts[i + 1] - cuts[i]);
        }
    }
    if (!middle.empty()) {
        const int pieces = rng.integer(2, 4);
        const auto cuts = column_cuts(rng, width, pieces, 12);
        const int forced_at = rng.integer(0, static_cast<int>(cuts.size()) - 2);
        int previous = -1;
        for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
            int id = rng.pick(middle);
            for (int tries = 0; tries < 4 && id == previous && middle.size() > 1; ++tries) id = rng.pick(middle);
            if (static_cast<int>(i) == forced_at && zone_of(catalog.get(forced_scene)) == Zone::middle) id = forced_scene;
            int row = mid_begin;
            if (catalog.get(id).allows_band(0) && rng.chance(0.4))
                row = static_cast<int>(std::lround(mid_begin * rng.uniform(0.0, 0.7)));
            segment(id, row, cuts[i], mid_end - row, cuts[i + 1] - cuts[i]);
            previous = id;
        }
    }
    if (!bottom.empty()) {
        // Lowest class by catalog order fills the zone; the others stack above it as stripes.
        std::vector<int> order = bottom;
        std::sort(order.begin(), order.end(),
                  [&](int a, int b) { return catalog.index_of(a) < catalog.index_of(b); });
        const int start = top.empty() && middle.empty() ? 0 : bottom_start;
        segment(order[0], start, 0, height - start, width);
        const int stripes = static_cast<int>(order.size()) - 1;
        if (stripes > 0) {
            const int band_height = std::max(1, static_cast<int>(std::lround((height - start) * rng.uniform(0.3, 0.5))));
            for (int s = 0; s < stripes; ++s) {
                const int id = order[stripes - s];
                const int row = start + band_height * s / stripes;
                const int h = band_height * (s + 1) / stripes - band_height * s / stripes;
                if (h <= 0) continue;
                if (rng.chance(0.5)) {
                    segment(id, row, 0, h, width);
                } else {
                    const int left = rng.integer(width / 5, width / 3);
                    const int right = rng.integer(2 * width / 3, 4 * width / 5);
                    segment(id, row, 0, h, left);
                    segment(id, row, right, h, width - right);
                }
            }
        }
    }

    const auto& objects = catalog.object_ids();
    if (!objects.empty()) {
        const int count = 3 + rng.integer(0, 3);
        for (int i = 0; i < count; ++i) {
            const int id = i == 0 ? objects[cover % objects.size()] : rng.pick(objects);
            const ClassDef& def = catalog.get(id);
            int lo_band = 0, hi_band = kBandCount - 1;
            while (!def.allows_band(lo_band)) ++lo_band;
            while (!def.allows_band(hi_band)) --hi_band;
            for (int tries = 0; tries < 50; ++tries) {
                ObjectBlob o;
                o.class_id = id;
                o.shape = rng.chance(0.5) ? Shape::rectangle : Shape::ellipse;
                o.half_height = rng.uniform(4.0, 11.0);
                o.half_width = rng.uniform(4.0, 13.0);
                double r_lo = std::max(o.half_height, lo_band * height / 4.0 + o.half_height);
                double r_hi = std::min(height - 1 - o.half_height, (hi_band + 1) * height / 4.0 - 1 - o.half_height);
                if (r_lo > r_hi) r_lo = r_hi = 0.5 * (r_lo + r_hi);
                o.center_row = rng.uniform(r_lo, r_hi + 1e-9);
                o.center_col = rng.uniform(o.half_width, width - 1 - o.half_width);
                const bool clash = std::any_of(spec.objects.begin(), spec.objects.end(), [&](const ObjectBlob& other) {
                    return overlaps_too_much(o, other, height, width);
                });
                if (clash) continue;
                if (noise.heat > 0.0 && objects.size() > 1) {
                    do o.confuser = rng.pick(objects);
                    while (o.confuser == id);
                    o.leak = std::clamp(noise.heat * rng.uniform(0.0, 2.4), 0.0, 1.0);
                }
                spec.objects.push_back(o);
                break;
            }
        }
        const int patches = static_cast<int>(std::lround(noise.heat * 24.0));
        for (int i = 0; i < patches; ++i) {
            HeatPatch p;
            p.class_id = rng.pick(objects);
            const int hh = rng.integer(3, 7), hw = rng.integer(3, 7);
            p.height = std::min(height, 2 * hh + 1);
            p.width = std::min(width, 2 * hw + 1);
            p.row = rng.integer(0, height - p.height);
            p.col = rng.integer(0, width - p.width);
            p.amplitude = 0.06 * rng.uniform(0.5, 1.5);
            spec.patches.push_back(p);
        }
    }
    return spec;
}

void validate_spec(const SceneSpec& spec, const ClassCatalog& catalog) {
    if (spec.height < 4 || spec.width < 6) throw SpecError("scene must be at least 4x6 pixels");
    for (const double n : {spec.noise.heat, spec.noise.color, spec.noise.saliency})
        if (!(n >= 0.0 && n <= 1.0)) throw SpecError("noise levels must lie in [0,1]");
    std::vector<char> covered(static_cast<std::size_t>(spec.height) * spec.width, 0);
    for (const auto& s : spec.layout) {
        if (!catalog.contains(s.class_id) || catalog.get(s.class_id).kind != ClassKind::scene)
            throw SpecError("layout uses unknown scene class " + std::to_string(s.class_id));
        for (int r = std::max(0, s.row); r < std::min(spec.height, s.row + s.height); ++r)
            for (int c = std::max(0, s.col); c < std::min(spec.width, s.col + s.width); ++c)
                covered[static_cast<std::size_t>(r) * spec.width + c] = 1;
    }
    if (std::find(covered.begin(), covered.end(), 0) != covered.end())
        throw SpecError("scene layout leaves pixels uncovered");
    for (std::size_t i = 0; i < spec.objects.size(); ++i) {
        const auto& o = spec.objects[i];
        if (!catalog.contains(o.class_id) || catalog.get(o.class_id).kind != ClassKind::object)
            throw SpecError("object " + std::to_string(i) + " uses unknown object class " + std::to_string(o.class_id));
        if (o.confuser >= 0 && (!catalog.contains(o.confuser) || catalog.get(o.confuser).kind != ClassKind::object))
            throw SpecError("object " + std::to_string(i) + " has an unknown confuser class");
        for (std::size_t j = 0; j < i; ++j)
            if (overlaps_too_much(o, spec.objects[j], spec.height, spec.width))
                throw SpecError("objects " + std::to_string(j) + " and " + std::to_string(i) + " overlap beyond tolerance");
    }
    for (const auto& p : spec.patches)
        if (!catalog.contains(p.class_id) || catalog.get(p.class_id).kind != ClassKind::object)
            throw SpecError("heat patch uses unknown object class " + std::to_string(p.class_id));
}

RawImage generate_scene(const SceneSpec& spec, const ClassCatalog& catalog, const AppearanceModel& model) {
    validate_spec(spec, catalog);
    const int h = spec.height, w = spec.width;
    const std::size_t n = static_cast<std::size_t>(h) * w;
    const NoiseLevels& noise = spec.noise;
    Rng rng(splitmix(spec.seed ^ 0xA5A5A5A5ull));

    // Instances: layout segments first, then objects on top.
    std::vector<int> instance(n, -1);
    for (std::size_t s = 0; s < spec.layout.size(); ++s) {
        const auto& seg = spec.layout[s];
        for (int r = std::max(0, seg.row); r < std::min(h, seg.row + seg.height); ++r)
            for (int c = std::max(0, seg.col); c < std::min(w, seg.col + seg.width); ++c)
                instance[static_cast<std::size_t>(r) * w + c] = static_cast<int>(s);
    }
    for (std::size_t o = 0; o < spec.objects.size(); ++o)
        for (int r = 0; r < h; ++r)
            for (int c = 0; c < w; ++c)
                if (spec.objects[o].contains(r, c))
                    instance[static_cast<std::size_t>(r) * w + c] = kObjectInstanceBase + static_cast<int>(o);

    const auto is_object = [](int inst) { return inst >= kObjectInstanceBase; };
    const auto class_of = [&](int inst) {
        return is_object(inst) ? spec.objects[inst - kObjectInstanceBase].class_id : spec.layout[inst].class_id;
    };

    // Per-instance appearance draws, in instance order.
    struct Look {
        std::array<double, 3> color;
        double texture, saliency;
    };
    const auto draw_look = [&](int class_id, int mode) {
        const ClassAppearance& a = model.get(class_id);
        const auto& base = a.colors[std::min<std::size_t>(mode, a.colors.size() - 1)];
        Look l{};
        for (int ch = 0; ch < 3; ++ch) l.color[ch] = base[ch] + rng.normal(0.1 * noise.color);
        l.texture = a.texture + rng.normal(0.05 * noise.color);
        l.saliency = a.saliency + rng.normal(0.1 * noise.saliency);
        return l;
    };
    std::vector<Look> seg_look, shade_look, obj_look;
    for (const auto& seg : spec.layout) {
        seg_look.push_back(draw_look(seg.class_id, seg.mode));
        shade_look.push_back(draw_look(seg.class_id, 1 - seg.mode));
    }
    for (const auto& o : spec.objects) obj_look.push_back(draw_look(o.class_id, 0));
    const auto look_at = [&](int inst, int col) -> const Look& {
        if (is_object(inst)) return obj_look[inst - kObjectInstanceBase];
        const SceneSegment& seg = spec.layout[inst];
        const bool shaded = col >= seg.shade_col && col < seg.shade_col + seg.shade_width;
        return shaded ? shade_look[inst] : seg_look[inst];
    };

    RawImage raw;
    raw.id = spec.id;
    LabelMap gt(h, w);
    raw.color = FeatureMap(h, w, 3);
    FeatureMap texture(h, w, 1), saliency(h, w, 1);
    for (std::size_t p = 0; p < n; ++p) {
        const int inst = instance[p];
        gt.labels[p] = static_cast<std::uint8_t>(class_of(inst));
        const Look& l = look_at(inst, static_cast<int>(p % w));
        for (int ch = 0; ch < 3; ++ch) raw.color.data()[p * 3 + ch] = clamp01(l.color[ch] + rng.normal(0.08 * noise.color));
        texture.data()[p] = clamp01(l.texture + rng.normal(0.05 * noise.color));
        saliency.data()[p] = clamp01(l.saliency + rng.normal(0.05 * noise.saliency));
    }
    raw.ground_truth = std::move(gt);
    raw.texture = std::move(texture);

    // Local views: per-crop gain and offset on top of the global map.
    SaliencyViews views{saliency, FeatureMap(h, w, 1), FeatureMap(h, w, 1)};
    const auto crop_views = imaging::local_crop_views(h, w);
    for (int v = 0; v < 2; ++v) {
        FeatureMap& out = v == 0 ? views.local1 : views.local2;
        for (const auto& rect : crop_views[v]) {
            const double gain = 1.0 + rng.normal(0.3 * noise.saliency);
            const double offset = rng.normal(0.1 * noise.saliency);
            for (int r = rect.row; r < rect.row + rect.height; ++r)
                for (int c = rect.col; c < rect.col + rect.width; ++c)
                    out.at(r, c) = clamp01(saliency.at(r, c) * gain + offset);
        }
    }
    raw.saliency = std::move(views);

    // Edges: instance-boundary indicator, box-blurred, plus jitter.
    std::vector<char> boundary(n, 0);
    for (int r = 0; r < h; ++r)
        for (int c = 0; c < w; ++c) {
            const int inst = instance[static_cast<std::size_t>(r) * w + c];
            if ((r > 0 && instance[static_cast<std::size_t>(r - 1) * w + c] != inst) ||
                (r + 1 < h && instance[static_cast<std::size_t>(r + 1) * w + c] != inst) ||
                (c > 0 && instance[static_cast<std::size_t>(r) * w + c - 1] != inst) ||
                (c + 1 < w && instance[static_cast<std::size_t>(r) * w + c + 1] != inst))
                boundary[static_cast<std::size_t>(r) * w + c] = 1;
        }
    FeatureMap edge(h, w, 1);
    for (int r = 0; r < h; ++r)
        for (int c = 0; c < w; ++c) {
            int count = 0;
            for (int dr = -1; dr <= 1; ++dr)
                for (int dc = -1; dc <= 1; ++dc) {
                    const int rr = r + dr, cc = c + dc;
                    if (rr >= 0 && rr < h && cc >= 0 && cc < w) count += boundary[static_cast<std::size_t>(rr) * w + cc];
                }
            edge.at(r, c) = clamp01(count / 4.0 + std::fabs(rng.normal(0.1 * noise.color)));
        }
    raw.edge = std::move(edge);

    // Heat, one map per slice at slice resolution.
    raw.plan = make_slice_plan(h, w);
    const int channels = model.heat_channels;
    const int signature_channels = 2 * static_cast<int>(catalog.object_count());
    std::vector<int> visible(spec.objects.size(), 0);
    for (const int inst : instance)
        if (is_object(inst)) ++visible[inst - kObjectInstanceBase];
    for (const Slice& s : raw.plan.slices) {
        std::vector<double> fraction(spec.objects.size(), 0.0);
        for (int r = s.row; r < s.row + s.height; ++r)
            for (int c = s.col; c < s.col + s.width; ++c) {
                const int inst = instance[static_cast<std::size_t>(r) * w + c];
                if (is_object(inst)) fraction[inst - kObjectInstanceBase] += 1.0;
            }
        for (std::size_t o = 0; o < fraction.size(); ++o)
            if (visible[o] > 0) fraction[o] /= visible[o];

        FeatureMap heat(s.height, s.width, channels);
        for (int r = s.row; r < s.row + s.height; ++r)
            for (int c = s.col; c < s.col + s.width; ++c) {
                const int inst = instance[static_cast<std::size_t>(r) * w + c];
                auto px = heat.pixel(r - s.row, c - s.col);
                std::vector<double> v(channels, kObjectBaseHeat);
                if (!is_object(inst)) {
                    std::fill(v.begin(), v.begin() + signature_channels, kSceneFloorHeat);
                    std::fill(v.begin() + signature_channels, v.end(), kSceneBaseHeat);
                }
                if (is_object(inst)) {
                    const std::size_t o = inst - kObjectInstanceBase;
                    const ObjectBlob& blob = spec.objects[o];
                    const double amp = kObjectHeat * fraction[o];
                    const ClassAppearance& own = model.get(blob.class_id);
                    for (int k = 0; k < 2; ++k) v[own.channels[k]] += amp * (1.0 - blob.leak) * own.weights[k];
                    if (blob.confuser >= 0) {
                        const ClassAppearance& conf = model.get(blob.confuser);
                        for (int k = 0; k < 2; ++k) v[conf.channels[k]] += amp * blob.leak * conf.weights[k];
                    }
                } else {
                    for (const auto& p : spec.patches) {
                        if (r < p.row || r >= p.row + p.height || c < p.col || c >= p.col + p.width) continue;
                        const ClassAppearance& a = model.get(p.class_id);
                        for (int k = 0; k < 2; ++k) v[a.channels[k]] += p.amplitude * a.weights[k];
                    }
                }
                for (int ch = 0; ch < channels; ++ch) {
                    const double factor = noise.heat > 0.0 ? std::max(0.0, 1.0 + rng.normal(noise.heat)) : 1.0;
                    px[ch] = static_cast<float>(v[ch] * factor);
                }
            }
        raw.slice_heat.push_back(std::move(heat));
    }
    return raw;
}

Registry exact_registry(const AppearanceModel& model, const ClassCatalog& catalog, int bins) {
    Registry reg;
    for (const ClassDef& c : catalog.classes()) {
        const ClassAppearance& a = model.get(c.id);
        if (c.kind == ClassKind::object) {
            std::vector<double> center(model.heat_channels, kObjectBaseHeat);
            for (int k = 0; k < 2; ++k) center[a.channels[k]] += kObjectHeat * a.weights[k];
            double sum = 0.0;
            for (double v : center) sum += v;
            for (double& v : center) v /= sum;
            reg.objects.push_back({c.id, std::move(center), {}});
            continue;
        }
        SceneRep rep;
        rep.class_id = c.id;
        rep.color_dim = static_cast<std::size_t>(3 * bins);
        for (const auto& color : a.colors) {
            std::vector<double> member;
            for (int ch = 0; ch < 3; ++ch) {
                const float v = color[ch];
                for (double x : unit_histogram(std::span<const float>(&v, 1), bins)) member.push_back(x / 3.0);
            }
            const float t = a.texture;
            for (double x : unit_histogram(std::span<const float>(&t, 1), bins)) member.push_back(x);
            rep.pool.push_back(std::move(member));
        }
        reg.scenes.push_back(std::move(rep));
    }
    return reg;
}

ClassCatalog place_seeds(const ClassCatalog& catalog, const std::vector<RawImage>& images,
                         const std::vector<bool>& heldout) {
    struct Best {
        int depth = -1;
        SeedPixel seed;
    };
    std::vector<Best> best(catalog.size());
    for (std::size_t i = 0; i < images.size(); ++i) {
        if (i < heldout.size() && heldout[i]) continue;
        if (!images[i].ground_truth) continue;
        const LabelMap& gt = *images[i].ground_truth;
        const int h = static_cast<int>(gt.height), w = static_cast<int>(gt.width);
        const int far = h + w;
        std::vector<int> depth(gt.labels.size(), far);
        std::deque<int> queue;
        for (int r = 0; r < h; ++r)
            for (int c = 0; c < w; ++c) {
                const auto l = gt.at(r, c);
                if ((r > 0 && gt.at(r - 1, c) != l) || (r + 1 < h && gt.at(r + 1, c) != l) ||
                    (c > 0 && gt.at(r, c - 1) != l) || (c + 1 < w && gt.at(r, c + 1) != l)) {
                    depth[r * w + c] = 0;
                    queue.push_back(r * w + c);
                }
            }
        while (!queue.empty()) {
            const int p = queue.front();
            queue.pop_front();
            const int r = p / w, c = p % w;
            const int next[4][2] = {{r - 1, c}, {r + 1, c}, {r, c - 1}, {r, c + 1}};
            for (const auto& q : next) {
                if (q[0] < 0 || q[0] >= h || q[1] < 0 || q[1] >= w) continue;
                const int qi = q[0] * w + q[1];
                if (depth[qi] > depth[p] + 1) {
                    depth[qi] = depth[p] + 1;
                    queue.push_back(qi);
                }
            }
        }
        for (int p = 0; p < h * w; ++p) {
            const int label = gt.labels[p];
            if (label == kIgnoreLabel || !catalog.contains(label)) continue;
            Best& b = best[catalog.index_of(label)];
            if (depth[p] > b.depth) b = {depth[p], {images[i].id, p / w, p % w}};
        }
    }
    ClassCatalog out = catalog;
    for (std::size_t c = 0; c < catalog.size(); ++c) {
        if (best[c].depth < 0)
            throw SpecError("class '" + catalog.classes()[c].name + "' never appears in the training split");
        out = out.with_seed(catalog.classes()[c].id, best[c].seed);
    }
    return out;
}

Corpus generate_corpus(const ClassCatalog& catalog, const CorpusOptions& options, int jobs) {
    if (options.count < 1) throw SpecError("corpus needs at least one scene");
    const AppearanceModel model = appearance_model(catalog, options.heat_channels);
    Corpus corpus;
    corpus.heldout.resize(options.count);
    std::vector<SceneSpec> specs;
    int train_index = 0;
    for (int i = 0; i < options.count; ++i) {
        const bool held = options.heldout_every > 0 && i % options.heldout_every == options.heldout_every - 1;
        corpus.heldout[i] = held;
        const int cover = held ? i : train_index++;
        SceneSpec spec = random_scene(catalog, scene_seed(options.seed, i), cover, options.height, options.width,
                                      options.noise);
        spec.id = scene_id(i);
        specs.push_back(std::move(spec));
    }
    corpus.images.resize(specs.size());
    parallel_for(specs.size(), jobs,
                 [&](std::size_t i) { corpus.images[i] = generate_scene(specs[i], catalog, model); });
    corpus.catalog = place_seeds(catalog, corpus.images, corpus.heldout);
    return corpus;
}

}  // namespace oneseed::synth
