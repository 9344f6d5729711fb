#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <set>

#include "fixtures.hpp"
#include "oneseed/error.hpp"
#include "oneseed/synth.hpp"

using namespace oneseed;
using namespace oneseed::synth;

namespace {

SceneSpec hand_spec() {
    SceneSpec s;
    s.seed = 17;
    s.id = "hand";
    s.height = 32;
    s.width = 48;
    s.layout = {{10, 0, 0, 12, 48}, {2, 12, 0, 8, 30}, {8, 12, 30, 8, 18}, {0, 20, 0, 12, 48}};
    s.objects = {{13, Shape::rectangle, 22.0, 10.0, 4.0, 6.0}, {11, Shape::ellipse, 14.0, 36.0, 5.0, 4.0}};
    return s;
}

// Paints layout then objects, independent of the generator.
std::vector<std::uint8_t> paint(const SceneSpec& s) {
    std::vector<std::uint8_t> out(static_cast<std::size_t>(s.height) * s.width, kIgnoreLabel);
    for (const auto& seg : s.layout)
        for (int r = seg.row; r < seg.row + seg.height; ++r)
            for (int c = seg.col; c < seg.col + seg.width; ++c) out[r * s.width + c] = static_cast<std::uint8_t>(seg.class_id);
    for (const auto& o : s.objects)
        for (int r = 0; r < s.height; ++r)
            for (int c = 0; c < s.width; ++c) {
                const double dr = (r - o.center_row) / std::max(o.half_height, 0.5);
                const double dc = (c - o.center_col) / std::max(o.half_width, 0.5);
                const bool in = o.shape == Shape::rectangle ? std::abs(dr) <= 1.0 && std::abs(dc) <= 1.0
                                                            : dr * dr + dc * dc <= 1.0;
                if (in) out[r * s.width + c] = static_cast<std::uint8_t>(o.class_id);
            }
    return out;
}

std::vector<int> top_two(std::span<const float> v) {
    std::vector<int> idx(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) idx[i] = static_cast<int>(i);
    std::partial_sort(idx.begin(), idx.begin() + 2, idx.end(), [&](int a, int b) { return v[a] > v[b]; });
    return {std::min(idx[0], idx[1]), std::max(idx[0], idx[1])};
}

double pseudo_precision(double heat_noise) {
    const auto fx = testing::encoded_corpus(20, 0, {heat_noise, 0.0, 0.0});
    const Registry reg = fit_all(fx.corpus.catalog, lookup_in(fx.images));
    std::vector<LabelMap> labels;
    for (const auto& p : infer_all(fx.images, reg, fx.corpus.catalog, {}, 1)) labels.push_back(p.map);
    return precision_recall(pseudo_confusion(fx.images, labels, fx.corpus.catalog)).precision.value();
}

}  // namespace

TEST_CASE("noise-free ground truth equals the painted layout") {
    const ClassCatalog cat = default_catalog();
    const SceneSpec spec = hand_spec();
    const RawImage raw = generate_scene(spec, cat, appearance_model(cat));
    REQUIRE(raw.ground_truth);
    CHECK(raw.ground_truth->labels == paint(spec));
    CHECK(raw.color.height() == 32);
    CHECK(raw.color.width() == 48);
    CHECK(raw.plan.slices.size() == 15);
    REQUIRE(raw.slice_heat.size() == 15);
    for (std::size_t i = 0; i < 15; ++i) {
        CHECK(raw.slice_heat[i].height() == static_cast<std::size_t>(raw.plan.slices[i].height));
        CHECK(raw.slice_heat[i].channels() == static_cast<std::size_t>(kDefaultHeatChannels));
    }
    for (const auto& spec_b : {random_scene(cat, 3, 5, 64, 128, {}), random_scene(cat, 9, 2, 40, 60, {})})
        CHECK(generate_scene(spec_b, cat, appearance_model(cat)).ground_truth->labels == paint(spec_b));
}

TEST_CASE("noise-free heat peaks on the object's own channels") {
    const ClassCatalog cat = default_catalog();
    const AppearanceModel model = appearance_model(cat);
    const SceneSpec spec = hand_spec();
    const RawImage raw = generate_scene(spec, cat, model);
    std::size_t object_pixels = 0;
    for (std::size_t i = 0; i < raw.plan.slices.size(); ++i) {
        const Slice& s = raw.plan.slices[i];
        for (int r = 0; r < s.height; ++r)
            for (int c = 0; c < s.width; ++c) {
                const int label = raw.ground_truth->labels[(s.row + r) * spec.width + s.col + c];
                const auto px = raw.slice_heat[i].pixel(r, c);
                if (cat.get(label).kind == ClassKind::object) {
                    const auto& ch = model.get(label).channels;
                    CHECK(top_two(px) == std::vector<int>{std::min(ch[0], ch[1]), std::max(ch[0], ch[1])});
                    ++object_pixels;
                } else {
                    const auto peak = std::max_element(px.begin(), px.end()) - px.begin();
                    CHECK(peak >= 2 * static_cast<std::ptrdiff_t>(cat.object_count()));
                }
            }
    }
    CHECK(object_pixels > 0);
}

TEST_CASE("appearance model assigns disjoint signature channels") {
    const ClassCatalog cat = default_catalog();
    const AppearanceModel model = appearance_model(cat);
    CHECK(model.heat_channels == kDefaultHeatChannels);
    std::set<int> used;
    for (const int id : cat.object_ids())
        for (const int ch : model.get(id).channels) CHECK(used.insert(ch).second);
    CHECK(*used.rbegin() < 2 * static_cast<int>(cat.object_count()));
    CHECK_THROWS_AS(appearance_model(cat, 2 * 12 + kMinBackgroundChannels - 1), SpecError);
    CHECK_NOTHROW(appearance_model(cat, 2 * 12 + kMinBackgroundChannels));
    CHECK_THROWS_AS(model.get(200), SpecError);
}

TEST_CASE("scene generation is deterministic") {
    const ClassCatalog cat = default_catalog();
    const SceneSpec spec = random_scene(cat, 42, 1, 64, 128, {0.3, 0.3, 0.3});
    const RawImage a = generate_scene(spec, cat, appearance_model(cat));
    const RawImage b = generate_scene(spec, cat, appearance_model(cat));
    CHECK(a.color.data() == b.color.data());
    CHECK(a.edge->data() == b.edge->data());
    for (std::size_t i = 0; i < 15; ++i) CHECK(a.slice_heat[i].data() == b.slice_heat[i].data());

    CorpusOptions co;
    co.count = 12;
    co.noise = {0.25, 0.25, 0.25};
    const Corpus one = generate_corpus(cat, co, 1);
    const Corpus three = generate_corpus(cat, co, 3);
    CHECK(one.catalog == three.catalog);
    CHECK(one.heldout == three.heldout);
    for (std::size_t i = 0; i < one.images.size(); ++i) {
        CHECK(one.images[i].id == three.images[i].id);
        CHECK(one.images[i].color.data() == three.images[i].color.data());
        CHECK(one.images[i].slice_heat[7].data() == three.images[i].slice_heat[7].data());
    }
    co.seed = 1;
    CHECK(generate_corpus(cat, co, 1).images[0].color.data() != one.images[0].color.data());
}

TEST_CASE("random scenes contain their cover classes") {
    const ClassCatalog cat = default_catalog();
    for (int cover = 0; cover < 24; ++cover) {
        const SceneSpec s = random_scene(cat, scene_seed(0, cover), cover, 64, 128, {});
        CHECK_NOTHROW(validate_spec(s, cat));
        const auto labels = paint(s);
        const int scene = cat.scene_ids()[cover % cat.scene_count()];
        const int object = cat.object_ids()[cover % cat.object_count()];
        CHECK(std::count(labels.begin(), labels.end(), scene) > 0);
        CHECK(std::count(labels.begin(), labels.end(), object) > 0);
    }
}

TEST_CASE("corpus seeds sit inside their class on training scenes") {
    CorpusOptions co;
    co.count = 15;
    const Corpus corpus = generate_corpus(default_catalog(), co);
    CHECK(corpus.heldout.size() == 15);
    CHECK(std::count(corpus.heldout.begin(), corpus.heldout.end(), true) == 3);
    for (const auto& c : corpus.catalog.classes()) {
        REQUIRE(c.seed);
        const auto it = std::find_if(corpus.images.begin(), corpus.images.end(),
                                     [&](const RawImage& im) { return im.id == c.seed->image; });
        REQUIRE(it != corpus.images.end());
        CHECK(!corpus.heldout[it - corpus.images.begin()]);
        CHECK(it->ground_truth->labels[c.seed->row * 128 + c.seed->col] == c.id);
    }
    CHECK(scene_id(3) != scene_id(4));
}

TEST_CASE("invalid scene specs") {
    const ClassCatalog cat = default_catalog();
    const auto fails = [&](SceneSpec s) { CHECK_THROWS_AS(validate_spec(s, cat), SpecError); };
    SceneSpec s = hand_spec();
    s.layout[0].class_id = 13;  // an object class cannot be a layout segment
    fails(s);
    s = hand_spec();
    s.layout.pop_back();
    fails(s);
    s = hand_spec();
    s.objects[0].class_id = 77;
    fails(s);
    s = hand_spec();
    s.objects.push_back(s.objects[0]);
    fails(s);
    s = hand_spec();
    s.noise.heat = 1.5;
    fails(s);
    s = hand_spec();
    s.height = 3;
    fails(s);
    s = hand_spec();
    s.objects[0].confuser = 10;
    fails(s);
    s = hand_spec();
    s.patches.push_back({2, 0, 0, 4, 4, 0.01});
    fails(s);
    CHECK_THROWS_AS(generate_scene(s, cat, appearance_model(cat)), SpecError);

    CorpusOptions co;
    co.count = 0;
    CHECK_THROWS_AS(generate_corpus(cat, co), SpecError);
    co.count = 2;
    CHECK_THROWS_AS(generate_corpus(cat, co), SpecError);  // too few scenes to seed every class
}

TEST_CASE("heat noise lowers pseudo-label precision") {
    const double clean = pseudo_precision(0.0);
    const double noisy = pseudo_precision(0.3);
    CAPTURE(clean);
    CAPTURE(noisy);
    CHECK(noisy < clean);
}
