#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <sstream>

#include "fixtures.hpp"
#include "oneseed/cli.hpp"
#include "oneseed/corpus.hpp"
#include "oneseed/error.hpp"
#include "support.hpp"

using namespace oneseed;
namespace fs = std::filesystem;

namespace {

struct Outcome {
    int code = 0;
    std::string out;
    std::string err;
};

Outcome run(std::vector<std::string> args) {
    args.insert(args.begin(), "oneseed");
    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    std::ostringstream out, err;
    const int code = cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
    return {code, out.str(), err.str()};
}

std::size_t line_count(const std::string& s) { return static_cast<std::size_t>(std::count(s.begin(), s.end(), '\n')); }

// Runs with the working directory moved to `dir`.
class InDirectory {
public:
    explicit InDirectory(const fs::path& dir) : previous_(fs::current_path()) { fs::current_path(dir); }
    ~InDirectory() { fs::current_path(previous_); }

private:
    fs::path previous_;
};

}  // namespace

TEST_CASE("manifest round-trip") {
    testing::TempDir dir("manifest");
    const std::vector<CorpusEntry> entries{{"a", false}, {"b-2", true}, {"c.x", false}};
    write_manifest(entries, dir.path());
    CHECK(testing::slurp(manifest_path(dir.path())) == "CORPUS v1\na train\nb-2 heldout\nc.x train\n");
    CHECK(read_manifest(dir.path()) == entries);
}

TEST_CASE("manifest errors") {
    testing::TempDir dir("manifest_bad");
    const auto with = [&](const std::string& text) {
        testing::spit(manifest_path(dir.path()), text);
        return read_manifest(dir.path());
    };
    CHECK_THROWS_AS(with("CORPUS v2\n"), ParseError);
    CHECK_THROWS_AS(with("CORPUS v1\na test\n"), ParseError);
    CHECK_THROWS_AS(with("CORPUS v1\na train extra\n"), ParseError);
    CHECK_THROWS_AS(with("CORPUS v1\na train\na heldout\n"), ValidationError);
    CHECK_THROWS_AS(with("CORPUS v1\n../up train\n"), ValidationError);
    CHECK(with("CORPUS v1\n# comment\n\na train\n").size() == 1);
    CHECK_THROWS_AS(write_manifest({{"a/b", false}}, dir.path()), ValidationError);
    CHECK_THROWS_AS(image_dir(dir.path(), ".hidden"), ValidationError);
    CHECK_THROWS_AS(read_manifest(dir / "missing"), IOError);
}

TEST_CASE("stored images round-trip and encode like in memory") {
    testing::TempDir dir("stored");
    const ClassCatalog cat = default_catalog();
    const auto model = synth::appearance_model(cat);
    synth::SceneSpec spec = synth::random_scene(cat, 5, 3, 32, 48, {0.2, 0.2, 0.2});
    spec.id = "scene_a";
    const RawImage raw = synth::generate_scene(spec, cat, model);
    save_raw_image(raw, dir.path());
    const RawImage back = load_raw_image(dir.path(), raw.id);
    CHECK(back.color.data() == raw.color.data());
    CHECK(back.texture->data() == raw.texture->data());
    CHECK(back.saliency->local2.data() == raw.saliency->local2.data());
    CHECK(back.plan.slices.size() == 15);
    CHECK(back.slice_heat[14].data() == raw.slice_heat[14].data());
    CHECK(back.ground_truth->labels == raw.ground_truth->labels);

    CHECK(!is_encoded(dir.path(), raw.id));
    CHECK_THROWS_AS(load_encoded(dir.path(), raw.id, {}), IOError);
    encode_stored(dir.path(), raw.id, {});
    CHECK(is_encoded(dir.path(), raw.id));
    const ImageArtifacts stored = load_encoded(dir.path(), raw.id, {});
    const ImageArtifacts direct = encode_image(raw);
    CHECK(stored.regions.labels == direct.regions.labels);
    REQUIRE(stored.descriptors.size() == direct.descriptors.size());
    for (std::size_t j = 0; j < direct.descriptors.size(); ++j) {
        CHECK(stored.descriptors[j].heat == direct.descriptors[j].heat);
        CHECK(stored.descriptors[j].color == direct.descriptors[j].color);
    }
    CHECK(stored.context.similarity == direct.context.similarity);

    fs::remove(image_dir(dir.path(), raw.id) / "sal_local1.fmap");
    CHECK_THROWS_AS(load_raw_image(dir.path(), raw.id), IOError);
}

TEST_CASE("usage errors exit 2") {
    CHECK(run({}).code == 2);
    const Outcome unknown = run({"frobnicate"});
    CHECK(unknown.code == 2);
    CHECK(unknown.err.find("synth") != std::string::npos);
    CHECK(run({"plan", "--height", "8"}).code == 2);
    CHECK(run({"infer", "x", "--mode", "sideways"}).code == 2);
    CHECK(run({"--jobs", "0", "plan", "--height", "8", "--width", "12"}).code == 2);
    const Outcome help = run({"--help"});
    CHECK(help.code == 0);
    CHECK(help.out.find("iterate") != std::string::npos);
}

TEST_CASE("plan command") {
    testing::TempDir dir("plan");
    const Outcome o = run({"plan", "--height", "8", "--width", "12", "--out", (dir / "plan.txt").string()});
    CHECK(o.code == 0);
    const std::string text = testing::slurp(dir / "plan.txt");
    CHECK(text.rfind("SLICEPLAN v1", 0) == 0);
    const SlicePlan plan = load_slice_plan(dir / "plan.txt");
    CHECK(plan.slices.size() == 15);
    CHECK(plan.rows == 8);
    CHECK(plan.cols == 12);
    const Outcome printed = run({"plan", "--height", "8", "--width", "12"});
    CHECK(printed.out == text);
    CHECK(line_count(text) == 16);  // header plus one line per slice
}

TEST_CASE("pipeline errors exit 1 with the category") {
    testing::TempDir dir("errors");
    const Outcome o = run({"encode", (dir / "nothing").string()});
    CHECK(o.code == 1);
    CHECK(o.err.find("error [IOError]") != std::string::npos);
    CHECK(run({"synth", (dir / "tiny").string(), "--count", "2"}).code == 1);
}

TEST_CASE("config file values apply and flags win") {
    testing::TempDir dir("config");
    testing::spit(dir / "my.cfg", "[synth]\ncount = 16\nheight = 32\nwidth = 48\n");
    CHECK(run({"--config", (dir / "my.cfg").string(), "synth", (dir / "a").string()}).code == 0);
    CHECK(read_manifest(dir / "a").size() == 16);
    CHECK(run({"--config", (dir / "my.cfg").string(), "synth", (dir / "b").string(), "--count", "17"}).code == 0);
    CHECK(read_manifest(dir / "b").size() == 17);
    CHECK(load_raw_image(dir / "b", read_manifest(dir / "b")[0].id).color.width() == 48);

    {
        InDirectory here(dir.path());
        testing::spit(dir / "pipeline.cfg", "seed = 3\n");
        CHECK(run({"synth", "c", "--count", "16", "--height", "32", "--width", "48"}).code == 0);
        fs::remove(dir / "pipeline.cfg");
        CHECK(run({"synth", "d", "--count", "16", "--height", "32", "--width", "48"}).code == 0);
    }
    const std::string first = read_manifest(dir / "a")[0].id;
    const auto color = [&](const char* corpus) { return testing::slurp(image_dir(dir / corpus, first) / "color.fmap"); };
    CHECK(color("a") == color("d"));
    CHECK(color("a") != color("c"));
}

TEST_CASE("end-to-end on a noise-free corpus") {
    testing::TempDir dir("e2e");
    const std::string c = (dir / "corpus").string();
    REQUIRE(run({"synth", c, "--count", "15"}).code == 0);
    REQUIRE(run({"encode", c}).code == 0);
    REQUIRE(run({"represent", c}).code == 0);
    CHECK(fs::exists(dir / "corpus" / "reps.bin"));
    const Outcome infer = run({"infer", c, "--mode", "initial", "--theta", "0.05"});
    CHECK(infer.code == 0);
    const auto entries = read_manifest(c);
    for (const auto& e : entries) CHECK(fs::exists(dir / "corpus" / "labels" / (e.id + ".pgm")));

    const Outcome eval = run({"eval", c});
    CHECK(eval.code == 0);
    const std::string metrics = testing::slurp(dir / "corpus" / "metrics.txt");
    CHECK(metrics.rfind("METRICS v1\naveraging macro\n", 0) == 0);
    CHECK(eval.out.find("mIoU class") != std::string::npos);

    CHECK(run({"iterate", c, "--rounds", "1"}).code == 0);
    const std::string iterations = testing::slurp(dir / "corpus" / "iterations.txt");
    CHECK(iterations.rfind("ITERATIONS v1\n", 0) == 0);
    CHECK(line_count(iterations) == 4);
    CHECK(fs::exists(dir / "corpus" / "labels_round_1" / (entries[0].id + ".pgm")));
    CHECK(fs::exists(dir / "corpus" / "pred_round_1" / (entries[0].id + ".pgm")));

    CHECK(run({"overlay", c}).code == 0);
    const std::string ppm = testing::slurp(dir / "corpus" / "overlay" / (entries[0].id + ".ppm"));
    CHECK(ppm.rfind("P6\n128 64\n255\n", 0) == 0);
    CHECK(ppm.size() == std::string("P6\n128 64\n255\n").size() + 128 * 64 * 3);

    CHECK(run({"infer", c, "--mode", "iteration", "--predictions", "pred_round_1", "--out", "relabelled"}).code == 0);
    CHECK(fs::exists(dir / "corpus" / "relabelled" / (entries[0].id + ".pgm")));
}

TEST_CASE("palette and overlay") {
    CHECK(cli::palette_color(0) == std::array<std::uint8_t, 3>{128, 64, 128});
    CHECK(cli::palette_color(10) == std::array<std::uint8_t, 3>{70, 130, 180});
    CHECK(cli::palette_color(kIgnoreLabel) == std::array<std::uint8_t, 3>{0, 0, 0});
    CHECK(cli::palette_color(19) != cli::palette_color(20));

    testing::TempDir dir("overlay");
    FeatureMap color(1, 2, 3, 1.0f);
    LabelMap labels(1, 2);
    labels.labels = {0, kIgnoreLabel};
    cli::write_overlay(color, labels, 1.0, dir / "o.ppm");
    const std::string bytes = testing::slurp(dir / "o.ppm");
    CHECK(bytes == std::string("P6\n2 1\n255\n") + std::string("\x80\x40\x80\xff\xff\xff", 6));
}
