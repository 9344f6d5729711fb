#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <sstream>

#include "oneseed/catalog.hpp"
#include "oneseed/error.hpp"

using namespace oneseed;

namespace {

ClassCatalog parse(const std::string& text, bool require_seeds = true) {
    std::istringstream in(text);
    return parse_catalog(in, require_seeds);
}

ClassDef make(int id, const std::string& name, ClassKind kind, std::uint8_t bands) {
    return ClassDef{id, name, kind, "group", bands, SeedPixel{"img", id, 0}};
}

}  // namespace

TEST_CASE("default catalog splits 12 objects from 7 scenes") {
    const ClassCatalog c = default_catalog();
    CHECK(c.size() == 19);
    CHECK(c.object_count() == 12);
    CHECK(c.scene_count() == 7);
    std::vector<std::string> objects;
    for (const int id : c.object_ids()) objects.push_back(c.get(id).name);
    CHECK(objects == std::vector<std::string>{"fence", "pole", "traffic light", "traffic sign", "person", "rider", "car",
                                              "truck", "bus", "train", "motorcycle", "bicycle"});
    CHECK(c.categories() ==
          std::vector<std::string>{"flat", "construction", "object", "nature", "sky", "human", "vehicle"});
    for (int id = 0; id < 19; ++id) CHECK(c.index_of(id) == static_cast<std::size_t>(id));
}

TEST_CASE("parsing a file with seeds") {
    const ClassCatalog c = parse(
        "CATALOG v1\n"
        "# comment\n"
        "0\troad\tscene\tflat\t2,3\tscene_0001\t60\t10\n"
        "5\tpole\tobject\tobject\t0,1,2,3\tscene_0003\t12\t40\n");
    CHECK(c.size() == 2);
    CHECK(c.get(0).band_mask == 0b1100);
    CHECK(c.get(5).kind == ClassKind::object);
    CHECK(c.get(5).seed == SeedPixel{"scene_0003", 12, 40});
    CHECK(c.category_of(5) == 1);
}

TEST_CASE("minimal catalog") {
    const ClassCatalog c = parse("CATALOG v1\n3\tthing\tobject\tall\t0,1,2,3\timg\t0\t0\n");
    CHECK(c.object_count() + c.scene_count() == 1);
}

TEST_CASE("catalog errors") {
    CHECK_THROWS_AS(parse("CATALOG v1\n255\tx\tobject\tg\t0\timg\t0\t0\n"), ValidationError);
    CHECK_THROWS_AS(parse("CATALOG v1\n1\tx\tobject\tg\t0\timg\t0\t0\n1\ty\tscene\tg\t0\timg\t0\t0\n"), ValidationError);
    CHECK_THROWS_AS(parse("CATALOG v1\n1\tx\tobject\tg\t0\timg\t0\t0\n2\tx\tscene\tg\t0\timg\t0\t0\n"), ValidationError);
    CHECK_THROWS_AS(parse("CATALOG v1\n1\tx\tobject\tg\t\timg\t0\t0\n"), Error);
    CHECK_THROWS_AS(parse("CATALOG v1\n1\tx\tobject\tg\t0\t-\t-\t-\n"), ValidationError);
    CHECK_NOTHROW(parse("CATALOG v1\n1\tx\tobject\tg\t0\t-\t-\t-\n", false));
    CHECK_THROWS_AS(parse("CATALOG v1\n1\tx\tobject\tg\t0\n"), ParseError);
    CHECK_THROWS_AS(parse("CATALOG v1\n1\tx\tthing\tg\t0\timg\t0\t0\n"), ParseError);
    CHECK_THROWS_AS(parse("1\tx\tobject\tg\t0\timg\t0\t0\n"), ParseError);
    try {
        parse("CATALOG v1\n1\tx\tobject\tg\t0\timg\tzero\t0\n");
        FAIL("expected ParseError");
    } catch (const ParseError& e) {
        CHECK(std::string(e.what()).find("line 2") != std::string::npos);
    }
}

TEST_CASE("bands_allowing") {
    const ClassCatalog c({make(1, "sky", ClassKind::scene, 0b0001), make(2, "road", ClassKind::scene, 0b1100),
                          make(3, "pole", ClassKind::object, 0b1111)});
    CHECK(bands_allowing(c, 0) == std::set<int>{1, 3});
    CHECK(bands_allowing(c, 3) == std::set<int>{2, 3});
    for (int b = 0; b < 4; ++b) CHECK(bands_allowing(c, b).count(3) == 1);
    CHECK_THROWS_AS(bands_allowing(c, 4), RangeError);
    CHECK_THROWS_AS(bands_allowing(c, -1), RangeError);

    const ClassCatalog only_sky({make(1, "sky", ClassKind::scene, 0b0001), make(2, "road", ClassKind::scene, 0b1100)});
    CHECK(bands_allowing(only_sky, 0) == std::set<int>{1});
}

TEST_CASE("default band table") {
    const ClassCatalog c = default_catalog();
    const int sky = c.find_by_name("sky")->id;
    CHECK(bands_allowing(c, 3).count(sky) == 0);
    CHECK(bands_allowing(c, 0).count(sky) == 1);
    for (int b = 0; b < 4; ++b) {
        const auto allowed = bands_allowing(c, b);
        for (const auto& def : c.classes()) CHECK((allowed.count(def.id) == 1) == def.allows_band(b));
    }
}

TEST_CASE("save and load round-trip") {
    ClassCatalog c = default_catalog();
    for (const auto& def : default_catalog().classes()) c = c.with_seed(def.id, SeedPixel{"scene_00" + std::to_string(def.id), def.id, 2 * def.id});
    std::ostringstream out;
    write_catalog(c, out);
    CHECK(parse(out.str()) == c);
    std::ostringstream again;
    write_catalog(parse(out.str()), again);
    CHECK(again.str() == out.str());
}

TEST_CASE("seed requirement") {
    CHECK_THROWS_AS(ClassCatalog({make(1, "a", ClassKind::object, 1), ClassDef{2, "b", ClassKind::object, "g", 1, SeedPixel{"img", 1, 0}}}),
                    ValidationError);
    CHECK_THROWS_AS(ClassCatalog({ClassDef{1, "x", ClassKind::object, "g", 1, std::nullopt}}), ValidationError);
    CHECK_NOTHROW(ClassCatalog({ClassDef{1, "x", ClassKind::object, "g", 1, std::nullopt}}, false));
}
