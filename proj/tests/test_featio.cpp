#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstring>
#include <limits>
#include <sstream>

#include "oneseed/error.hpp"
#include "oneseed/featio.hpp"
#include "support.hpp"

using namespace oneseed;

TEST_CASE("FMAP layout of a 2x2x1 map") {
    const FeatureMap map(2, 2, 1, {0.0f, 0.5f, 0.5f, 1.0f});
    const std::string bytes = encode_fmap(map);
    REQUIRE(bytes.size() == 17 + 16);
    CHECK(bytes.substr(0, 5) == "FMAP1");
    const unsigned char header[12] = {2, 0, 0, 0, 2, 0, 0, 0, 1, 0, 0, 0};
    CHECK(std::memcmp(bytes.data() + 5, header, 12) == 0);
    // 0.5f = 0x3F000000, little-endian
    const unsigned char half[4] = {0x00, 0x00, 0x00, 0x3F};
    CHECK(std::memcmp(bytes.data() + 17 + 4, half, 4) == 0);
    CHECK(decode_fmap(bytes) == map);
}

TEST_CASE("FMAP file round-trip is bit exact") {
    testing::TempDir dir("fmap");
    std::mt19937_64 rng(7);
    std::normal_distribution<float> n(0.0f, 100.0f);
    FeatureMap map(5, 7, 3);
    for (auto& v : map.data()) v = n(rng);
    map.data()[4] = std::numeric_limits<float>::denorm_min();
    map.data()[5] = -0.0f;
    write_fmap(map, dir / "a.fmap");
    const FeatureMap back = read_fmap(dir / "a.fmap");
    REQUIRE(back.data().size() == map.data().size());
    CHECK(std::memcmp(back.data().data(), map.data().data(), map.data().size() * sizeof(float)) == 0);
    CHECK(std::signbit(back.data()[5]));
}

TEST_CASE("FMAP errors") {
    const std::string bytes = encode_fmap(FeatureMap(2, 2, 1, {0.0f, 0.5f, 0.5f, 1.0f}));
    try {
        decode_fmap(std::string_view(bytes).substr(0, 30));
        FAIL("expected FormatError");
    } catch (const FormatError& e) {
        const std::string what = e.what();
        CHECK(what.find("33") != std::string::npos);
        CHECK(what.find("30") != std::string::npos);
    }
    std::string bad = bytes;
    bad[0] = 'X';
    CHECK_THROWS_AS(decode_fmap(bad), FormatError);
    CHECK_THROWS_AS(decode_fmap(std::string("FMAP1")), FormatError);

    FeatureMap nan(1, 2, 1, {0.0f, std::numeric_limits<float>::quiet_NaN()});
    CHECK_THROWS_AS(encode_fmap(nan), ValueError);
    FeatureMap inf(1, 1, 1, {std::numeric_limits<float>::infinity()});
    CHECK_THROWS_AS(encode_fmap(inf), ValueError);
}

TEST_CASE("FMAP size cap triggers at cap + 1") {
    const FmapLimits limits{24};
    CHECK_NOTHROW(encode_fmap(FeatureMap(2, 3, 4), limits));
    CHECK_THROWS_AS(encode_fmap(FeatureMap(5, 5, 1), limits), CapacityError);
    const std::string at_cap = encode_fmap(FeatureMap(2, 3, 4));
    CHECK_NOTHROW(decode_fmap(at_cap, limits));
    CHECK_THROWS_AS(decode_fmap(at_cap, FmapLimits{23}), CapacityError);

    // A header claiming 1024 x 2048 x 1000 is refused before allocating.
    std::string header = "FMAP1";
    for (const std::uint32_t v : {1024u, 2048u, 1000u})
        for (int b = 0; b < 4; ++b) header.push_back(static_cast<char>((v >> (8 * b)) & 0xFF));
    CHECK_THROWS_AS(decode_fmap(header), CapacityError);
}

TEST_CASE("label maps") {
    testing::TempDir dir("labels");
    const ClassCatalog catalog = default_catalog();

    LabelMap ignored(3, 4);
    write_labelmap(ignored, dir / "ignored.pgm");
    const LabelMap back = read_labelmap(dir / "ignored.pgm", catalog);
    CHECK(back == ignored);
    CHECK(std::all_of(back.labels.begin(), back.labels.end(), [](auto v) { return v == kIgnoreLabel; }));

    LabelMap small(3, 1);
    small.labels = {0, 255, 4};
    write_labelmap(small, dir / "small.pgm");
    CHECK(read_labelmap(dir / "small.pgm", catalog) == small);
    CHECK(testing::slurp(dir / "small.pgm").substr(0, 2) == "P5");

    LabelMap out_of_catalog(1, 1, 19);
    CHECK_THROWS_AS(validate_labelmap(out_of_catalog, catalog), ValidationError);
    write_labelmap(out_of_catalog, dir / "bad.pgm");
    CHECK_THROWS_AS(read_labelmap(dir / "bad.pgm", catalog), ValidationError);
}

TEST_CASE("label map scores live in a sibling FMAP") {
    testing::TempDir dir("scores");
    LabelMap map(2, 2, 3);
    map.scores = std::vector<float>{0.1f, 0.2f, 0.3f, 1.0f};
    write_labelmap(map, dir / "m.pgm");
    CHECK(std::filesystem::exists(scores_path_for(dir / "m.pgm")));
    CHECK(read_labelmap(dir / "m.pgm") == map);

    map.scores.reset();
    write_labelmap(map, dir / "m.pgm");
    CHECK_FALSE(std::filesystem::exists(scores_path_for(dir / "m.pgm")));
    CHECK(read_labelmap(dir / "m.pgm") == map);
}

TEST_CASE("PGM errors") {
    testing::TempDir dir("pgm");
    testing::spit(dir / "p2.pgm", "P2\n1 1\n255\n0\n");
    CHECK_THROWS_AS(read_pgm(dir / "p2.pgm"), FormatError);
    testing::spit(dir / "short.pgm", std::string("P5\n2 2\n255\n\x01\x02", 13));
    CHECK_THROWS_AS(read_pgm(dir / "short.pgm"), FormatError);
    CHECK_THROWS_AS(read_pgm(dir / "missing.pgm"), Error);
}

TEST_CASE("slice plan for 8x12") {
    const SlicePlan plan = make_slice_plan(8, 12);
    REQUIRE(plan.slices.size() == 15);
    for (int m = 0; m < 3; ++m)
        for (int n = 0; n < 5; ++n) {
            const Slice& s = plan.slices[5 * m + n];
            CHECK(s.index == 5 * m + n);
            CHECK(s.row == 2 * m);
            CHECK(s.col == 2 * n);
            CHECK(s.height == 4);
            CHECK(s.width == 4);
        }
}

TEST_CASE("slice plan for 4x6") {
    const SlicePlan plan = make_slice_plan(4, 6);
    for (const auto& s : plan.slices) {
        CHECK(s.height == 2);
        CHECK(s.width == 2);
    }
    CHECK(plan.slices.back().row == 2);
    CHECK(plan.slices.back().col == 4);
    CHECK_THROWS_AS(make_slice_plan(3, 6), RangeError);
    CHECK_THROWS_AS(make_slice_plan(4, 5), RangeError);
}

TEST_CASE("slice plan for 1024x2048 clamps and covers") {
    const SlicePlan plan = make_slice_plan(1024, 2048);
    CHECK(plan.slices[0].height == 512);
    CHECK(plan.slices[0].width == 683);
    const Slice& last = plan.slices[14];
    CHECK(last.row == 512);
    CHECK(last.col == 1365);
    CHECK(last.width == 2048 - 1365);
    std::vector<char> covered(1024 * 2048, 0);
    for (const auto& s : plan.slices) {
        CHECK(s.row + s.height <= 1024);
        CHECK(s.col + s.width <= 2048);
        for (int r = s.row; r < s.row + s.height; ++r)
            std::fill_n(covered.begin() + r * 2048 + s.col, s.width, 1);
    }
    CHECK(std::count(covered.begin(), covered.end(), 0) == 0);
}

TEST_CASE("slice plan corners follow floor(l*m/4), floor(w*n/6)") {
    for (int l = 4; l <= 23; ++l)
        for (int w = 6; w <= 31; ++w) {
            const SlicePlan plan = make_slice_plan(l, w);
            for (const auto& s : plan.slices) {
                const int m = s.index / 5, n = s.index % 5;
                CHECK(s.row == l * m / 4);
                CHECK(s.col == w * n / 6);
                CHECK(s.height == std::min((l + 1) / 2, l - s.row));
                CHECK(s.width == std::min((w + 2) / 3, w - s.col));
                CHECK(s.center_row == doctest::Approx(s.row + (s.height - 1) / 2.0));
                CHECK(s.center_col == doctest::Approx(s.col + (s.width - 1) / 2.0));
            }
        }
}

TEST_CASE("slice plan text round-trip") {
    const SlicePlan plan = make_slice_plan(37, 53);
    std::ostringstream out;
    write_slice_plan(plan, out);
    std::istringstream in(out.str());
    CHECK(parse_slice_plan(in) == plan);
    CHECK(out.str().rfind("SLICEPLAN v1\n", 0) == 0);

    std::istringstream bad("SLICEPLAN v1\n0 0 0 4 4 1.5 1.5\n");
    CHECK_THROWS_AS(parse_slice_plan(bad), FormatError);
}
