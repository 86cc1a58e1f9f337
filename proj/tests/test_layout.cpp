#include <fstream>

#include "doctest.h"
#include "visprompt/errors.hpp"
#include "visprompt/layout.hpp"

using namespace visprompt;

namespace {

std::string write_temp(const std::string& name, const std::string& content) {
    const std::string path = "/tmp/" + name;
    std::ofstream out(path, std::ios::trunc);
    out << content;
    return path;
}

RasterImage white_page(int w, int h) { return RasterImage::create(w, h, 3, 255); }

void dark_rect(RasterImage& img, const Rect& r) {
    for (int y = r.y; y < r.y1(); ++y)
        for (int x = r.x; x < r.x1(); ++x) {
            uint8_t* p = img.pixel(x, y);
            p[0] = p[1] = p[2] = 10;
        }
}

}  // namespace

TEST_CASE("category name round trip") {
    for (Category c : kAllCategories)
        CHECK(category_from_name(category_name(c)) == c);
    CHECK_THROWS_AS(category_from_name("banner"), InvalidInput);
}

TEST_CASE("category map defaults and fallback") {
    const CategoryMap m = CategoryMap::defaults();
    CHECK(m.lookup("plain text") == Category::text);
    CHECK(m.lookup("figure") == Category::figure);
    CHECK(m.lookup("never-seen-label") == Category::other);
}

TEST_CASE("external detections parse, clip, and sort") {
    const std::string path = write_temp(
        "dets_ok.jsonl",
        R"({"image": "a.png", "detections": [)"
        R"({"category": "title", "bbox": [10, -5, 200, 40], "score": 0.9},)"
        R"({"category": "plain text", "bbox": [10, 60, 150, 120], "score": 0.5}]})"
        "\n"
        R"({"image": "b.png", "detections": []})"
        "\n");

    const auto blocks = load_external_detections(path, "a.png", 160, 300);
    REQUIRE(blocks.size() == 2);
    CHECK(blocks[0].category == Category::title);
    CHECK(blocks[0].rect == Rect{10, 0, 150, 40});  // clipped to the image
    CHECK(blocks[0].confidence == doctest::Approx(0.9));
    CHECK(blocks[0].source == BlockSource::external);
    CHECK(blocks[1].category == Category::text);

    CHECK(load_external_detections(path, "b.png", 100, 100).empty());
    CHECK(load_external_detections(path, "missing.png", 100, 100).empty());
}

TEST_CASE("external detections report the bad line number") {
    const std::string path = write_temp(
        "dets_bad.jsonl",
        R"({"image": "a.png", "detections": []})"
        "\n"
        "not json\n");
    try {
        load_external_detections(path, "a.png", 100, 100);
        FAIL("expected ParseError");
    } catch (const ParseError& e) {
        CHECK(e.line == 2);
        CHECK(std::string(e.what()).find("line 2") != std::string::npos);
    }
}

TEST_CASE("external detections reject malformed boxes and scores") {
    const std::string bad_box = write_temp(
        "dets_badbox.jsonl",
        R"({"image": "a.png", "detections": [{"category": "text", "bbox": [50, 10, 20, 40], "score": 0.5}]})"
        "\n");
    CHECK_THROWS_AS(load_external_detections(bad_box, "a.png", 100, 100), ParseError);

    const std::string bad_score = write_temp(
        "dets_badscore.jsonl",
        R"({"image": "a.png", "detections": [{"category": "text", "bbox": [0, 0, 10, 10], "score": 1.5}]})"
        "\n");
    CHECK_THROWS_AS(load_external_detections(bad_score, "a.png", 100, 100), ParseError);
}

TEST_CASE("xycut config validation") {
    XyCutConfig bad;
    bad.valley_min_thickness = 0;
    CHECK_THROWS_AS(validate(bad), InvalidConfig);
}

TEST_CASE("heuristic finds two stacked paragraphs") {
    RasterImage page = white_page(400, 300);
    dark_rect(page, {40, 40, 320, 60});
    dark_rect(page, {40, 180, 320, 80});
    const auto blocks = detect_heuristic(page);
    REQUIRE(blocks.size() == 2);
    CHECK(blocks[0].rect == Rect{40, 40, 320, 60});
    CHECK(blocks[1].rect == Rect{40, 180, 320, 80});
    for (const auto& b : blocks) {
        CHECK(b.source == BlockSource::heuristic);
        CHECK(b.confidence == doctest::Approx(0.5));
    }
}

TEST_CASE("heuristic classifies a wide top strip as title") {
    RasterImage page = white_page(400, 400);
    dark_rect(page, {40, 10, 320, 24});   // wide, short, near the top
    dark_rect(page, {40, 200, 150, 120});
    const auto blocks = detect_heuristic(page);
    REQUIRE(blocks.size() == 2);
    CHECK(blocks[0].category == Category::title);
    CHECK(blocks[1].rect == Rect{40, 200, 150, 120});
}

TEST_CASE("heuristic classifies a dense block below the fold as figure") {
    RasterImage page = white_page(400, 400);
    dark_rect(page, {100, 200, 180, 150});  // solid ink, one run
    const auto blocks = detect_heuristic(page);
    REQUIRE(blocks.size() == 1);
    CHECK(blocks[0].category == Category::figure);
    CHECK(blocks[0].rect == Rect{100, 200, 180, 150});
}

TEST_CASE("heuristic splits side-by-side columns") {
    RasterImage page = white_page(400, 200);
    dark_rect(page, {20, 50, 150, 100});
    dark_rect(page, {230, 50, 150, 100});
    const auto blocks = detect_heuristic(page);
    REQUIRE(blocks.size() == 2);
    CHECK(blocks[0].rect == Rect{20, 50, 150, 100});
    CHECK(blocks[1].rect == Rect{230, 50, 150, 100});
}

TEST_CASE("heuristic on a blank page finds nothing") {
    CHECK(detect_heuristic(white_page(200, 200)).empty());
}
