#include <string>
#include <vector>

#include "doctest.h"
#include "visprompt/errors.hpp"
#include "visprompt/pipeline.hpp"
#include "visprompt/synth.hpp"

using namespace visprompt;

namespace {

PageElement element(ElementKind kind, Rect rect, std::string text = "") {
    PageElement el;
    el.kind = kind;
    el.rect = rect;
    el.text = std::move(text);
    return el;
}

// Eight non-overlapping elements on an 800x600 page, in reading order.
PageSpec eight_element_page() {
    PageSpec spec;
    spec.width = 800;
    spec.height = 600;
    spec.elements = {
        element(ElementKind::title, {50, 20, 500, 40}, "Acme Dashboard"),
        element(ElementKind::paragraph, {50, 80, 340, 100}, "Welcome back"),
        element(ElementKind::button, {450, 100, 120, 40}, "Login"),
        element(ElementKind::button, {450, 160, 120, 40}, "Sign Up"),
        element(ElementKind::image_placeholder, {50, 220, 250, 180}, "hero image"),
        element(ElementKind::paragraph, {350, 220, 300, 100}, "Latest news"),
        element(ElementKind::button, {50, 430, 150, 50}, "Contact Us"),
        element(ElementKind::paragraph, {250, 430, 400, 60}, "Footer links"),
    };
    return spec;
}

}  // namespace

TEST_CASE("element kind names round trip") {
    for (ElementKind k : {ElementKind::title, ElementKind::paragraph,
                          ElementKind::button, ElementKind::image_placeholder})
        CHECK(element_kind_from_name(element_kind_name(k)) == k);
    CHECK_THROWS_AS(element_kind_from_name("video"), InvalidSpec);
}

TEST_CASE("page spec json parsing") {
    const PageSpec spec = parse_page_spec(R"({
        "width": 200, "height": 100, "background": [250, 250, 250],
        "elements": [
            {"kind": "button", "rect": [10, 10, 60, 30], "text": "OK",
             "ink": [0, 0, 0], "fill": [20, 40, 60]},
            {"kind": "paragraph", "rect": [10, 50, 100, 40]}
        ]})");
    CHECK(spec.width == 200);
    CHECK(spec.background.r == 250);
    REQUIRE(spec.elements.size() == 2);
    CHECK(spec.elements[0].kind == ElementKind::button);
    CHECK(spec.elements[0].rect == Rect{10, 10, 60, 30});
    CHECK(spec.elements[0].text == "OK");
    CHECK(spec.elements[0].has_fill);
    CHECK(spec.elements[0].fill.b == 60);
    CHECK(spec.elements[1].text.empty());
    CHECK(!spec.elements[1].has_fill);
}

TEST_CASE("page spec rejections") {
    CHECK_THROWS_AS(parse_page_spec("[]"), InvalidSpec);
    CHECK_THROWS_AS(parse_page_spec(R"({"width": 0, "height": 10})"), InvalidSpec);
    // off the page
    CHECK_THROWS_AS(parse_page_spec(R"({"width": 50, "height": 50, "elements":
        [{"kind": "button", "rect": [40, 40, 20, 20]}]})"),
                    InvalidSpec);
    // overlapping pair
    CHECK_THROWS_AS(parse_page_spec(R"({"width": 100, "height": 100, "elements":
        [{"kind": "button", "rect": [10, 10, 30, 30]},
         {"kind": "button", "rect": [20, 20, 30, 30]}]})"),
                    InvalidSpec);
    CHECK_THROWS_AS(parse_page_spec(R"({"width": 100, "height": 100, "elements":
        [{"kind": "button", "rect": [10, 10, 30, 30], "ink": [300, 0, 0]}]})"),
                    InvalidSpec);
}

TEST_CASE("rendering is deterministic") {
    const PageSpec spec = eight_element_page();
    const auto [img_a, sc_a] = render(spec);
    const auto [img_b, sc_b] = render(spec);
    CHECK(img_a.data == img_b.data);
    REQUIRE(sc_a.size() == sc_b.size());
    for (size_t i = 0; i < sc_a.size(); ++i) {
        CHECK(sc_a[i].rect == sc_b[i].rect);
        CHECK(sc_a[i].text == sc_b[i].text);
    }
}

TEST_CASE("solid blocks use fill when present, ink otherwise") {
    PageSpec spec;
    spec.width = 100;
    spec.height = 60;
    PageElement btn = element(ElementKind::button, {10, 10, 40, 20}, "Go");
    btn.fill = {20, 40, 60};
    btn.has_fill = true;
    PageElement block = element(ElementKind::image_placeholder, {10, 35, 40, 20});
    spec.elements = {btn, block};

    const auto [img, sidecar] = render(spec);
    const uint8_t* p = img.pixel(12, 12);
    CHECK(p[0] == 20);
    CHECK(p[1] == 40);
    CHECK(p[2] == 60);
    const uint8_t* q = img.pixel(12, 40);
    CHECK(q[0] == 0);  // default ink
    const uint8_t* bg = img.pixel(70, 5);
    CHECK(bg[0] == 255);
    REQUIRE(sidecar.size() == 2);
    CHECK(sidecar[0].rect == Rect{10, 10, 40, 20});
    CHECK(sidecar[0].text == "Go");
    CHECK(sidecar[0].kind == "button");
}

TEST_CASE("paragraphs draw bars joined by a spine") {
    PageSpec spec;
    spec.width = 400;
    spec.height = 300;
    spec.elements = {element(ElementKind::paragraph, {50, 80, 340, 100}, "p")};
    const auto [img, sidecar] = render(spec);

    CHECK(img.pixel(100, 85)[0] == 0);    // inside the first bar
    CHECK(img.pixel(100, 90)[0] == 255);  // inter-bar gap, right of the spine
    CHECK(img.pixel(52, 90)[0] == 0);     // the spine fills the gap
    // Bars start every 12px and are 8 tall, so the last one that fits in
    // y = 80..180 covers 164..172; the sidecar stores the tight ink bounds.
    REQUIRE(sidecar.size() == 1);
    CHECK(sidecar[0].rect == Rect{50, 80, 340, 92});
}

TEST_CASE("short paragraphs fall back to a solid block") {
    PageSpec spec;
    spec.width = 100;
    spec.height = 40;
    spec.elements = {element(ElementKind::paragraph, {10, 10, 80, 15}, "p")};
    const auto [img, sidecar] = render(spec);
    CHECK(sidecar[0].rect == Rect{10, 10, 80, 15});
    for (int y = 10; y < 25; ++y)
        for (int x = 10; x < 90; ++x) CHECK(img.pixel(x, y)[0] == 0);
}

TEST_CASE("sidecar path naming") {
    CHECK(sidecar_path_for("/data/img.png") == "/data/img.gt.json");
    CHECK(sidecar_path_for("a/b/shot_01.png") == "a/b/shot_01.gt.json");
    CHECK(sidecar_path_for("noext") == "noext.gt.json");
    CHECK(sidecar_path_for("/dir.v2/plain") == "/dir.v2/plain.gt.json");
}

TEST_CASE("sidecar files round trip") {
    const std::vector<SidecarEntry> entries = {
        {{10, 20, 30, 40}, "Login", "button"},
        {{5, 5, 50, 8}, "Header", "title"},
    };
    const std::string path = "/tmp/sidecar_rt.gt.json";
    write_sidecar(entries, path);
    const auto back = read_sidecar(path);
    REQUIRE(back.size() == 2);
    CHECK(back[0].rect == Rect{10, 20, 30, 40});
    CHECK(back[0].text == "Login");
    CHECK(back[0].kind == "button");
    CHECK(back[1].text == "Header");

    atomic_write_text(path, "{}");
    CHECK_THROWS_AS(read_sidecar(path), ParseError);
    CHECK_THROWS_AS(read_sidecar("/tmp/no_such_sidecar.gt.json"), IoError);
}

TEST_CASE("detection recovers all eight synthetic elements") {
    const PageSpec spec = eight_element_page();
    const auto [img, sidecar] = render(spec);
    const PipelineConfig cfg;
    const auto boxes = detect_element_boxes(img, cfg);
    REQUIRE(boxes.size() == 8);
    for (size_t i = 0; i < 8; ++i) {
        CHECK(boxes[i].label == static_cast<int>(i) + 1);
        CHECK(iou(boxes[i].rect, sidecar[i].rect) >= 0.8);
    }
}

TEST_CASE("mock ocr answers from the sidecar for detected boxes") {
    const PageSpec spec = eight_element_page();
    const auto [img, sidecar] = render(spec);
    const PipelineConfig cfg;
    const auto boxes = detect_element_boxes(img, cfg);
    REQUIRE(boxes.size() == 8);

    MockSidecarOcr engine(sidecar);
    const OcrResult login = engine.recognize_region(img, boxes[2].rect);
    CHECK(login.text == "Login");
    CHECK(login.confidence == 99);

    int dropped = -1;
    const auto with_text = extract_texts(img, boxes, engine, OcrConfig{}, &dropped);
    REQUIRE(with_text.size() == 8);
    CHECK(dropped == 0);
    CHECK(with_text[0].text == "Acme Dashboard");
    CHECK(with_text[7].text == "Footer links");
}

TEST_CASE("a blank page yields no boxes") {
    PageSpec spec;
    spec.width = 320;
    spec.height = 240;
    const auto [img, sidecar] = render(spec);
    CHECK(sidecar.empty());
    const PipelineConfig cfg;
    CHECK(detect_element_boxes(img, cfg).empty());
}
