#include "visprompt/synth.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "json.hpp"
#include "visprompt/dataset_io.hpp"
#include "visprompt/errors.hpp"

namespace visprompt {

const char* element_kind_name(ElementKind k) {
    switch (k) {
        case ElementKind::title: return "title";
        case ElementKind::paragraph: return "paragraph";
        case ElementKind::button: return "button";
        case ElementKind::image_placeholder: return "image_placeholder";
    }
    return "paragraph";
}

ElementKind element_kind_from_name(const std::string& name) {
    if (name == "title") return ElementKind::title;
    if (name == "paragraph") return ElementKind::paragraph;
    if (name == "button") return ElementKind::button;
    if (name == "image_placeholder") return ElementKind::image_placeholder;
    throw InvalidSpec("unknown element kind: " + name);
}

void validate(const PageSpec& spec) {
    if (spec.width < 1 || spec.height < 1)
        throw InvalidSpec("page size must be positive");
    for (size_t i = 0; i < spec.elements.size(); ++i) {
        const Rect& r = spec.elements[i].rect;
        if (r.w < 1 || r.h < 1)
            throw InvalidSpec("element " + std::to_string(i) + " has empty rect");
        if (r.x < 0 || r.y < 0 || r.x1() > spec.width || r.y1() > spec.height)
            throw InvalidSpec("element " + std::to_string(i) + " leaves the page");
        for (size_t j = 0; j < i; ++j)
            if (intersection_area(r, spec.elements[j].rect) > 0)
                throw InvalidSpec("elements " + std::to_string(j) + " and " +
                                  std::to_string(i) + " overlap");
    }
}

namespace {

Rgb parse_color(const nlohmann::json& j, const char* key) {
    if (!j.is_array() || j.size() != 3)
        throw InvalidSpec(std::string(key) + " must be [r, g, b]");
    int v[3];
    for (size_t i = 0; i < 3; ++i) {
        if (!j[i].is_number_integer())
            throw InvalidSpec(std::string(key) + " components must be integers");
        v[i] = j[i].get<int>();
        if (v[i] < 0 || v[i] > 255)
            throw InvalidSpec(std::string(key) + " components must be 0..255");
    }
    return {static_cast<uint8_t>(v[0]), static_cast<uint8_t>(v[1]),
            static_cast<uint8_t>(v[2])};
}

Rect parse_rect(const nlohmann::json& j) {
    if (!j.is_array() || j.size() != 4)
        throw InvalidSpec("rect must be [x, y, w, h]");
    for (const auto& v : j)
        if (!v.is_number_integer()) throw InvalidSpec("rect values must be integers");
    return {j[0].get<int>(), j[1].get<int>(), j[2].get<int>(), j[3].get<int>()};
}

}  // namespace

PageSpec parse_page_spec(const std::string& json_text) {
    nlohmann::json j = nlohmann::json::parse(json_text, nullptr, false);
    if (j.is_discarded() || !j.is_object())
        throw InvalidSpec("page spec is not a JSON object");
    if (!j.contains("width") || !j["width"].is_number_integer() ||
        !j.contains("height") || !j["height"].is_number_integer())
        throw InvalidSpec("page spec needs integer width and height");

    PageSpec spec;
    spec.width = j["width"].get<int>();
    spec.height = j["height"].get<int>();
    if (j.contains("background")) spec.background = parse_color(j["background"], "background");
    if (j.contains("elements")) {
        if (!j["elements"].is_array()) throw InvalidSpec("elements must be an array");
        for (const auto& e : j["elements"]) {
            if (!e.is_object()) throw InvalidSpec("element must be an object");
            if (!e.contains("kind") || !e["kind"].is_string())
                throw InvalidSpec("element needs a string kind");
            if (!e.contains("rect")) throw InvalidSpec("element needs a rect");
            PageElement el;
            el.kind = element_kind_from_name(e["kind"].get<std::string>());
            el.rect = parse_rect(e["rect"]);
            if (e.contains("text")) {
                if (!e["text"].is_string()) throw InvalidSpec("text must be a string");
                el.text = e["text"].get<std::string>();
            }
            if (e.contains("ink")) el.ink = parse_color(e["ink"], "ink");
            if (e.contains("fill")) {
                el.fill = parse_color(e["fill"], "fill");
                el.has_fill = true;
            }
            spec.elements.push_back(std::move(el));
        }
    }
    validate(spec);
    return spec;
}

PageSpec load_page_spec(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open page spec: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_page_spec(buf.str());
}

namespace {

void fill_rect(RasterImage& img, const Rect& r, const Rgb& c) {
    for (int y = r.y; y < r.y1(); ++y)
        for (int x = r.x; x < r.x1(); ++x) {
            uint8_t* p = &img.data[img.index(x, y, 0)];
            p[0] = c.r;
            p[1] = c.g;
            p[2] = c.b;
        }
}

// Paragraph geometry: a 6px spine down the left edge plus full-width bars of
// height 8 every 12px. Dimensions survive a 3x3 open without changing the
// ink extent, and the spine keeps all bars in one connected region.
constexpr int kSpineW = 6;
constexpr int kBarH = 8;
constexpr int kBarStep = 12;

std::vector<Rect> paragraph_bars(const Rect& r) {
    std::vector<Rect> bars;
    for (int y = r.y; y + kBarH <= r.y1(); y += kBarStep)
        bars.push_back({r.x, y, r.w, kBarH});
    if (bars.empty()) bars.push_back(r);
    return bars;
}

Rect ink_bounds(const std::vector<Rect>& rects) {
    Rect b = rects.front();
    for (const Rect& r : rects) {
        const int x1 = std::max(b.x1(), r.x1());
        const int y1 = std::max(b.y1(), r.y1());
        b.x = std::min(b.x, r.x);
        b.y = std::min(b.y, r.y);
        b.w = x1 - b.x;
        b.h = y1 - b.y;
    }
    return b;
}

}  // namespace

std::pair<RasterImage, std::vector<SidecarEntry>> render(const PageSpec& spec) {
    validate(spec);
    RasterImage img = RasterImage::create(spec.width, spec.height, 3);
    fill_rect(img, {0, 0, spec.width, spec.height}, spec.background);

    std::vector<SidecarEntry> sidecar;
    for (const PageElement& el : spec.elements) {
        const Rgb block_color = el.has_fill ? el.fill : el.ink;
        std::vector<Rect> drawn;
        if (el.kind == ElementKind::paragraph && el.rect.h >= kBarStep + kBarH &&
            el.rect.w > kSpineW) {
            drawn = paragraph_bars(el.rect);
            const Rect spine{el.rect.x, drawn.front().y, kSpineW,
                             drawn.back().y1() - drawn.front().y};
            for (const Rect& bar : drawn) fill_rect(img, bar, el.ink);
            fill_rect(img, spine, el.ink);
            drawn.push_back(spine);
        } else {
            drawn = {el.rect};
            fill_rect(img, el.rect, block_color);
        }
        SidecarEntry entry;
        entry.rect = ink_bounds(drawn);
        entry.text = el.text;
        entry.kind = element_kind_name(el.kind);
        sidecar.push_back(std::move(entry));
    }
    return {std::move(img), std::move(sidecar)};
}

std::string sidecar_path_for(const std::string& image_path) {
    const size_t slash = image_path.find_last_of('/');
    const size_t dot = image_path.find_last_of('.');
    if (dot == std::string::npos || (slash != std::string::npos && dot < slash))
        return image_path + ".gt.json";
    return image_path.substr(0, dot) + ".gt.json";
}

void write_sidecar(const std::vector<SidecarEntry>& entries,
                   const std::string& path) {
    nlohmann::ordered_json j;
    j["entries"] = nlohmann::ordered_json::array();
    for (const SidecarEntry& e : entries) {
        nlohmann::ordered_json o;
        o["rect"] = {e.rect.x, e.rect.y, e.rect.w, e.rect.h};
        o["text"] = e.text;
        o["kind"] = e.kind;
        j["entries"].push_back(std::move(o));
    }
    atomic_write_text(path, j.dump(2) + "\n");
}

std::vector<SidecarEntry> read_sidecar(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open sidecar: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    nlohmann::json j = nlohmann::json::parse(buf.str(), nullptr, false);
    if (j.is_discarded() || !j.is_object() || !j.contains("entries") ||
        !j["entries"].is_array())
        throw ParseError("sidecar must be {\"entries\": [...]}: " + path);
    std::vector<SidecarEntry> out;
    for (const auto& e : j["entries"]) {
        if (!e.is_object() || !e.contains("rect") || !e["rect"].is_array() ||
            e["rect"].size() != 4 || !e.contains("text") || !e["text"].is_string())
            throw ParseError("malformed sidecar entry in " + path);
        SidecarEntry entry;
        entry.rect = {e["rect"][0].get<int>(), e["rect"][1].get<int>(),
                      e["rect"][2].get<int>(), e["rect"][3].get<int>()};
        entry.text = e["text"].get<std::string>();
        if (e.contains("kind") && e["kind"].is_string())
            entry.kind = e["kind"].get<std::string>();
        out.push_back(std::move(entry));
    }
    return out;
}

}  // namespace visprompt
