#pragma once

#include <string>
#include <utility>
#include <vector>

#include "visprompt/ocr.hpp"
#include "visprompt/prompt_render.hpp"
#include "visprompt/raster.hpp"

namespace visprompt {

enum class ElementKind { title, paragraph, button, image_placeholder };

const char* element_kind_name(ElementKind k);
ElementKind element_kind_from_name(const std::string& name);

struct PageElement {
    ElementKind kind = ElementKind::paragraph;
    Rect rect;
    std::string text;
    Rgb ink{0, 0, 0};
    Rgb fill{0, 0, 0};  // used for solid blocks; defaults to ink
    bool has_fill = false;
};

struct PageSpec {
    int width = 0;
    int height = 0;
    Rgb background{255, 255, 255};
    std::vector<PageElement> elements;
};

// Elements must lie inside the page and must not overlap each other.
void validate(const PageSpec& spec);

// JSON schema (all colors [r, g, b] 0..255):
//   {"width": W, "height": H, "background": [..], "elements":
//     [{"kind": "title|paragraph|button|image_placeholder",
//       "rect": [x, y, w, h], "text": "...", "ink": [..], "fill": [..]}]}
// background, text, ink, and fill are optional.
PageSpec load_page_spec(const std::string& path);
PageSpec parse_page_spec(const std::string& json_text);

// Deterministic rendering, no fonts: titles, buttons, and image placeholders
// are solid blocks; paragraphs are full-width text bars tied together by a
// left spine so each element stays one connected ink region. The sidecar maps
// each element's tight ink bounds to its text for the mock OCR engine.
std::pair<RasterImage, std::vector<SidecarEntry>> render(const PageSpec& spec);

// Sidecar files live next to images as "<stem>.gt.json".
std::string sidecar_path_for(const std::string& image_path);
void write_sidecar(const std::vector<SidecarEntry>& entries, const std::string& path);
std::vector<SidecarEntry> read_sidecar(const std::string& path);

}  // namespace visprompt
