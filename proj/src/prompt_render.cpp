#include "visprompt/prompt_render.hpp"

#include <cmath>
#include <string>

#include "visprompt/errors.hpp"

namespace visprompt {

void validate(const AnnotationStyle& style) {
    if (style.stroke_px < 1)
        throw InvalidConfig("style.stroke_px must be >= 1");
    if (style.label_scale < 1)
        throw InvalidConfig("style.label_scale must be >= 1");
    if (!(style.overlay_alpha > 0.0) || !(style.overlay_alpha < 1.0))
        throw InvalidConfig("style.overlay_alpha must be in (0, 1)");
}

CategoryPalette CategoryPalette::defaults() {
    CategoryPalette p;
    p.colors = {
        {Category::title, {0, 0, 255}},     {Category::text, {0, 128, 0}},
        {Category::figure, {255, 165, 0}},  {Category::table, {128, 0, 128}},
        {Category::button, {0, 255, 255}},  {Category::other, {128, 128, 128}},
    };
    return p;
}

Rgb CategoryPalette::lookup(Category c) const {
    auto it = colors.find(c);
    if (it != colors.end()) return it->second;
    return {128, 128, 128};
}

namespace {

// 5x7 digit bitmaps, one byte per row, bit 4 = leftmost column.
constexpr uint8_t kDigitFont[10][7] = {
    {0x0E, 0x11, 0x13, 0x15, 0x19, 0x11, 0x0E},  // 0
    {0x04, 0x0C, 0x04, 0x04, 0x04, 0x04, 0x0E},  // 1
    {0x0E, 0x11, 0x01, 0x02, 0x04, 0x08, 0x1F},  // 2
    {0x1F, 0x02, 0x04, 0x02, 0x01, 0x11, 0x0E},  // 3
    {0x02, 0x06, 0x0A, 0x12, 0x1F, 0x02, 0x02},  // 4
    {0x1F, 0x10, 0x1E, 0x01, 0x01, 0x11, 0x0E},  // 5
    {0x06, 0x08, 0x10, 0x1E, 0x11, 0x11, 0x0E},  // 6
    {0x1F, 0x01, 0x02, 0x04, 0x08, 0x08, 0x08},  // 7
    {0x0E, 0x11, 0x11, 0x0E, 0x11, 0x11, 0x0E},  // 8
    {0x0E, 0x11, 0x11, 0x0F, 0x01, 0x02, 0x0C},  // 9
};

constexpr int kGlyphW = 5;
constexpr int kGlyphH = 7;

RasterImage ensure_rgb(const RasterImage& img) {
    validate(img);
    if (img.channels >= 3) return img;
    RasterImage out = RasterImage::create(img.width, img.height, 3);
    for (int y = 0; y < img.height; ++y)
        for (int x = 0; x < img.width; ++x) {
            const uint8_t v = img.data[img.index(x, y, 0)];
            uint8_t* p = &out.data[out.index(x, y, 0)];
            p[0] = p[1] = p[2] = v;
        }
    return out;
}

void put_color(RasterImage& img, int x, int y, const Rgba& c) {
    if (x < 0 || y < 0 || x >= img.width || y >= img.height) return;
    uint8_t* p = &img.data[img.index(x, y, 0)];
    p[0] = c.r;
    p[1] = c.g;
    p[2] = c.b;
    if (img.channels == 4) p[3] = c.a;
}

void draw_hline(RasterImage& img, int x0, int x1, int y, const Rgba& c) {
    for (int x = x0; x <= x1; ++x) put_color(img, x, y, c);
}

void draw_vline(RasterImage& img, int x, int y0, int y1, const Rgba& c) {
    for (int y = y0; y <= y1; ++y) put_color(img, x, y, c);
}

void draw_text(RasterImage& img, const std::string& digits, int ox, int oy,
               int scale, const Rgba& c) {
    int pen_x = ox;
    for (char ch : digits) {
        if (ch < '0' || ch > '9') continue;
        const uint8_t* rows = kDigitFont[ch - '0'];
        for (int gy = 0; gy < kGlyphH; ++gy)
            for (int gx = 0; gx < kGlyphW; ++gx) {
                if (!((rows[gy] >> (kGlyphW - 1 - gx)) & 1)) continue;
                for (int sy = 0; sy < scale; ++sy)
                    for (int sx = 0; sx < scale; ++sx)
                        put_color(img, pen_x + gx * scale + sx,
                                  oy + gy * scale + sy, c);
            }
        pen_x += (kGlyphW + 1) * scale;
    }
}

int text_width(const std::string& digits, int scale) {
    if (digits.empty()) return 0;
    return static_cast<int>(digits.size()) * (kGlyphW + 1) * scale - scale;
}

}  // namespace

RasterImage draw_boxes(const RasterImage& img,
                       const std::vector<ElementBox>& boxes,
                       const AnnotationStyle& style) {
    validate(style);
    RasterImage out = ensure_rgb(img);
    for (const ElementBox& box : boxes) {
        const Rect r = clip_rect(box.rect, out.width, out.height);
        if (r.w <= 0 || r.h <= 0) continue;
        const int inset_max = std::min(style.stroke_px, (std::min(r.w, r.h) + 1) / 2);
        for (int t = 0; t < inset_max; ++t) {
            const int x0 = r.x + t, x1 = r.x1() - 1 - t;
            const int y0 = r.y + t, y1 = r.y1() - 1 - t;
            if (x0 > x1 || y0 > y1) break;
            draw_hline(out, x0, x1, y0, style.box_color);
            draw_hline(out, x0, x1, y1, style.box_color);
            draw_vline(out, x0, y0, y1, style.box_color);
            draw_vline(out, x1, y0, y1, style.box_color);
        }

        const std::string digits = std::to_string(box.label);
        const int tw = text_width(digits, style.label_scale);
        const int th = kGlyphH * style.label_scale;
        int tx = r.x;
        int ty = r.y - th - 2;
        if (ty < 0 || tx + tw > out.width)
            // Interior fallback when the exterior spot leaves the image.
            { tx = r.x + 2; ty = r.y + 2; }
        draw_text(out, digits, tx, ty, style.label_scale, style.box_color);
    }
    return out;
}

RasterImage draw_layout_overlay(const RasterImage& img,
                                const std::vector<LayoutBlock>& blocks,
                                const CategoryPalette& palette,
                                const AnnotationStyle& style) {
    validate(style);
    RasterImage out = ensure_rgb(img);
    const double alpha = style.overlay_alpha;
    for (const LayoutBlock& block : blocks) {
        const Rect r = clip_rect(block.rect, out.width, out.height);
        if (r.w <= 0 || r.h <= 0) continue;
        const Rgb c = palette.lookup(block.category);
        const double cv[3] = {static_cast<double>(c.r), static_cast<double>(c.g),
                              static_cast<double>(c.b)};
        for (int y = r.y; y < r.y1(); ++y)
            for (int x = r.x; x < r.x1(); ++x) {
                uint8_t* p = &out.data[out.index(x, y, 0)];
                for (int k = 0; k < 3; ++k)
                    p[k] = static_cast<uint8_t>(
                        std::floor(alpha * cv[k] + (1.0 - alpha) * p[k] + 0.5));
            }
    }
    return out;
}

}  // namespace visprompt
