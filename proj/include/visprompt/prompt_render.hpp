#pragma once

#include <cstdint>
#include <map>
#include <vector>

#include "visprompt/element_detect.hpp"
#include "visprompt/layout.hpp"
#include "visprompt/raster.hpp"

namespace visprompt {

struct Rgba {
    uint8_t r = 0, g = 0, b = 0, a = 255;
};

struct Rgb {
    uint8_t r = 0, g = 0, b = 0;
};

struct AnnotationStyle {
    Rgba box_color{255, 0, 0, 255};
    int stroke_px = 3;
    int label_scale = 2;  // multiplies the 5x7 digit bitmaps
    double overlay_alpha = 0.35;
};

void validate(const AnnotationStyle& style);

struct CategoryPalette {
    std::map<Category, Rgb> colors;

    static CategoryPalette defaults();
    // Total over the category set: unmapped categories get the `other` gray.
    Rgb lookup(Category c) const;
};

// Strokes of width stroke_px just inside each rect perimeter, plus the label
// number in a scaled 5x7 digit font at the rect's exterior top-left (interior
// top-left when the exterior would leave the image). All other pixels are
// unchanged. Grayscale input is expanded to RGB first.
RasterImage draw_boxes(const RasterImage& img,
                       const std::vector<ElementBox>& boxes,
                       const AnnotationStyle& style = AnnotationStyle{});

// Translucent category-colored fill per block, composited in list order:
// out = floor(alpha*c + (1-alpha)*src + 0.5) per channel.
RasterImage draw_layout_overlay(const RasterImage& img,
                                const std::vector<LayoutBlock>& blocks,
                                const CategoryPalette& palette = CategoryPalette::defaults(),
                                const AnnotationStyle& style = AnnotationStyle{});

}  // namespace visprompt
