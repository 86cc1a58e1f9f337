#pragma once

#include <map>
#include <string>
#include <vector>

#include "visprompt/raster.hpp"

namespace visprompt {

enum class Category { title, text, figure, table, button, other };

const char* category_name(Category c);
Category category_from_name(const std::string& name);
// Order used wherever categories are enumerated deterministically.
extern const Category kAllCategories[6];

enum class BlockSource { external, heuristic };

struct LayoutBlock {
    Rect rect;
    Category category = Category::other;
    double confidence = 0.0;  // 0..1
    BlockSource source = BlockSource::heuristic;
};

// Detector label -> category. Unmapped labels become `other`.
struct CategoryMap {
    std::map<std::string, Category> mapping;

    static CategoryMap defaults();
    Category lookup(const std::string& label) const;
};

// Reads the detection exchange format (JSON Lines, one object per image):
//   {"image": "<relative path>", "detections":
//     [{"category": "<string>", "bbox": [x0, y0, x1, y1], "score": <0..1>}]}
// with bbox in absolute pixels, x0<x1, y0<y1. Returns the blocks recorded for
// image_id, clipped to img_w x img_h and sorted in reading order; an unknown
// image_id gives an empty list. Malformed lines raise ParseError with the
// line number.
std::vector<LayoutBlock> load_external_detections(const std::string& file,
                                                  const std::string& image_id,
                                                  int img_w, int img_h,
                                                  const CategoryMap& categories =
                                                      CategoryMap::defaults());

// Recursive XY-cut thresholds. A valley is a run of rows/columns whose ink
// fraction stays below valley_ink_fraction for at least valley_min_thickness
// pixels; regions are split on valleys until none remain or the region drops
// under min_region_side.
struct XyCutConfig {
    double valley_ink_fraction = 0.005;
    int valley_min_thickness = 12;
    int min_region_side = 32;
    double drop_ink_fraction = 0.02;    // leaves with less ink are discarded
    double title_min_width_frac = 0.5;  // of image width
    double title_max_height_frac = 0.08;
    double title_top_frac = 0.15;
    double figure_ink_fraction = 0.40;
};

void validate(const XyCutConfig& cfg);

// Dependency-free fallback segmenter: binarizes an ink map, recursively
// splits on whitespace valleys, trims each leaf to its ink extent, and
// classifies leaves as title / figure / text. Confidence is fixed at 0.5 and
// source is heuristic. Deterministic.
std::vector<LayoutBlock> detect_heuristic(const RasterImage& img,
                                          const XyCutConfig& cfg = XyCutConfig{});

}  // namespace visprompt
