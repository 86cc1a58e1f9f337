#pragma once

#include <string>
#include <vector>

#include "visprompt/raster.hpp"

namespace visprompt {

// Geometry gates for candidate element rects. All values are configurable;
// the defaults below are this toolchain's.
struct CandidateFilter {
    long long min_area = 100;         // px^2
    double max_area_fraction = 0.9;   // of the full image area
    double aspect_min = 0.2;          // w/h
    double aspect_max = 15.0;
    double iou_dedup = 0.5;
    double containment_drop = 0.9;
};

// Throws InvalidConfig when a field is out of range.
void validate(const CandidateFilter& cfg);

// A candidate HTML element: box, reading-order label, OCR text, confidence.
struct ElementBox {
    Rect rect;
    int label = 0;         // 1..N within one image, assigned in reading order
    std::string text;      // cleaned OCR text; empty before OCR
    int confidence = 0;    // 0..100
};

// Keeps rects whose area lies in [min_area, max_area_fraction*imgW*imgH] and
// whose aspect ratio w/h lies in [aspect_min, aspect_max]. Order preserved.
std::vector<Rect> filter_candidates(const std::vector<Rect>& rects,
                                    const CandidateFilter& cfg, int img_w, int img_h);

// Greedy dedup in descending-area order: a rect is dropped when its IoU with
// an already-kept rect reaches iou_dedup, or when containment_drop of its own
// area lies inside a kept rect. Survivors come back in input order.
std::vector<Rect> suppress_overlaps(const std::vector<Rect>& rects,
                                    const CandidateFilter& cfg);

// Sorts by (y, x) of the rect origin and labels 1..N in that order.
std::vector<ElementBox> assign_labels(const std::vector<Rect>& rects);

}  // namespace visprompt
