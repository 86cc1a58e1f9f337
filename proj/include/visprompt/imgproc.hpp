#pragma once

#include <vector>

#include "visprompt/raster.hpp"

namespace visprompt {

// BT.601 luma (0.299 R + 0.587 G + 0.114 B), rounded half-up.
// Alpha is ignored; single-channel input is returned unchanged.
RasterImage to_grayscale(const RasterImage& img);

struct OtsuResult {
    int threshold = 0;
    // Set when every candidate threshold has zero between-class variance
    // (constant image); threshold is then 0.
    bool degenerate = false;
};

// Global threshold maximizing between-class variance over t in [0,255],
// where the classes are {v < t} and {v >= t}. Ties pick the smallest t.
OtsuResult otsu_threshold(const RasterImage& gray);

// Foreground (1) where gray < threshold: dark ink on a light page.
// With invert set, foreground where gray >= threshold.
BinaryImage binarize(const RasterImage& gray, int threshold, bool invert = false);

// Min/max filters over a k x k window; out-of-bounds samples count as background.
BinaryImage erode(const BinaryImage& bin, const Kernel& k);
BinaryImage dilate(const BinaryImage& bin, const Kernel& k);
BinaryImage open(const BinaryImage& bin, const Kernel& k);   // dilate(erode(b))
BinaryImage close(const BinaryImage& bin, const Kernel& k);  // erode(dilate(b))

struct PixelPos {
    int x = 0;
    int y = 0;
    bool operator==(const PixelPos&) const = default;
};

// Outer boundary of one 8-connected foreground component plus its tight
// bounding rect.
struct Contour {
    std::vector<PixelPos> points;
    Rect bounds;
};

// Border following over 8-connected foreground components. Emits exactly one
// outer contour per component, sorted by (y, x, w, h) of the bounding rect.
std::vector<Contour> find_contours(const BinaryImage& bin);

}  // namespace visprompt
