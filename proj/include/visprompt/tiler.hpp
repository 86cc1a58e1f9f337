#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "visprompt/raster.hpp"

namespace visprompt {

// Fixed tile order: top-left, top-right, bottom-left, bottom-right.
struct TileSet {
    RasterImage global;
    std::array<RasterImage, 4> quadrants;
};

// Row-major spatial grid with d values per cell; token_count() = h * w and
// stays constant through the pool-and-aggregate path.
struct FeatureGrid {
    int h = 0;
    int w = 0;
    int d = 0;
    std::vector<double> values;

    static FeatureGrid create(int h, int w, int d, double fill = 0.0);
    size_t index(int r, int c, int k) const {
        return (static_cast<size_t>(r) * w + c) * d + k;
    }
    double& at(int r, int c, int k) { return values[index(r, c, k)]; }
    double at(int r, int c, int k) const { return values[index(r, c, k)]; }
    long long token_count() const { return static_cast<long long>(h) * w; }
};

void validate(const FeatureGrid& g);

// Quadrant boundaries at floor(w/2), floor(h/2); odd dimensions give the
// extra column/row to the right/bottom tiles. Rects partition the image.
std::array<Rect, 4> quadrant_rects(int width, int height);

// Splits into the four quadrant crops plus the full image, each bilinearly
// resized to encoder_size x encoder_size. Inputs larger than max_side on
// either dimension are scaled down first; dimensions under 2 are an error.
TileSet split_quadrants(const RasterImage& img, int encoder_size = 1024,
                        int max_side = 4096);

// Reassembles four h x w x d grids into one 2h x 2w x d grid at their
// quadrant positions.
FeatureGrid merge_quadrant_grids(const FeatureGrid& tl, const FeatureGrid& tr,
                                 const FeatureGrid& bl, const FeatureGrid& br);

// 2x2 mean per feature dim; spatial dims must be even.
FeatureGrid avgpool2(const FeatureGrid& grid);

enum class AggregateMode { sum, mean };

// Element-wise combination of two equal-shape grids.
FeatureGrid aggregate(const FeatureGrid& global, const FeatureGrid& pooled,
                      AggregateMode mode = AggregateMode::sum);

// Stand-in for a real vision encoder: a deterministic h x w x d grid hashed
// from the seed and per-cell patch pixel sums. Values lie in [0, 1).
FeatureGrid stub_encoder(const RasterImage& img, int h, int w, int d,
                         uint64_t seed);

// Full fusion path: encode the global tile and the four quadrants, merge the
// quadrant grids, avgpool2 back to h x w, and aggregate with the global grid.
FeatureGrid fuse_features(const TileSet& tiles, int h, int w, int d,
                          uint64_t seed, AggregateMode mode = AggregateMode::sum);

}  // namespace visprompt
