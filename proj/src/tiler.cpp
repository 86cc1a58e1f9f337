#include "visprompt/tiler.hpp"

#include <string>

#include "visprompt/errors.hpp"
#include "visprompt/qa.hpp"

namespace visprompt {

FeatureGrid FeatureGrid::create(int h, int w, int d, double fill) {
    if (h < 1 || w < 1 || d < 1)
        throw InvalidInput("feature grid dims must be positive");
    FeatureGrid g;
    g.h = h;
    g.w = w;
    g.d = d;
    g.values.assign(static_cast<size_t>(h) * w * d, fill);
    return g;
}

void validate(const FeatureGrid& g) {
    if (g.h < 1 || g.w < 1 || g.d < 1)
        throw InvalidInput("feature grid dims must be positive");
    if (g.values.size() != static_cast<size_t>(g.h) * g.w * g.d)
        throw InvalidInput("feature grid has " + std::to_string(g.values.size()) +
                           " values, expected " +
                           std::to_string(static_cast<size_t>(g.h) * g.w * g.d));
}

std::array<Rect, 4> quadrant_rects(int width, int height) {
    if (width < 2 || height < 2)
        throw InvalidInput("quadrant split needs at least 2x2, got " +
                           std::to_string(width) + "x" + std::to_string(height));
    const int hw = width / 2;
    const int hh = height / 2;
    return {Rect{0, 0, hw, hh}, Rect{hw, 0, width - hw, hh},
            Rect{0, hh, hw, height - hh}, Rect{hw, hh, width - hw, height - hh}};
}

TileSet split_quadrants(const RasterImage& img, int encoder_size, int max_side) {
    validate(img);
    if (encoder_size < 1) throw InvalidConfig("tiler.encoder_size must be >= 1");
    if (img.width < 2 || img.height < 2)
        throw InvalidInput("quadrant split needs at least 2x2, got " +
                           std::to_string(img.width) + "x" +
                           std::to_string(img.height));
    const RasterImage capped = clamp_to_max_side(img, max_side);
    const auto rects = quadrant_rects(capped.width, capped.height);

    TileSet tiles;
    tiles.global = resize_bilinear(capped, encoder_size, encoder_size);
    for (size_t i = 0; i < rects.size(); ++i)
        tiles.quadrants[i] =
            resize_bilinear(crop(capped, rects[i]), encoder_size, encoder_size);
    return tiles;
}

FeatureGrid merge_quadrant_grids(const FeatureGrid& tl, const FeatureGrid& tr,
                                 const FeatureGrid& bl, const FeatureGrid& br) {
    for (const FeatureGrid* g : {&tl, &tr, &bl, &br}) validate(*g);
    for (const FeatureGrid* g : {&tr, &bl, &br})
        if (g->h != tl.h || g->w != tl.w || g->d != tl.d)
            throw InvalidInput("quadrant grids must share one shape");

    FeatureGrid out = FeatureGrid::create(tl.h * 2, tl.w * 2, tl.d);
    const auto place = [&](const FeatureGrid& g, int row_off, int col_off) {
        for (int r = 0; r < g.h; ++r)
            for (int c = 0; c < g.w; ++c)
                for (int k = 0; k < g.d; ++k)
                    out.at(row_off + r, col_off + c, k) = g.at(r, c, k);
    };
    place(tl, 0, 0);
    place(tr, 0, tl.w);
    place(bl, tl.h, 0);
    place(br, tl.h, tl.w);
    return out;
}

FeatureGrid avgpool2(const FeatureGrid& grid) {
    validate(grid);
    if (grid.h % 2 != 0 || grid.w % 2 != 0)
        throw InvalidInput("avgpool2 needs even spatial dims, got " +
                           std::to_string(grid.h) + "x" + std::to_string(grid.w));
    FeatureGrid out = FeatureGrid::create(grid.h / 2, grid.w / 2, grid.d);
    for (int r = 0; r < out.h; ++r)
        for (int c = 0; c < out.w; ++c)
            for (int k = 0; k < grid.d; ++k)
                out.at(r, c, k) = (grid.at(2 * r, 2 * c, k) +
                                   grid.at(2 * r, 2 * c + 1, k) +
                                   grid.at(2 * r + 1, 2 * c, k) +
                                   grid.at(2 * r + 1, 2 * c + 1, k)) *
                                  0.25;
    return out;
}

FeatureGrid aggregate(const FeatureGrid& global, const FeatureGrid& pooled,
                      AggregateMode mode) {
    validate(global);
    validate(pooled);
    if (global.h != pooled.h || global.w != pooled.w || global.d != pooled.d)
        throw InvalidInput("aggregate needs equal shapes");
    FeatureGrid out = global;
    for (size_t i = 0; i < out.values.size(); ++i) {
        out.values[i] += pooled.values[i];
        if (mode == AggregateMode::mean) out.values[i] *= 0.5;
    }
    return out;
}

FeatureGrid stub_encoder(const RasterImage& img, int h, int w, int d,
                         uint64_t seed) {
    validate(img);
    FeatureGrid out = FeatureGrid::create(h, w, d);
    for (int r = 0; r < h; ++r) {
        const int y0 = static_cast<int>(static_cast<long long>(r) * img.height / h);
        const int y1 = static_cast<int>(static_cast<long long>(r + 1) * img.height / h);
        for (int c = 0; c < w; ++c) {
            const int x0 = static_cast<int>(static_cast<long long>(c) * img.width / w);
            const int x1 = static_cast<int>(static_cast<long long>(c + 1) * img.width / w);
            uint64_t patch_sum = 0;
            for (int y = y0; y < y1; ++y)
                for (int x = x0; x < x1; ++x)
                    for (int k = 0; k < img.channels; ++k)
                        patch_sum += img.data[img.index(x, y, k)];
            for (int k = 0; k < d; ++k) {
                uint64_t state = seed;
                state ^= splitmix64(state) + static_cast<uint64_t>(r);
                state ^= splitmix64(state) + static_cast<uint64_t>(c);
                state ^= splitmix64(state) + static_cast<uint64_t>(k);
                state ^= splitmix64(state) + patch_sum;
                const uint64_t bits = splitmix64(state);
                // Top 53 bits give a double in [0, 1).
                out.at(r, c, k) = static_cast<double>(bits >> 11) * 0x1.0p-53;
            }
        }
    }
    return out;
}

FeatureGrid fuse_features(const TileSet& tiles, int h, int w, int d,
                          uint64_t seed, AggregateMode mode) {
    const FeatureGrid global = stub_encoder(tiles.global, h, w, d, seed);
    const FeatureGrid merged = merge_quadrant_grids(
        stub_encoder(tiles.quadrants[0], h, w, d, seed),
        stub_encoder(tiles.quadrants[1], h, w, d, seed),
        stub_encoder(tiles.quadrants[2], h, w, d, seed),
        stub_encoder(tiles.quadrants[3], h, w, d, seed));
    return aggregate(global, avgpool2(merged), mode);
}

}  // namespace visprompt
