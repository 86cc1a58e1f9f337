#include <algorithm>
#include <cmath>
#include <cstdint>

#include "doctest.h"
#include "visprompt/errors.hpp"
#include "visprompt/tiler.hpp"

using namespace visprompt;

namespace {

RasterImage noise_image(int w, int h, int c, uint32_t seed) {
    RasterImage img = RasterImage::create(w, h, c);
    uint32_t state = seed;
    for (auto& v : img.data) {
        state = state * 1664525u + 1013904223u;
        v = static_cast<uint8_t>(state >> 24);
    }
    return img;
}

FeatureGrid noise_grid(int h, int w, int d, uint32_t seed) {
    FeatureGrid g = FeatureGrid::create(h, w, d);
    uint32_t state = seed;
    for (auto& v : g.values) {
        state = state * 1664525u + 1013904223u;
        v = static_cast<double>(state >> 8) / static_cast<double>(1u << 24);
    }
    return g;
}

}  // namespace

TEST_CASE("quadrant rects partition even and odd sizes") {
    SUBCASE("even") {
        const auto r = quadrant_rects(4, 4);
        CHECK(r[0] == Rect{0, 0, 2, 2});
        CHECK(r[1] == Rect{2, 0, 2, 2});
        CHECK(r[2] == Rect{0, 2, 2, 2});
        CHECK(r[3] == Rect{2, 2, 2, 2});
    }
    SUBCASE("odd goes to the right and bottom") {
        const auto r = quadrant_rects(5, 5);
        CHECK(r[0] == Rect{0, 0, 2, 2});
        CHECK(r[1] == Rect{2, 0, 3, 2});
        CHECK(r[2] == Rect{0, 2, 2, 3});
        CHECK(r[3] == Rect{2, 2, 3, 3});
    }
    SUBCASE("coverage is exact") {
        for (int w : {2, 3, 7, 10})
            for (int h : {2, 5, 9}) {
                const auto r = quadrant_rects(w, h);
                long long area = 0;
                for (const Rect& q : r) area += q.area();
                CHECK(area == static_cast<long long>(w) * h);
                CHECK(r[0].w + r[1].w == w);
                CHECK(r[0].h + r[2].h == h);
            }
    }
    CHECK_THROWS_AS(quadrant_rects(1, 8), InvalidInput);
}

TEST_CASE("split at native size reassembles the source exactly") {
    const RasterImage img = noise_image(8, 8, 3, 77);
    // encoder_size 4 == quadrant size, so every resize is the identity.
    const TileSet tiles = split_quadrants(img, 4);
    const auto rects = quadrant_rects(8, 8);
    for (int i = 0; i < 4; ++i) {
        const RasterImage expect = crop(img, rects[i]);
        CHECK(tiles.quadrants[i].data == expect.data);
    }
    CHECK(tiles.global.width == 4);
    CHECK(tiles.global.height == 4);
}

TEST_CASE("split resizes every tile to the encoder size") {
    const RasterImage img = noise_image(10, 6, 1, 5);
    const TileSet tiles = split_quadrants(img, 16);
    CHECK(tiles.global.width == 16);
    CHECK(tiles.global.height == 16);
    for (const auto& q : tiles.quadrants) {
        CHECK(q.width == 16);
        CHECK(q.height == 16);
        CHECK(q.channels == 1);
    }
    CHECK_THROWS_AS(split_quadrants(noise_image(1, 8, 1, 0), 16), InvalidInput);
}

TEST_CASE("oversized inputs are capped before tiling") {
    const RasterImage img = noise_image(64, 16, 1, 9);
    // max_side 32 halves the source to 32x8 before the quadrant cut; each
    // quadrant is then 16x4 and resizing to 4 keeps dimensions consistent.
    const TileSet tiles = split_quadrants(img, 4, 32);
    CHECK(tiles.global.width == 4);
    for (const auto& q : tiles.quadrants) CHECK(q.width == 4);
}

TEST_CASE("merge places quadrants in reading order") {
    FeatureGrid tl = FeatureGrid::create(1, 1, 1, 1.0);
    FeatureGrid tr = FeatureGrid::create(1, 1, 1, 2.0);
    FeatureGrid bl = FeatureGrid::create(1, 1, 1, 3.0);
    FeatureGrid br = FeatureGrid::create(1, 1, 1, 4.0);
    const FeatureGrid m = merge_quadrant_grids(tl, tr, bl, br);
    CHECK(m.h == 2);
    CHECK(m.w == 2);
    CHECK(m.at(0, 0, 0) == 1.0);
    CHECK(m.at(0, 1, 0) == 2.0);
    CHECK(m.at(1, 0, 0) == 3.0);
    CHECK(m.at(1, 1, 0) == 4.0);

    FeatureGrid odd = FeatureGrid::create(2, 1, 1);
    CHECK_THROWS_AS(merge_quadrant_grids(tl, tr, bl, odd), InvalidInput);
}

TEST_CASE("merge keeps per-cell values addressable by offset") {
    const FeatureGrid tl = noise_grid(3, 4, 2, 1);
    const FeatureGrid tr = noise_grid(3, 4, 2, 2);
    const FeatureGrid bl = noise_grid(3, 4, 2, 3);
    const FeatureGrid br = noise_grid(3, 4, 2, 4);
    const FeatureGrid m = merge_quadrant_grids(tl, tr, bl, br);
    CHECK(m.token_count() == 4 * tl.token_count());
    for (int r = 0; r < 3; ++r)
        for (int c = 0; c < 4; ++c)
            for (int k = 0; k < 2; ++k) {
                CHECK(m.at(r, c, k) == tl.at(r, c, k));
                CHECK(m.at(r, c + 4, k) == tr.at(r, c, k));
                CHECK(m.at(r + 3, c, k) == bl.at(r, c, k));
                CHECK(m.at(r + 3, c + 4, k) == br.at(r, c, k));
            }
}

TEST_CASE("avgpool2 golden quad") {
    FeatureGrid g = FeatureGrid::create(2, 2, 1);
    g.at(0, 0, 0) = 1.0;
    g.at(0, 1, 0) = 2.0;
    g.at(1, 0, 0) = 3.0;
    g.at(1, 1, 0) = 4.0;
    const FeatureGrid p = avgpool2(g);
    CHECK(p.h == 1);
    CHECK(p.w == 1);
    CHECK(p.at(0, 0, 0) == 2.5);

    CHECK_THROWS_AS(avgpool2(FeatureGrid::create(3, 2, 1)), InvalidInput);
    CHECK_THROWS_AS(avgpool2(FeatureGrid::create(2, 5, 1)), InvalidInput);
}

TEST_CASE("avgpool2 is exact on constants") {
    const FeatureGrid g = FeatureGrid::create(8, 6, 3, 0.3125);
    const FeatureGrid p = avgpool2(g);
    CHECK(p.h == 4);
    CHECK(p.w == 3);
    for (double v : p.values) CHECK(v == 0.3125);
}

TEST_CASE("avgpool2 preserves the grid mean") {
    for (uint32_t seed = 0; seed < 8; ++seed) {
        const FeatureGrid g = noise_grid(16, 12, 4, 1000 + seed);
        const FeatureGrid p = avgpool2(g);
        CHECK(p.token_count() * 4 == g.token_count());
        for (int k = 0; k < g.d; ++k) {
            long double before = 0.0L, after = 0.0L;
            for (int r = 0; r < g.h; ++r)
                for (int c = 0; c < g.w; ++c) before += g.at(r, c, k);
            for (int r = 0; r < p.h; ++r)
                for (int c = 0; c < p.w; ++c) after += p.at(r, c, k);
            const long double mean_before = before / g.token_count();
            const long double mean_after = after / p.token_count();
            const long double rel =
                fabsl(mean_after - mean_before) /
                std::max<long double>(fabsl(mean_before), 1e-30L);
            CHECK(static_cast<double>(rel) <= 1e-12);
        }
    }
}

TEST_CASE("aggregate sums or averages elementwise") {
    FeatureGrid a = FeatureGrid::create(2, 2, 1, 1.5);
    FeatureGrid b = FeatureGrid::create(2, 2, 1, 0.5);
    const FeatureGrid s = aggregate(a, b, AggregateMode::sum);
    for (double v : s.values) CHECK(v == 2.0);
    const FeatureGrid m = aggregate(a, b, AggregateMode::mean);
    for (double v : m.values) CHECK(v == 1.0);

    CHECK(s.token_count() == a.token_count());
    CHECK_THROWS_AS(aggregate(a, FeatureGrid::create(2, 3, 1)), InvalidInput);
}

TEST_CASE("aggregate is commutative") {
    const FeatureGrid a = noise_grid(4, 4, 2, 21);
    const FeatureGrid b = noise_grid(4, 4, 2, 22);
    CHECK(aggregate(a, b).values == aggregate(b, a).values);
    CHECK(aggregate(a, b, AggregateMode::mean).values ==
          aggregate(b, a, AggregateMode::mean).values);
}

TEST_CASE("stub encoder is deterministic and input sensitive") {
    const RasterImage img = noise_image(32, 32, 3, 3);
    const FeatureGrid a = stub_encoder(img, 4, 4, 8, 42);
    const FeatureGrid b = stub_encoder(img, 4, 4, 8, 42);
    CHECK(a.values == b.values);
    for (double v : a.values) {
        CHECK(v >= 0.0);
        CHECK(v < 1.0);
    }

    const FeatureGrid other_seed = stub_encoder(img, 4, 4, 8, 43);
    CHECK(a.values != other_seed.values);

    RasterImage tweaked = img;
    tweaked.data[0] = static_cast<uint8_t>(tweaked.data[0] + 1);
    const FeatureGrid other_img = stub_encoder(tweaked, 4, 4, 8, 42);
    CHECK(a.values != other_img.values);
}

TEST_CASE("fusion keeps the token count constant") {
    for (int side : {31, 32, 65}) {
        const RasterImage img = noise_image(side, side, 3, 100 + side);
        const TileSet tiles = split_quadrants(img, 16);
        const FeatureGrid fused = fuse_features(tiles, 8, 8, 4, 7);
        CHECK(fused.token_count() == 64);
        CHECK(fused.h == 8);
        CHECK(fused.w == 8);
        CHECK(fused.d == 4);
    }
}

TEST_CASE("fusion equals its stages composed by hand") {
    const RasterImage img = noise_image(24, 18, 3, 55);
    const TileSet tiles = split_quadrants(img, 12);
    const uint64_t seed = 99;
    const FeatureGrid expect = aggregate(
        stub_encoder(tiles.global, 6, 6, 2, seed),
        avgpool2(merge_quadrant_grids(stub_encoder(tiles.quadrants[0], 6, 6, 2, seed),
                                      stub_encoder(tiles.quadrants[1], 6, 6, 2, seed),
                                      stub_encoder(tiles.quadrants[2], 6, 6, 2, seed),
                                      stub_encoder(tiles.quadrants[3], 6, 6, 2, seed))));
    const FeatureGrid fused = fuse_features(tiles, 6, 6, 2, seed);
    CHECK(fused.values == expect.values);
}
