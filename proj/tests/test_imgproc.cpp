#include <algorithm>
#include <cstdint>
#include <set>
#include <tuple>
#include <utility>
#include <vector>

#include "doctest.h"
#include "visprompt/errors.hpp"
#include "visprompt/imgproc.hpp"
#include "visprompt/qa.hpp"

using namespace visprompt;

namespace {

// Compares p1 = a/m against p2 = b/n exactly: sign of a*n - b*m, with the
// 192-bit products held as (hi, lo) 64-bit-limb pairs.
int rational_cmp(unsigned __int128 a, unsigned long long m, unsigned __int128 b,
                 unsigned long long n) {
    const auto mul = [](unsigned __int128 v, unsigned long long s) {
        const unsigned __int128 mask = ~static_cast<unsigned __int128>(0) >> 64;
        const unsigned __int128 low = (v & mask) * s;
        return std::pair<unsigned __int128, unsigned __int128>{
            (v >> 64) * s + (low >> 64), low & mask};
    };
    const auto [hi1, lo1] = mul(a, n);
    const auto [hi2, lo2] = mul(b, m);
    if (hi1 != hi2) return hi1 < hi2 ? -1 : 1;
    if (lo1 != lo2) return lo1 < lo2 ? -1 : 1;
    return 0;
}

// Independent Otsu oracle: try every threshold, recompute both class sums
// from scratch, keep the variance (s0*w1 - s1*w0)^2 / (w0*w1) as an exact
// integer rational, and compare candidates without any floating point.
// Ties resolve to the smallest threshold.
int otsu_oracle(const std::vector<long long>& hist, bool* degenerate) {
    int best_t = 0;
    unsigned __int128 best_num2 = 0;
    unsigned long long best_den = 1;
    bool any = false;
    for (int t = 0; t <= 255; ++t) {
        long long w0 = 0, s0 = 0, w1 = 0, s1 = 0;
        for (int v = 0; v <= 255; ++v) {
            if (v < t) {
                w0 += hist[v];
                s0 += hist[v] * v;
            } else {
                w1 += hist[v];
                s1 += hist[v] * v;
            }
        }
        if (w0 == 0 || w1 == 0) continue;
        const long long num = s0 * w1 - s1 * w0;
        const unsigned long long mag =
            num < 0 ? static_cast<unsigned long long>(-num)
                    : static_cast<unsigned long long>(num);
        const unsigned __int128 num2 = static_cast<unsigned __int128>(mag) * mag;
        const unsigned long long den =
            static_cast<unsigned long long>(w0) * static_cast<unsigned long long>(w1);
        if (!any || rational_cmp(num2, den, best_num2, best_den) > 0) {
            any = true;
            best_num2 = num2;
            best_den = den;
            best_t = t;
        }
    }
    if (degenerate) *degenerate = !any || best_num2 == 0;
    return best_t;
}

std::vector<long long> histogram_of(const RasterImage& gray) {
    std::vector<long long> hist(256, 0);
    for (uint8_t v : gray.data) ++hist[v];
    return hist;
}

// Flood-fill 8-connected labeling oracle: bounding rect per component.
std::set<std::tuple<int, int, int, int>> flood_fill_bboxes(const BinaryImage& b) {
    std::set<std::tuple<int, int, int, int>> out;
    std::vector<char> seen(b.data.size(), 0);
    std::vector<std::pair<int, int>> stack;
    for (int sy = 0; sy < b.height; ++sy)
        for (int sx = 0; sx < b.width; ++sx) {
            const size_t si = static_cast<size_t>(sy) * b.width + sx;
            if (!b.data[si] || seen[si]) continue;
            int min_x = sx, max_x = sx, min_y = sy, max_y = sy;
            stack.push_back({sx, sy});
            seen[si] = 1;
            while (!stack.empty()) {
                const auto [x, y] = stack.back();
                stack.pop_back();
                min_x = std::min(min_x, x);
                max_x = std::max(max_x, x);
                min_y = std::min(min_y, y);
                max_y = std::max(max_y, y);
                for (int dy = -1; dy <= 1; ++dy)
                    for (int dx = -1; dx <= 1; ++dx) {
                        const int nx = x + dx, ny = y + dy;
                        if (nx < 0 || ny < 0 || nx >= b.width || ny >= b.height)
                            continue;
                        const size_t ni = static_cast<size_t>(ny) * b.width + nx;
                        if (b.data[ni] && !seen[ni]) {
                            seen[ni] = 1;
                            stack.push_back({nx, ny});
                        }
                    }
            }
            out.insert({min_x, min_y, max_x - min_x + 1, max_y - min_y + 1});
        }
    return out;
}

BinaryImage random_binary(int w, int h, Rng& rng, int fg_percent) {
    BinaryImage b = BinaryImage::create(w, h);
    for (auto& v : b.data)
        v = rng.next_index(100) < static_cast<size_t>(fg_percent) ? 1 : 0;
    return b;
}

// Reference erosion: fg survives iff the full k x k neighborhood is fg
// (outside the image counts as background).
BinaryImage erode_oracle(const BinaryImage& b, int k) {
    const int r = k / 2;
    BinaryImage out = BinaryImage::create(b.width, b.height);
    for (int y = 0; y < b.height; ++y)
        for (int x = 0; x < b.width; ++x) {
            int keep = 1;
            for (int dy = -r; dy <= r && keep; ++dy)
                for (int dx = -r; dx <= r && keep; ++dx) {
                    const int nx = x + dx, ny = y + dy;
                    if (nx < 0 || ny < 0 || nx >= b.width || ny >= b.height ||
                        !b.at(nx, ny))
                        keep = 0;
                }
            out.set(x, y, keep);
        }
    return out;
}

BinaryImage dilate_oracle(const BinaryImage& b, int k) {
    const int r = k / 2;
    BinaryImage out = BinaryImage::create(b.width, b.height);
    for (int y = 0; y < b.height; ++y)
        for (int x = 0; x < b.width; ++x) {
            int hit = 0;
            for (int dy = -r; dy <= r && !hit; ++dy)
                for (int dx = -r; dx <= r && !hit; ++dx) {
                    const int nx = x + dx, ny = y + dy;
                    if (nx >= 0 && ny >= 0 && nx < b.width && ny < b.height &&
                        b.at(nx, ny))
                        hit = 1;
                }
            out.set(x, y, hit);
        }
    return out;
}

}  // namespace

TEST_CASE("grayscale weights and rounding") {
    RasterImage img = RasterImage::create(2, 1, 3);
    // (255, 0, 0) -> 0.299*255 = 76.245 -> 76; (1, 1, 2) -> 1.114 -> 1
    img.data = {255, 0, 0, 1, 1, 2};
    const RasterImage g = to_grayscale(img);
    REQUIRE(g.channels == 1);
    CHECK(g.data[0] == 76);
    CHECK(g.data[1] == 1);
}

TEST_CASE("grayscale of gray input is a copy") {
    RasterImage img = RasterImage::create(3, 2, 1);
    img.data = {0, 50, 100, 150, 200, 250};
    CHECK(to_grayscale(img).data == img.data);
}

TEST_CASE("grayscale averages rgba ignoring alpha") {
    RasterImage img = RasterImage::create(1, 1, 4);
    img.data = {100, 100, 100, 7};
    CHECK(to_grayscale(img).data[0] == 100);
}

TEST_CASE("otsu bimodal image splits the modes") {
    RasterImage img = RasterImage::create(10, 10, 1);
    for (int i = 0; i < 100; ++i) img.data[i] = i < 50 ? 40 : 200;
    const OtsuResult r = otsu_threshold(img);
    CHECK_FALSE(r.degenerate);
    CHECK(r.threshold > 40);
    CHECK(r.threshold <= 200);
    BinaryImage b = binarize(img, r.threshold);
    long long dark = 0;
    for (auto v : b.data) dark += v;
    CHECK(dark == 50);
}

TEST_CASE("otsu flat image is degenerate") {
    const RasterImage img = RasterImage::create(8, 8, 1, 77);
    const OtsuResult r = otsu_threshold(img);
    CHECK(r.degenerate);
}

TEST_CASE("otsu equals brute-force oracle on random images") {
    Rng rng(2024);
    for (int trial = 0; trial < 60; ++trial) {
        RasterImage img = RasterImage::create(24, 24, 1);
        // Mix of blotchy two-mode images and uniform noise.
        const int mode = trial % 3;
        for (auto& v : img.data) {
            if (mode == 0)
                v = static_cast<uint8_t>(rng.next_index(256));
            else if (mode == 1)
                v = rng.next_index(2) ? static_cast<uint8_t>(30 + rng.next_index(40))
                                      : static_cast<uint8_t>(180 + rng.next_index(40));
            else
                v = static_cast<uint8_t>(rng.next_index(8));  // narrow histogram
        }
        bool oracle_degenerate = false;
        const int expect = otsu_oracle(histogram_of(img), &oracle_degenerate);
        const OtsuResult got = otsu_threshold(img);
        CHECK(got.degenerate == oracle_degenerate);
        if (!oracle_degenerate) {
            INFO("trial ", trial);
            CHECK(got.threshold == expect);
        }
    }
}

TEST_CASE("binarize respects threshold and invert") {
    RasterImage img = RasterImage::create(4, 1, 1);
    img.data = {10, 99, 100, 200};
    const BinaryImage fg_dark = binarize(img, 100);
    CHECK(fg_dark.data == std::vector<uint8_t>{1, 1, 0, 0});
    const BinaryImage fg_light = binarize(img, 100, true);
    CHECK(fg_light.data == std::vector<uint8_t>{0, 0, 1, 1});
}

TEST_CASE("erode and dilate match the neighborhood oracle") {
    Rng rng(7);
    for (int trial = 0; trial < 12; ++trial) {
        const BinaryImage b = random_binary(21, 17, rng, 45);
        for (int k : {3, 5}) {
            const BinaryImage e = erode(b, Kernel{k});
            const BinaryImage d = dilate(b, Kernel{k});
            const BinaryImage eo = erode_oracle(b, k);
            const BinaryImage do_ = dilate_oracle(b, k);
            CHECK(e.data == eo.data);
            CHECK(d.data == do_.data);
        }
    }
}

TEST_CASE("morphology rejects even or non-positive kernels") {
    const BinaryImage b = BinaryImage::create(4, 4);
    CHECK_THROWS_AS(erode(b, Kernel{2}), InvalidConfig);
    CHECK_THROWS_AS(dilate(b, Kernel{0}), InvalidConfig);
}

TEST_CASE("open removes isolated pixels, close fills small holes") {
    BinaryImage b = BinaryImage::create(12, 12);
    // 7x7 solid block with a single hole, plus a lone speck. The block is
    // big enough that pixels far from the hole keep a full 3x3 support.
    for (int y = 1; y <= 7; ++y)
        for (int x = 1; x <= 7; ++x) b.set(x, y, 1);
    b.set(4, 4, 0);
    b.set(10, 10, 1);

    const BinaryImage opened = open(b, Kernel{3});
    CHECK(opened.at(10, 10) == 0);    // speck gone
    CHECK(opened.at(2, 2) == 1);      // block body survives

    const BinaryImage closed = close(b, Kernel{3});
    CHECK(closed.at(4, 4) == 1);      // hole filled
    CHECK(closed.at(0, 0) == 0);      // background stays
}

TEST_CASE("erode is a subset, dilate a superset") {
    Rng rng(99);
    for (int trial = 0; trial < 8; ++trial) {
        const BinaryImage b = random_binary(16, 16, rng, 40);
        const BinaryImage e = erode(b, Kernel{3});
        const BinaryImage d = dilate(b, Kernel{3});
        for (size_t i = 0; i < b.data.size(); ++i) {
            CHECK(e.data[i] <= b.data[i]);
            CHECK(b.data[i] <= d.data[i]);
        }
    }
}

TEST_CASE("open and close are idempotent") {
    Rng rng(123);
    for (int trial = 0; trial < 8; ++trial) {
        const BinaryImage b = random_binary(20, 15, rng, 50);
        const BinaryImage o1 = open(b, Kernel{3});
        const BinaryImage o2 = open(o1, Kernel{3});
        CHECK(o1.data == o2.data);
        const BinaryImage c1 = close(b, Kernel{3});
        const BinaryImage c2 = close(c1, Kernel{3});
        CHECK(c1.data == c2.data);
    }
}

TEST_CASE("contours of two separated blocks") {
    BinaryImage b = BinaryImage::create(20, 10);
    for (int y = 1; y <= 3; ++y)
        for (int x = 1; x <= 4; ++x) b.set(x, y, 1);
    for (int y = 5; y <= 8; ++y)
        for (int x = 10; x <= 17; ++x) b.set(x, y, 1);
    const auto contours = find_contours(b);
    REQUIRE(contours.size() == 2);
    CHECK(contours[0].bounds == Rect{1, 1, 4, 3});
    CHECK(contours[1].bounds == Rect{10, 5, 8, 4});
}

TEST_CASE("contour of a ring is its outer bounds") {
    BinaryImage b = BinaryImage::create(12, 12);
    for (int y = 2; y <= 9; ++y)
        for (int x = 2; x <= 9; ++x)
            if (x == 2 || x == 9 || y == 2 || y == 9) b.set(x, y, 1);
    const auto contours = find_contours(b);
    REQUIRE(contours.size() == 1);
    CHECK(contours[0].bounds == Rect{2, 2, 8, 8});
}

TEST_CASE("single pixel component") {
    BinaryImage b = BinaryImage::create(5, 5);
    b.set(2, 3, 1);
    const auto contours = find_contours(b);
    REQUIRE(contours.size() == 1);
    CHECK(contours[0].bounds == Rect{2, 3, 1, 1});
    CHECK(contours[0].points.size() == 1);
}

TEST_CASE("diagonal pixels are one 8-connected component") {
    BinaryImage b = BinaryImage::create(6, 6);
    b.set(1, 1, 1);
    b.set(2, 2, 1);
    b.set(3, 3, 1);
    const auto contours = find_contours(b);
    REQUIRE(contours.size() == 1);
    CHECK(contours[0].bounds == Rect{1, 1, 3, 3});
}

TEST_CASE("contour bboxes equal flood-fill oracle on random images") {
    Rng rng(31337);
    for (int trial = 0; trial < 120; ++trial) {
        const int fg = 10 + static_cast<int>(rng.next_index(70));
        const BinaryImage b = random_binary(32, 32, rng, fg);
        const auto oracle = flood_fill_bboxes(b);
        std::set<std::tuple<int, int, int, int>> got;
        for (const Contour& c : find_contours(b))
            got.insert({c.bounds.x, c.bounds.y, c.bounds.w, c.bounds.h});
        INFO("trial ", trial, " fg% ", fg);
        CHECK(got == oracle);
    }
}

TEST_CASE("empty binary image has no contours") {
    const BinaryImage b = BinaryImage::create(10, 10);
    CHECK(find_contours(b).empty());
}
