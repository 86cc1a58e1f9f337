#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

namespace visprompt {

// Axis-aligned pixel rectangle, origin top-left, w/h > 0 when valid.
struct Rect {
    int x = 0;
    int y = 0;
    int w = 0;
    int h = 0;

    int x1() const { return x + w; }
    int y1() const { return y + h; }
    long long area() const { return static_cast<long long>(w) * h; }

    bool operator==(const Rect&) const = default;
};

long long intersection_area(const Rect& a, const Rect& b);
double iou(const Rect& a, const Rect& b);
// Fraction of `inner`'s area that lies inside `outer`.
double containment(const Rect& inner, const Rect& outer);
// Clips r to [0,w)x[0,h); the result may be empty (w or h == 0).
Rect clip_rect(const Rect& r, int img_w, int img_h);

// 8-bit interleaved pixel buffer, row-major, channels in {1,3,4}.
struct RasterImage {
    int width = 0;
    int height = 0;
    int channels = 0;
    std::vector<std::uint8_t> data;

    static RasterImage create(int w, int h, int c, std::uint8_t fill = 0);

    std::size_t index(int x, int y) const {
        return (static_cast<std::size_t>(y) * width + x) * channels;
    }
    std::size_t index(int x, int y, int c) const { return index(x, y) + c; }
    std::uint8_t* pixel(int x, int y) { return data.data() + index(x, y); }
    const std::uint8_t* pixel(int x, int y) const { return data.data() + index(x, y); }

    bool same_shape(const RasterImage& o) const {
        return width == o.width && height == o.height && channels == o.channels;
    }
};

// Throws InvalidInput unless dims/channels/data length are consistent.
void validate(const RasterImage& img);

// One sample per pixel, values restricted to {0,1}; 1 is foreground ink.
struct BinaryImage {
    int width = 0;
    int height = 0;
    std::vector<std::uint8_t> data;

    static BinaryImage create(int w, int h, std::uint8_t fill = 0);

    std::uint8_t at(int x, int y) const {
        return data[static_cast<std::size_t>(y) * width + x];
    }
    void set(int x, int y, std::uint8_t v) {
        data[static_cast<std::size_t>(y) * width + x] = v;
    }
};

// Square all-ones structuring element; size must be odd.
struct Kernel {
    int size = 3;
};

// Exact pixel copy of the region; rect must lie fully inside the image.
RasterImage crop(const RasterImage& img, const Rect& rect);

// Bilinear resample with half-pixel centers:
//   sx = (dx + 0.5) * srcW / dstW - 0.5, clamped to [0, srcW - 1]
// and the interpolated value rounded half-up to 8 bits.
RasterImage resize_bilinear(const RasterImage& img, int out_w, int out_h);

// Downscales so both sides fit max_side, preserving aspect ratio.
// Images already within bounds are returned unchanged.
RasterImage clamp_to_max_side(const RasterImage& img, int max_side);

}  // namespace visprompt
