#include "visprompt/raster.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <string>

#include "visprompt/errors.hpp"

namespace visprompt {

long long intersection_area(const Rect& a, const Rect& b) {
    const int ix0 = std::max(a.x, b.x);
    const int iy0 = std::max(a.y, b.y);
    const int ix1 = std::min(a.x1(), b.x1());
    const int iy1 = std::min(a.y1(), b.y1());
    if (ix1 <= ix0 || iy1 <= iy0) return 0;
    return static_cast<long long>(ix1 - ix0) * (iy1 - iy0);
}

double iou(const Rect& a, const Rect& b) {
    const long long inter = intersection_area(a, b);
    const long long uni = a.area() + b.area() - inter;
    return uni > 0 ? static_cast<double>(inter) / static_cast<double>(uni) : 0.0;
}

double containment(const Rect& inner, const Rect& outer) {
    if (inner.area() <= 0) return 0.0;
    return static_cast<double>(intersection_area(inner, outer)) /
           static_cast<double>(inner.area());
}

Rect clip_rect(const Rect& r, int img_w, int img_h) {
    const int x0 = std::clamp(r.x, 0, img_w);
    const int y0 = std::clamp(r.y, 0, img_h);
    const int x1 = std::clamp(r.x1(), 0, img_w);
    const int y1 = std::clamp(r.y1(), 0, img_h);
    return Rect{x0, y0, std::max(0, x1 - x0), std::max(0, y1 - y0)};
}

RasterImage RasterImage::create(int w, int h, int c, std::uint8_t fill) {
    if (w <= 0 || h <= 0) throw InvalidInput("image dimensions must be positive");
    if (c != 1 && c != 3 && c != 4)
        throw InvalidInput("unsupported channel count: " + std::to_string(c));
    RasterImage img;
    img.width = w;
    img.height = h;
    img.channels = c;
    img.data.assign(static_cast<std::size_t>(w) * h * c, fill);
    return img;
}

void validate(const RasterImage& img) {
    if (img.width <= 0 || img.height <= 0)
        throw InvalidInput("image dimensions must be positive");
    if (img.channels != 1 && img.channels != 3 && img.channels != 4)
        throw InvalidInput("unsupported channel count: " + std::to_string(img.channels));
    const std::size_t expect =
        static_cast<std::size_t>(img.width) * img.height * img.channels;
    if (img.data.size() != expect)
        throw InvalidInput("pixel buffer length does not match width*height*channels");
}

BinaryImage BinaryImage::create(int w, int h, std::uint8_t fill) {
    if (w <= 0 || h <= 0) throw InvalidInput("image dimensions must be positive");
    BinaryImage b;
    b.width = w;
    b.height = h;
    b.data.assign(static_cast<std::size_t>(w) * h, fill ? 1 : 0);
    return b;
}

RasterImage crop(const RasterImage& img, const Rect& rect) {
    validate(img);
    if (rect.w <= 0 || rect.h <= 0 || rect.x < 0 || rect.y < 0 ||
        rect.x1() > img.width || rect.y1() > img.height)
        throw InvalidInput("crop rect out of image bounds");
    RasterImage out = RasterImage::create(rect.w, rect.h, img.channels);
    const std::size_t row_bytes = static_cast<std::size_t>(rect.w) * img.channels;
    for (int y = 0; y < rect.h; ++y) {
        std::memcpy(out.pixel(0, y), img.pixel(rect.x, rect.y + y), row_bytes);
    }
    return out;
}

RasterImage resize_bilinear(const RasterImage& img, int out_w, int out_h) {
    validate(img);
    if (out_w <= 0 || out_h <= 0)
        throw InvalidInput("resize target dimensions must be positive");
    if (out_w == img.width && out_h == img.height) return img;

    RasterImage out = RasterImage::create(out_w, out_h, img.channels);
    const double sx_scale = static_cast<double>(img.width) / out_w;
    const double sy_scale = static_cast<double>(img.height) / out_h;
    const int c = img.channels;

    for (int dy = 0; dy < out_h; ++dy) {
        double sy = (dy + 0.5) * sy_scale - 0.5;
        sy = std::clamp(sy, 0.0, static_cast<double>(img.height - 1));
        const int y0 = static_cast<int>(sy);
        const int y1 = std::min(y0 + 1, img.height - 1);
        const double fy = sy - y0;
        for (int dx = 0; dx < out_w; ++dx) {
            double sx = (dx + 0.5) * sx_scale - 0.5;
            sx = std::clamp(sx, 0.0, static_cast<double>(img.width - 1));
            const int x0 = static_cast<int>(sx);
            const int x1 = std::min(x0 + 1, img.width - 1);
            const double fx = sx - x0;
            const std::uint8_t* p00 = img.pixel(x0, y0);
            const std::uint8_t* p10 = img.pixel(x1, y0);
            const std::uint8_t* p01 = img.pixel(x0, y1);
            const std::uint8_t* p11 = img.pixel(x1, y1);
            std::uint8_t* dst = out.pixel(dx, dy);
            for (int k = 0; k < c; ++k) {
                const double top = p00[k] + (p10[k] - p00[k]) * fx;
                const double bot = p01[k] + (p11[k] - p01[k]) * fx;
                const double v = top + (bot - top) * fy;
                dst[k] = static_cast<std::uint8_t>(std::floor(v + 0.5));
            }
        }
    }
    return out;
}

RasterImage clamp_to_max_side(const RasterImage& img, int max_side) {
    validate(img);
    if (max_side <= 0) throw InvalidConfig("max_side must be positive");
    if (img.width <= max_side && img.height <= max_side) return img;
    const double scale = static_cast<double>(max_side) / std::max(img.width, img.height);
    const int w = std::max(1, static_cast<int>(std::floor(img.width * scale + 0.5)));
    const int h = std::max(1, static_cast<int>(std::floor(img.height * scale + 0.5)));
    return resize_bilinear(img, std::min(w, max_side), std::min(h, max_side));
}

}  // namespace visprompt
