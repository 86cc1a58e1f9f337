#include "visprompt/imgproc.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>

#include "visprompt/errors.hpp"

namespace visprompt {

RasterImage to_grayscale(const RasterImage& img) {
    validate(img);
    if (img.channels == 1) return img;

    RasterImage out = RasterImage::create(img.width, img.height, 1);
    const std::size_t n = static_cast<std::size_t>(img.width) * img.height;
    const int c = img.channels;
    const std::uint8_t* src = img.data.data();
    std::uint8_t* dst = out.data.data();
    for (std::size_t i = 0; i < n; ++i, src += c) {
        const double luma = 0.299 * src[0] + 0.587 * src[1] + 0.114 * src[2];
        dst[i] = static_cast<std::uint8_t>(std::floor(luma + 0.5));
    }
    return out;
}

namespace {

// Exact comparison of a*m against b*n; a and b may use up to 128 bits,
// m and n up to 64. Splitting each product into 64-bit limbs keeps the full
// 192-bit result comparable without any rounding.
int cmp_scaled(unsigned __int128 a, unsigned long long m, unsigned __int128 b,
               unsigned long long n) {
    const unsigned __int128 mask = ~static_cast<unsigned __int128>(0) >> 64;
    const unsigned __int128 hi_a = (a >> 64) * m + (((a & mask) * m) >> 64);
    const unsigned __int128 lo_a = ((a & mask) * m) & mask;
    const unsigned __int128 hi_b = (b >> 64) * n + (((b & mask) * n) >> 64);
    const unsigned __int128 lo_b = ((b & mask) * n) & mask;
    if (hi_a != hi_b) return hi_a < hi_b ? -1 : 1;
    if (lo_a != lo_b) return lo_a < lo_b ? -1 : 1;
    return 0;
}

}  // namespace

OtsuResult otsu_threshold(const RasterImage& gray) {
    validate(gray);
    if (gray.channels != 1) throw InvalidInput("otsu_threshold expects a 1-channel image");

    std::array<long long, 256> hist{};
    for (std::uint8_t v : gray.data) hist[v]++;
    const long long total = static_cast<long long>(gray.data.size());

    // Between-class variance in the rational form (s0*w1 - s1*w0)^2 / (w0*w1),
    // compared exactly by integer cross-multiplication, so the argmax (and the
    // tie rule: smallest t) never depends on float rounding. Class 0 holds the
    // values below t. Fits: |s0*w1| stays under 2^57 even at 4096x4096.
    unsigned __int128 best_num2 = 0;
    unsigned long long best_den = 1;
    int best_t = 0;
    long long w0 = 0, s0 = 0;
    long long sum_all = 0;
    for (int v = 0; v < 256; ++v) sum_all += hist[v] * v;

    for (int t = 0; t < 256; ++t) {
        if (t > 0) {
            w0 += hist[t - 1];
            s0 += hist[t - 1] * (t - 1);
        }
        const long long w1 = total - w0;
        if (w0 == 0 || w1 == 0) continue;
        const long long s1 = sum_all - s0;
        const long long num = s0 * w1 - s1 * w0;
        const unsigned long long mag =
            num < 0 ? static_cast<unsigned long long>(-num)
                    : static_cast<unsigned long long>(num);
        const unsigned __int128 num2 = static_cast<unsigned __int128>(mag) * mag;
        const unsigned long long den = static_cast<unsigned long long>(w0) *
                                       static_cast<unsigned long long>(w1);
        if (cmp_scaled(num2, best_den, best_num2, den) > 0) {
            best_num2 = num2;
            best_den = den;
            best_t = t;
        }
    }

    OtsuResult r;
    r.threshold = best_t;
    r.degenerate = best_num2 == 0;
    return r;
}

BinaryImage binarize(const RasterImage& gray, int threshold, bool invert) {
    validate(gray);
    if (gray.channels != 1) throw InvalidInput("binarize expects a 1-channel image");
    BinaryImage out = BinaryImage::create(gray.width, gray.height);
    const std::size_t n = gray.data.size();
    for (std::size_t i = 0; i < n; ++i) {
        const bool fg = invert ? gray.data[i] >= threshold : gray.data[i] < threshold;
        out.data[i] = fg ? 1 : 0;
    }
    return out;
}

namespace {

void check_kernel(const Kernel& k) {
    if (k.size < 1 || k.size % 2 == 0)
        throw InvalidConfig("kernel size must be odd and >= 1");
}

// Separable pass along one axis; background padding outside the image.
BinaryImage axis_filter(const BinaryImage& in, int radius, bool horizontal, bool take_min) {
    BinaryImage out = BinaryImage::create(in.width, in.height);
    for (int y = 0; y < in.height; ++y) {
        for (int x = 0; x < in.width; ++x) {
            std::uint8_t acc = take_min ? 1 : 0;
            for (int d = -radius; d <= radius; ++d) {
                const int nx = horizontal ? x + d : x;
                const int ny = horizontal ? y : y + d;
                std::uint8_t v = 0;
                if (nx >= 0 && nx < in.width && ny >= 0 && ny < in.height)
                    v = in.at(nx, ny);
                if (take_min)
                    acc = std::min(acc, v);
                else
                    acc = std::max(acc, v);
                if (acc == (take_min ? 0 : 1)) break;
            }
            out.set(x, y, acc);
        }
    }
    return out;
}

}  // namespace

BinaryImage erode(const BinaryImage& bin, const Kernel& k) {
    check_kernel(k);
    const int r = k.size / 2;
    if (r == 0) return bin;
    return axis_filter(axis_filter(bin, r, true, true), r, false, true);
}

BinaryImage dilate(const BinaryImage& bin, const Kernel& k) {
    check_kernel(k);
    const int r = k.size / 2;
    if (r == 0) return bin;
    return axis_filter(axis_filter(bin, r, true, false), r, false, false);
}

BinaryImage open(const BinaryImage& bin, const Kernel& k) { return dilate(erode(bin, k), k); }

BinaryImage close(const BinaryImage& bin, const Kernel& k) { return erode(dilate(bin, k), k); }

namespace {

// Neighbor order is counterclockwise starting East; clockwise walks the
// table backwards.
constexpr int kDx[8] = {1, 1, 0, -1, -1, -1, 0, 1};
constexpr int kDy[8] = {0, -1, -1, -1, 0, 1, 1, 1};

struct BorderTracer {
    const BinaryImage& bin;
    std::vector<int> f;  // working label image; 0 background, 1 unvisited ink

    explicit BorderTracer(const BinaryImage& b) : bin(b), f(b.data.size()) {
        for (std::size_t i = 0; i < b.data.size(); ++i) f[i] = b.data[i] ? 1 : 0;
    }

    int& at(int x, int y) { return f[static_cast<std::size_t>(y) * bin.width + x]; }

    int value(int x, int y) const {
        if (x < 0 || y < 0 || x >= bin.width || y >= bin.height) return 0;
        return f[static_cast<std::size_t>(y) * bin.width + x];
    }

    // Follows one border starting at (x, y) whose known-background start
    // neighbor sits in direction `from_dir`. Returns the traced points.
    std::vector<PixelPos> trace(int x, int y, int from_dir, int nbd) {
        std::vector<PixelPos> pts;

        // Clockwise search for the first ink neighbor.
        int dir = -1;
        for (int i = 1; i <= 8; ++i) {
            const int d = (from_dir - i + 16) % 8;
            if (value(x + kDx[d], y + kDy[d]) != 0) {
                dir = d;
                break;
            }
        }
        if (dir < 0) {  // isolated pixel
            at(x, y) = -nbd;
            pts.push_back({x, y});
            return pts;
        }

        const int sx = x + kDx[dir], sy = y + kDy[dir];  // first border neighbor
        int px = sx, py = sy;                            // previously examined ink pixel
        int cx = x, cy = y;                              // current border pixel

        while (true) {
            // Counterclockwise search around (cx, cy) starting just past (px, py).
            int back = 0;
            for (int d = 0; d < 8; ++d) {
                if (cx + kDx[d] == px && cy + kDy[d] == py) {
                    back = d;
                    break;
                }
            }
            int nx = 0, ny = 0, ndir = -1;
            bool east_seen_zero = false;
            for (int i = 1; i <= 8; ++i) {
                const int d = (back + i) % 8;
                const int tx = cx + kDx[d], ty = cy + kDy[d];
                if (value(tx, ty) != 0) {
                    ndir = d;
                    nx = tx;
                    ny = ty;
                    break;
                }
                if (d == 0) east_seen_zero = true;
            }

            if (east_seen_zero)
                at(cx, cy) = -nbd;
            else if (at(cx, cy) == 1)
                at(cx, cy) = nbd;
            pts.push_back({cx, cy});

            if (nx == x && ny == y && cx == sx && cy == sy) break;
            px = cx;
            py = cy;
            cx = nx;
            cy = ny;
            (void)ndir;
        }
        return pts;
    }
};

}  // namespace

std::vector<Contour> find_contours(const BinaryImage& bin) {
    std::vector<Contour> out;
    if (bin.width <= 0 || bin.height <= 0) return out;

    BorderTracer tracer(bin);
    int nbd = 1;  // 1 is reserved for the frame

    for (int y = 0; y < bin.height; ++y) {
        for (int x = 0; x < bin.width; ++x) {
            const int v = tracer.at(x, y);
            if (v == 0) continue;
            const bool outer = v == 1 && tracer.value(x - 1, y) == 0;
            const bool hole = !outer && v >= 1 && tracer.value(x + 1, y) == 0;
            if (!outer && !hole) continue;

            ++nbd;
            const int from_dir = outer ? 4 : 0;  // W for outer starts, E for holes
            std::vector<PixelPos> pts = tracer.trace(x, y, from_dir, nbd);
            if (!outer) continue;  // hole borders are traced for bookkeeping only

            Contour c;
            c.points = std::move(pts);
            int x0 = c.points[0].x, x1 = c.points[0].x;
            int y0 = c.points[0].y, y1 = c.points[0].y;
            for (const PixelPos& p : c.points) {
                x0 = std::min(x0, p.x);
                x1 = std::max(x1, p.x);
                y0 = std::min(y0, p.y);
                y1 = std::max(y1, p.y);
            }
            c.bounds = Rect{x0, y0, x1 - x0 + 1, y1 - y0 + 1};
            out.push_back(std::move(c));
        }
    }

    std::sort(out.begin(), out.end(), [](const Contour& a, const Contour& b) {
        const Rect &ra = a.bounds, &rb = b.bounds;
        if (ra.y != rb.y) return ra.y < rb.y;
        if (ra.x != rb.x) return ra.x < rb.x;
        if (ra.w != rb.w) return ra.w < rb.w;
        return ra.h < rb.h;
    });
    return out;
}

}  // namespace visprompt
