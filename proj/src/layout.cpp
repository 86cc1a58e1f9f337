#include "visprompt/layout.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "json.hpp"
#include "visprompt/errors.hpp"
#include "visprompt/imgproc.hpp"

namespace visprompt {

const char* category_name(Category c) {
    switch (c) {
        case Category::title: return "title";
        case Category::text: return "text";
        case Category::figure: return "figure";
        case Category::table: return "table";
        case Category::button: return "button";
        case Category::other: return "other";
    }
    return "other";
}

Category category_from_name(const std::string& name) {
    for (Category c : kAllCategories)
        if (name == category_name(c)) return c;
    throw InvalidInput("unknown category: " + name);
}

const Category kAllCategories[6] = {Category::title,  Category::text,
                                    Category::figure, Category::table,
                                    Category::button, Category::other};

CategoryMap CategoryMap::defaults() {
    CategoryMap m;
    m.mapping = {
        {"title", Category::title},       {"text", Category::text},
        {"plain text", Category::text},   {"paragraph", Category::text},
        {"list", Category::text},         {"caption", Category::text},
        {"figure", Category::figure},     {"image", Category::figure},
        {"picture", Category::figure},    {"table", Category::table},
        {"button", Category::button},     {"link", Category::button},
    };
    return m;
}

Category CategoryMap::lookup(const std::string& label) const {
    auto it = mapping.find(label);
    return it == mapping.end() ? Category::other : it->second;
}

namespace {

void sort_reading_order(std::vector<LayoutBlock>& blocks) {
    std::sort(blocks.begin(), blocks.end(),
              [](const LayoutBlock& a, const LayoutBlock& b) {
                  if (a.rect.y != b.rect.y) return a.rect.y < b.rect.y;
                  if (a.rect.x != b.rect.x) return a.rect.x < b.rect.x;
                  if (a.rect.w != b.rect.w) return a.rect.w < b.rect.w;
                  return a.rect.h < b.rect.h;
              });
}

}  // namespace

std::vector<LayoutBlock> load_external_detections(const std::string& file,
                                                  const std::string& image_id,
                                                  int img_w, int img_h,
                                                  const CategoryMap& categories) {
    std::ifstream in(file);
    if (!in) throw IoError("cannot open detections file: " + file);

    std::vector<LayoutBlock> out;
    std::string line;
    int line_no = 0;
    bool found = false;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        nlohmann::json j = nlohmann::json::parse(line, nullptr, false);
        if (j.is_discarded() || !j.is_object())
            throw ParseError("invalid JSON object", line_no);
        if (!j.contains("image") || !j["image"].is_string())
            throw ParseError("missing string field \"image\"", line_no);
        if (j["image"].get<std::string>() != image_id) continue;
        if (found) throw ParseError("duplicate entry for image \"" + image_id + "\"", line_no);
        found = true;
        if (!j.contains("detections") || !j["detections"].is_array())
            throw ParseError("missing array field \"detections\"", line_no);
        for (const auto& d : j["detections"]) {
            if (!d.is_object() || !d.contains("category") ||
                !d["category"].is_string() || !d.contains("bbox") ||
                !d["bbox"].is_array() || d["bbox"].size() != 4 ||
                !d.contains("score") || !d["score"].is_number())
                throw ParseError("malformed detection entry", line_no);
            for (const auto& v : d["bbox"])
                if (!v.is_number()) throw ParseError("bbox values must be numbers", line_no);
            const double x0 = d["bbox"][0].get<double>();
            const double y0 = d["bbox"][1].get<double>();
            const double x1 = d["bbox"][2].get<double>();
            const double y1 = d["bbox"][3].get<double>();
            if (!(x0 < x1) || !(y0 < y1))
                throw ParseError("bbox must satisfy x0<x1 and y0<y1", line_no);
            const double score = d["score"].get<double>();
            if (score < 0.0 || score > 1.0)
                throw ParseError("score must be in [0, 1]", line_no);

            Rect r{static_cast<int>(std::lround(x0)), static_cast<int>(std::lround(y0)),
                   0, 0};
            r.w = static_cast<int>(std::lround(x1)) - r.x;
            r.h = static_cast<int>(std::lround(y1)) - r.y;
            r = clip_rect(r, img_w, img_h);
            if (r.w <= 0 || r.h <= 0) continue;  // entirely outside the image

            LayoutBlock b;
            b.rect = r;
            b.category = categories.lookup(d["category"].get<std::string>());
            b.confidence = score;
            b.source = BlockSource::external;
            out.push_back(b);
        }
    }
    sort_reading_order(out);
    return out;
}

void validate(const XyCutConfig& cfg) {
    if (cfg.valley_ink_fraction < 0.0 || cfg.valley_ink_fraction >= 1.0)
        throw InvalidConfig("layout.xycut.valley_ink_fraction must be in [0, 1)");
    if (cfg.valley_min_thickness < 1)
        throw InvalidConfig("layout.xycut.valley_min_thickness must be >= 1");
    if (cfg.min_region_side < 1)
        throw InvalidConfig("layout.xycut.min_region_side must be >= 1");
    if (cfg.drop_ink_fraction < 0.0 || cfg.drop_ink_fraction >= 1.0)
        throw InvalidConfig("layout.xycut.drop_ink_fraction must be in [0, 1)");
}

namespace {

struct InkMap {
    int width = 0;
    int height = 0;
    // Row-major prefix counts, (width+1)*(height+1), so any rect sums in O(1).
    std::vector<long long> prefix;

    long long ink(int x, int y, int w, int h) const {
        const int x1 = x + w, y1 = y + h;
        const auto at = [&](int px, int py) {
            return prefix[static_cast<size_t>(py) * (width + 1) + px];
        };
        return at(x1, y1) - at(x, y1) - at(x1, y) + at(x, y);
    }
};

InkMap build_ink_map(const BinaryImage& b) {
    InkMap m;
    m.width = b.width;
    m.height = b.height;
    m.prefix.assign(static_cast<size_t>(b.width + 1) * (b.height + 1), 0);
    for (int y = 0; y < b.height; ++y) {
        long long row = 0;
        for (int x = 0; x < b.width; ++x) {
            row += b.at(x, y);
            m.prefix[static_cast<size_t>(y + 1) * (b.width + 1) + x + 1] =
                m.prefix[static_cast<size_t>(y) * (b.width + 1) + x + 1] + row;
        }
    }
    return m;
}

// Trims r to the smallest sub-rect containing all ink; returns false when empty.
bool trim_to_ink(const InkMap& m, Rect& r) {
    if (m.ink(r.x, r.y, r.w, r.h) == 0) return false;
    while (r.h > 0 && m.ink(r.x, r.y, r.w, 1) == 0) { ++r.y; --r.h; }
    while (r.h > 0 && m.ink(r.x, r.y + r.h - 1, r.w, 1) == 0) --r.h;
    while (r.w > 0 && m.ink(r.x, r.y, 1, r.h) == 0) { ++r.x; --r.w; }
    while (r.w > 0 && m.ink(r.x + r.w - 1, r.y, 1, r.h) == 0) --r.w;
    return r.w > 0 && r.h > 0;
}

struct Valley {
    int start = 0;
    int len = 0;
};

// Widest interior low-ink run along one axis. horizontal=true scans rows.
bool find_valley(const InkMap& m, const Rect& r, bool horizontal,
                 const XyCutConfig& cfg, Valley* out) {
    const int n = horizontal ? r.h : r.w;
    const long long lane = horizontal ? r.w : r.h;
    Valley best;
    int run_start = -1;
    for (int i = 0; i <= n; ++i) {
        bool low = false;
        if (i < n) {
            const long long ink = horizontal ? m.ink(r.x, r.y + i, r.w, 1)
                                             : m.ink(r.x + i, r.y, 1, r.h);
            low = static_cast<double>(ink) <
                  cfg.valley_ink_fraction * static_cast<double>(lane);
        }
        if (low) {
            if (run_start < 0) run_start = i;
            continue;
        }
        if (run_start >= 0) {
            const int len = i - run_start;
            // Runs touching the region edge separate nothing.
            if (run_start > 0 && i < n && len >= cfg.valley_min_thickness &&
                len > best.len) {
                best.start = run_start;
                best.len = len;
            }
            run_start = -1;
        }
    }
    if (best.len == 0) return false;
    *out = best;
    return true;
}

void xy_cut(const InkMap& m, Rect r, const XyCutConfig& cfg,
            std::vector<Rect>* leaves) {
    if (!trim_to_ink(m, r)) return;
    if (r.w >= cfg.min_region_side && r.h >= cfg.min_region_side) {
        Valley h, v;
        const bool has_h = find_valley(m, r, true, cfg, &h);
        const bool has_v = find_valley(m, r, false, cfg, &v);
        if (has_h || has_v) {
            // Cut along the wider valley; ties prefer the horizontal cut.
            const bool cut_h = has_h && (!has_v || h.len >= v.len);
            const Valley& val = cut_h ? h : v;
            Rect a = r, b = r;
            if (cut_h) {
                a.h = val.start;
                b.y = r.y + val.start + val.len;
                b.h = r.h - val.start - val.len;
            } else {
                a.w = val.start;
                b.x = r.x + val.start + val.len;
                b.w = r.w - val.start - val.len;
            }
            xy_cut(m, a, cfg, leaves);
            xy_cut(m, b, cfg, leaves);
            return;
        }
    }
    leaves->push_back(r);
}

// Number of distinct horizontal ink bands (maximal runs of rows with ink).
int count_line_runs(const InkMap& m, const Rect& r) {
    int runs = 0;
    bool in_run = false;
    for (int y = 0; y < r.h; ++y) {
        const bool has_ink = m.ink(r.x, r.y + y, r.w, 1) > 0;
        if (has_ink && !in_run) ++runs;
        in_run = has_ink;
    }
    return runs;
}

}  // namespace

std::vector<LayoutBlock> detect_heuristic(const RasterImage& img,
                                          const XyCutConfig& cfg) {
    validate(img);
    validate(cfg);
    const RasterImage gray = to_grayscale(img);
    const OtsuResult otsu = otsu_threshold(gray);
    std::vector<LayoutBlock> blocks;
    if (otsu.degenerate) return blocks;  // flat page, nothing to segment

    // Dark pixels are ink; pages are assumed light-on-dark-text. Invert when
    // the foreground (below-threshold side) covers most of the page.
    BinaryImage ink = binarize(gray, otsu.threshold, /*invert=*/false);
    {
        long long on = 0;
        for (uint8_t v : ink.data) on += v;
        if (on * 2 > static_cast<long long>(ink.data.size()))
            for (auto& v : ink.data) v = static_cast<uint8_t>(1 - v);
    }

    const InkMap m = build_ink_map(ink);
    std::vector<Rect> leaves;
    xy_cut(m, Rect{0, 0, img.width, img.height}, cfg, &leaves);

    for (const Rect& r : leaves) {
        const double area = static_cast<double>(r.area());
        const double ink_frac = static_cast<double>(m.ink(r.x, r.y, r.w, r.h)) / area;
        if (ink_frac < cfg.drop_ink_fraction) continue;

        LayoutBlock b;
        b.rect = r;
        b.confidence = 0.5;
        b.source = BlockSource::heuristic;
        const bool title_shape =
            r.w >= cfg.title_min_width_frac * img.width &&
            r.h <= cfg.title_max_height_frac * img.height &&
            r.y < cfg.title_top_frac * img.height;
        if (title_shape) {
            b.category = Category::title;
        } else if (ink_frac > cfg.figure_ink_fraction &&
                   count_line_runs(m, r) <= 1) {
            b.category = Category::figure;
        } else {
            b.category = Category::text;
        }
        blocks.push_back(b);
    }
    sort_reading_order(blocks);
    return blocks;
}

}  // namespace visprompt
