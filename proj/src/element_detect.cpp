#include "visprompt/element_detect.hpp"

#include <algorithm>
#include <numeric>

#include "visprompt/errors.hpp"

namespace visprompt {

void validate(const CandidateFilter& cfg) {
    if (cfg.min_area < 1) throw InvalidConfig("filter.min_area must be >= 1");
    if (cfg.max_area_fraction <= 0.0 || cfg.max_area_fraction > 1.0)
        throw InvalidConfig("filter.max_area_fraction must be in (0, 1]");
    if (!(cfg.aspect_min > 0.0) || !(cfg.aspect_min < cfg.aspect_max))
        throw InvalidConfig("filter requires 0 < aspect_min < aspect_max");
    if (cfg.iou_dedup < 0.0 || cfg.iou_dedup > 1.0)
        throw InvalidConfig("filter.iou_dedup must be in [0, 1]");
    if (cfg.containment_drop < 0.0 || cfg.containment_drop > 1.0)
        throw InvalidConfig("filter.containment_drop must be in [0, 1]");
}

std::vector<Rect> filter_candidates(const std::vector<Rect>& rects,
                                    const CandidateFilter& cfg, int img_w, int img_h) {
    validate(cfg);
    const double max_area =
        cfg.max_area_fraction * static_cast<double>(img_w) * img_h;
    std::vector<Rect> kept;
    kept.reserve(rects.size());
    for (const Rect& r : rects) {
        if (r.w <= 0 || r.h <= 0) continue;
        const double area = static_cast<double>(r.area());
        if (area < static_cast<double>(cfg.min_area) || area > max_area) continue;
        const double aspect = static_cast<double>(r.w) / r.h;
        if (aspect < cfg.aspect_min || aspect > cfg.aspect_max) continue;
        kept.push_back(r);
    }
    return kept;
}

std::vector<Rect> suppress_overlaps(const std::vector<Rect>& rects,
                                    const CandidateFilter& cfg) {
    validate(cfg);
    std::vector<std::size_t> order(rects.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (rects[a].area() != rects[b].area()) return rects[a].area() > rects[b].area();
        const Rect &ra = rects[a], &rb = rects[b];
        if (ra.y != rb.y) return ra.y < rb.y;
        if (ra.x != rb.x) return ra.x < rb.x;
        return a < b;
    });

    std::vector<bool> keep(rects.size(), false);
    std::vector<std::size_t> kept_idx;
    for (std::size_t i : order) {
        bool drop = false;
        for (std::size_t j : kept_idx) {
            if (iou(rects[i], rects[j]) >= cfg.iou_dedup ||
                containment(rects[i], rects[j]) >= cfg.containment_drop) {
                drop = true;
                break;
            }
        }
        if (!drop) {
            keep[i] = true;
            kept_idx.push_back(i);
        }
    }

    std::vector<Rect> out;
    out.reserve(kept_idx.size());
    for (std::size_t i = 0; i < rects.size(); ++i)
        if (keep[i]) out.push_back(rects[i]);
    return out;
}

std::vector<ElementBox> assign_labels(const std::vector<Rect>& rects) {
    std::vector<Rect> sorted = rects;
    std::sort(sorted.begin(), sorted.end(), [](const Rect& a, const Rect& b) {
        if (a.y != b.y) return a.y < b.y;
        if (a.x != b.x) return a.x < b.x;
        if (a.w != b.w) return a.w < b.w;
        return a.h < b.h;
    });
    std::vector<ElementBox> out;
    out.reserve(sorted.size());
    int label = 1;
    for (const Rect& r : sorted) out.push_back(ElementBox{r, label++, "", 0});
    return out;
}

}  // namespace visprompt
