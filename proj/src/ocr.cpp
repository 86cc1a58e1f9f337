#include "visprompt/ocr.hpp"

#include <unistd.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <utility>

#include "visprompt/dataset_io.hpp"
#include "visprompt/errors.hpp"

namespace visprompt {

void validate(const OcrConfig& cfg) {
    if (cfg.min_confidence < 0 || cfg.min_confidence > 100)
        throw InvalidConfig("ocr.min_confidence must be in [0, 100]");
}

std::string clean_text(const std::string& raw) {
    std::string out;
    out.reserve(raw.size());
    bool pending_space = false;
    for (unsigned char c : raw) {
        const bool printable = c >= 0x20 && c != 0x7f;
        if (!printable || c == ' ') {
            pending_space = true;
            continue;
        }
        if (pending_space && !out.empty()) out.push_back(' ');
        pending_space = false;
        out.push_back(static_cast<char>(c));
    }
    return out;
}

OcrResult OcrEngine::recognize_region(const RasterImage& page, const Rect& region) {
    return recognize(crop(page, region));
}

MockSidecarOcr::MockSidecarOcr(std::vector<SidecarEntry> entries, double min_match_iou)
    : entries_(std::move(entries)), min_match_iou_(min_match_iou) {}

namespace {

bool is_blank(const RasterImage& crop) {
    // No sample darker than near-white means no ink.
    for (std::uint8_t v : crop.data)
        if (v < 240) return false;
    return true;
}

}  // namespace

OcrResult MockSidecarOcr::recognize(const RasterImage& crop) {
    validate(crop);
    if (is_blank(crop)) return {"", 0};
    // Without the region we can only match by exact size.
    const SidecarEntry* match = nullptr;
    for (const SidecarEntry& e : entries_) {
        if (e.rect.w == crop.width && e.rect.h == crop.height) {
            if (match) return {"", 0};  // ambiguous
            match = &e;
        }
    }
    return match ? OcrResult{match->text, 99} : OcrResult{"", 0};
}

OcrResult MockSidecarOcr::recognize_region(const RasterImage& page, const Rect& region) {
    const SidecarEntry* best = nullptr;
    double best_iou = 0.0;
    for (const SidecarEntry& e : entries_) {
        const double v = iou(e.rect, region);
        if (v >= min_match_iou_ && (best == nullptr || v > best_iou)) {
            best_iou = v;
            best = &e;
        }
    }
    if (best) return {best->text, 99};
    return recognize(crop(page, region));
}

ExternalProcessOcr::ExternalProcessOcr(std::string command_template, bool tsv_output,
                                       std::string temp_dir)
    : command_template_(std::move(command_template)),
      tsv_(tsv_output),
      temp_dir_(std::move(temp_dir)) {
    if (command_template_.empty())
        throw InvalidConfig("ocr.command must be set for the external engine");
}

OcrResult ExternalProcessOcr::recognize(const RasterImage& crop) {
    validate(crop);
    namespace fs = std::filesystem;
    const fs::path dir = temp_dir_.empty() ? fs::temp_directory_path() : fs::path(temp_dir_);
    static unsigned long counter = 0;
    const fs::path tmp =
        dir / ("visprompt_ocr_" + std::to_string(::getpid()) + "_" +
               std::to_string(++counter) + ".png");
    write_png(crop, tmp.string());

    std::string cmd = command_template_;
    const std::string placeholder = "{input}";
    if (auto pos = cmd.find(placeholder); pos != std::string::npos)
        cmd.replace(pos, placeholder.size(), tmp.string());
    else
        cmd += " " + tmp.string();

    FILE* pipe = ::popen((cmd + " 2>/dev/null").c_str(), "r");
    if (!pipe) {
        std::error_code ec;
        fs::remove(tmp, ec);
        throw EngineUnavailable("failed to spawn OCR command: " + cmd);
    }
    std::string output;
    char buf[4096];
    std::size_t n;
    while ((n = std::fread(buf, 1, sizeof(buf), pipe)) > 0) output.append(buf, n);
    const int status = ::pclose(pipe);
    std::error_code ec;
    fs::remove(tmp, ec);
    if (status != 0)
        throw EngineUnavailable("OCR command exited with status " +
                                std::to_string(status) + ": " + cmd);

    if (!tsv_) return {clean_text(output), 75};

    std::string text;
    double conf_sum = 0.0;
    int conf_n = 0;
    std::size_t start = 0;
    while (start < output.size()) {
        std::size_t end = output.find('\n', start);
        if (end == std::string::npos) end = output.size();
        const std::string line = output.substr(start, end - start);
        start = end + 1;
        const std::size_t tab = line.find('\t');
        if (tab == std::string::npos) continue;
        try {
            conf_sum += std::stod(line.substr(0, tab));
            ++conf_n;
        } catch (const std::exception&) {
            continue;
        }
        if (!text.empty()) text += ' ';
        text += line.substr(tab + 1);
    }
    const int conf =
        conf_n > 0 ? static_cast<int>(std::floor(conf_sum / conf_n + 0.5)) : 0;
    return {text, std::clamp(conf, 0, 100)};
}

std::vector<ElementBox> extract_texts(const RasterImage& img,
                                      const std::vector<ElementBox>& boxes,
                                      OcrEngine& engine, const OcrConfig& cfg,
                                      int* drop_count) {
    validate(cfg);
    std::vector<ElementBox> out;
    out.reserve(boxes.size());
    for (const ElementBox& box : boxes) {
        OcrResult r = engine.recognize_region(img, box.rect);
        const std::string text = clean_text(r.text);
        if (r.confidence < cfg.min_confidence) continue;
        if (cfg.drop_empty_after_clean && text.empty()) continue;
        ElementBox kept = box;
        kept.text = text;
        kept.confidence = r.confidence;
        out.push_back(std::move(kept));
    }
    int next = 1;
    for (ElementBox& b : out) b.label = next++;
    if (drop_count) *drop_count = static_cast<int>(boxes.size() - out.size());
    return out;
}

}  // namespace visprompt
