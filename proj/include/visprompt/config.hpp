#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "visprompt/element_detect.hpp"
#include "visprompt/layout.hpp"
#include "visprompt/ocr.hpp"
#include "visprompt/prompt_render.hpp"
#include "visprompt/qa.hpp"

namespace visprompt {

struct BinarizeSettings {
    std::string method = "otsu";  // otsu | fixed
    int fixed_threshold = 128;
    bool invert = false;
};

struct MorphologySettings {
    int open_kernel = 3;   // odd; 0 disables the pass
    int close_kernel = 3;
};

struct OcrSettings {
    std::string engine = "mock";  // mock | external
    std::string command;          // external command template, "{input}" = crop path
    bool tsv_output = false;
    OcrConfig filter;
};

struct LayoutSettings {
    std::string backend = "heuristic";  // heuristic | external
    std::string detections_file;
    CategoryMap categories = CategoryMap::defaults();
    XyCutConfig xycut;
    // Categories the overlay renderer paints; empty means all of them.
    std::vector<Category> overlay_categories;
};

struct TilerSettings {
    int encoder_size = 1024;
    int grid_h = 32;
    int grid_w = 32;
    int dim = 8;
    std::string aggregate = "sum";  // sum | mean
};

struct LlmSettings {
    std::string mode = "offline";  // offline | endpoint
    std::string endpoint;
};

// Every tunable in one place. The JSON file mirrors this structure; unknown
// keys are rejected with their full key path.
struct PipelineConfig {
    uint64_t seed = 0;
    CandidateFilter filter;
    BinarizeSettings binarize;
    MorphologySettings morphology;
    OcrSettings ocr;
    LayoutSettings layout;
    AnnotationStyle style;
    CategoryPalette palette = CategoryPalette::defaults();
    QaTemplates templates;
    TilerSettings tiler;
    LlmSettings llm;
};

void validate(const PipelineConfig& cfg);

PipelineConfig parse_config(const std::string& json_text);
PipelineConfig load_config(const std::string& path);

// Deterministic snapshot of the effective config, embedded in run manifests.
std::string config_to_json(const PipelineConfig& cfg);

}  // namespace visprompt
