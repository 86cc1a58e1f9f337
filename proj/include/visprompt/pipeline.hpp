#pragma once

#include <string>
#include <vector>

#include "visprompt/config.hpp"
#include "visprompt/dataset_io.hpp"
#include "visprompt/element_detect.hpp"
#include "visprompt/ocr.hpp"
#include "visprompt/raster.hpp"

namespace visprompt {

struct RunResult {
    DatasetStats stats;
    size_t images_seen = 0;
    size_t records_written = 0;
    int exit_code = 0;  // 0: wrote records, 2: zero records
};

// Sorted relative paths of the .png files directly inside dir.
std::vector<std::string> list_input_images(const std::string& dir);

// Per-image random stream: stable across platforms, independent per path.
uint64_t image_seed(uint64_t run_seed, const std::string& relative_path);

// Geometry stage shared by annotate and cot: grayscale, threshold, open and
// close, contour boxes, size/aspect gates, overlap suppression, reading-order
// labels. No OCR.
std::vector<ElementBox> detect_element_boxes(const RasterImage& img,
                                             const PipelineConfig& cfg);

// Detection plus OCR gating; dropped counts boxes removed by the OCR stage.
std::vector<ElementBox> detect_and_read(const RasterImage& img, OcrEngine& engine,
                                        const PipelineConfig& cfg, int* dropped);

// Each run writes images under <out>/images, records under <out>/records,
// and a manifest at <out>/manifest.json. Images are processed one at a time
// in path order; per-image failures are logged to stderr and counted, they
// do not abort the run.
RunResult run_annotate(const std::string& input_dir, const std::string& out_dir,
                       const PipelineConfig& cfg);
RunResult run_layout(const std::string& input_dir, const std::string& out_dir,
                     const PipelineConfig& cfg);
RunResult run_cot(const std::string& input_dir, const std::string& out_dir,
                  const PipelineConfig& cfg);

// Writes the five tile PNGs (suffixes _g, _tl, _tr, _bl, _br) and returns the
// fused grid's token count.
long long run_tiles(const std::string& image_path, const std::string& out_dir,
                    const PipelineConfig& cfg);

DatasetStats run_stats(const std::string& records_path);

extern const char* kToolVersion;

}  // namespace visprompt
