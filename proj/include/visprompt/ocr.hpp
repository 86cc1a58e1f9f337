#pragma once

#include <memory>
#include <string>
#include <vector>

#include "visprompt/element_detect.hpp"
#include "visprompt/raster.hpp"

namespace visprompt {

struct OcrResult {
    std::string text;
    int confidence = 0;  // 0..100
};

struct OcrConfig {
    int min_confidence = 40;
    bool drop_empty_after_clean = true;
};

void validate(const OcrConfig& cfg);

// Maps every non-printable character (tab and newline included) to a space,
// collapses runs of spaces, and trims the ends. Bytes >= 0x80 pass through so
// UTF-8 sequences survive. Idempotent.
std::string clean_text(const std::string& raw);

// Engine contract. recognize() consumes a cropped region; recognize_region()
// exists so engines that key off page geometry (the sidecar mock) can see
// where the crop came from. The default just crops and delegates.
class OcrEngine {
  public:
    virtual ~OcrEngine() = default;
    virtual OcrResult recognize(const RasterImage& crop) = 0;
    virtual OcrResult recognize_region(const RasterImage& page, const Rect& region);
};

// Ground-truth entry for one synthetic element.
struct SidecarEntry {
    Rect rect;
    std::string text;
    std::string kind;
};

// Test/offline engine backed by synthetic-screenshot ground truth: a region
// is matched to the sidecar entry with the highest IoU (at least min_match_iou)
// and answered with that entry's text at confidence 99. Blank crops and
// unmatched regions give ("", 0).
class MockSidecarOcr : public OcrEngine {
  public:
    explicit MockSidecarOcr(std::vector<SidecarEntry> entries, double min_match_iou = 0.25);

    OcrResult recognize(const RasterImage& crop) override;
    OcrResult recognize_region(const RasterImage& page, const Rect& region) override;

  private:
    std::vector<SidecarEntry> entries_;
    double min_match_iou_;
};

// Spawns a configured command with the crop written to a temporary PNG.
// The template's "{input}" placeholder is replaced with the file path (the
// path is appended when no placeholder is present). Text is read from the
// command's stdout. In TSV mode each output line is "<confidence>\t<text>";
// texts are joined with spaces and the confidence is their rounded mean.
// Otherwise stdout is the text and confidence defaults to 75.
class ExternalProcessOcr : public OcrEngine {
  public:
    ExternalProcessOcr(std::string command_template, bool tsv_output = false,
                       std::string temp_dir = "");

    OcrResult recognize(const RasterImage& crop) override;

  private:
    std::string command_template_;
    bool tsv_;
    std::string temp_dir_;
};

// Runs OCR over each box's crop, cleans the text, drops boxes below
// min_confidence (or empty after cleaning, when configured), and relabels the
// survivors 1..M preserving reading order. Geometry is never modified.
// When drop_count is non-null it receives the number of boxes removed.
std::vector<ElementBox> extract_texts(const RasterImage& img,
                                      const std::vector<ElementBox>& boxes,
                                      OcrEngine& engine, const OcrConfig& cfg,
                                      int* drop_count = nullptr);

}  // namespace visprompt
