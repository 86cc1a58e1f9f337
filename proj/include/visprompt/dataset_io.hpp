#pragma once

#include <map>
#include <string>
#include <vector>

#include "visprompt/qa.hpp"
#include "visprompt/raster.hpp"

namespace visprompt {

// PNG only: lossless keeps annotation pixels exact. 1/3/4 channel, 8-bit.
// Writes go to a temp file in the same directory and are renamed into place,
// and no timestamp chunk is emitted, so identical pixels give identical bytes.
void write_png(const RasterImage& img, const std::string& path);
RasterImage read_png(const std::string& path);

// JSON Lines, keys in fixed order (id, image, task, conversations), "\n"
// line ends, atomic replace. Returns the record count.
size_t write_records(const std::vector<ConversationRecord>& records,
                     const std::string& path);

std::string record_to_json_line(const ConversationRecord& rec);

// strict: first bad line throws ParseError with its line number.
// lenient: bad lines are skipped; when errors is non-null each skipped line's
// message is appended.
enum class ReadMode { strict, lenient };
std::vector<ConversationRecord> read_records(
    const std::string& path, ReadMode mode = ReadMode::strict,
    std::vector<std::string>* errors = nullptr);

struct DatasetStats {
    std::map<std::string, size_t> records_per_task;
    size_t total_records = 0;
    size_t total_images = 0;  // distinct image refs
    size_t dropped_boxes = 0;
    size_t ocr_failures = 0;
    size_t cot_skips = 0;
};

DatasetStats compute_stats(const std::vector<ConversationRecord>& records);

struct RunManifest {
    std::string tool_version;
    std::string command;
    uint64_t seed = 0;
    std::string input_path;
    std::string output_path;
    std::string config_json;  // snapshot of the effective config, serialized
    DatasetStats stats;
};

// Fixed key order, no timestamps, trailing newline; atomic replace.
void write_manifest(const RunManifest& m, const std::string& path);

// Shared atomic-write helper: writes content to "<path>.tmp.<pid>" then renames.
void atomic_write_text(const std::string& path, const std::string& content);

}  // namespace visprompt
