#include "visprompt/dataset_io.hpp"

#include <png.h>
#include <unistd.h>

#include <cstdio>
#include <cstring>
#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"
#include "visprompt/errors.hpp"

namespace visprompt {

namespace {

std::string temp_path_for(const std::string& path) {
    return path + ".tmp." + std::to_string(::getpid());
}

void rename_into_place(const std::string& tmp, const std::string& path) {
    if (std::rename(tmp.c_str(), path.c_str()) != 0) {
        std::remove(tmp.c_str());
        throw IoError("cannot rename " + tmp + " to " + path);
    }
}

struct PngWriteCleanup {
    png_structp png = nullptr;
    png_infop info = nullptr;
    FILE* fp = nullptr;
    ~PngWriteCleanup() {
        if (png) png_destroy_write_struct(&png, info ? &info : nullptr);
        if (fp) std::fclose(fp);
    }
};

struct PngReadCleanup {
    png_structp png = nullptr;
    png_infop info = nullptr;
    FILE* fp = nullptr;
    ~PngReadCleanup() {
        if (png) png_destroy_read_struct(&png, info ? &info : nullptr, nullptr);
        if (fp) std::fclose(fp);
    }
};

}  // namespace

void atomic_write_text(const std::string& path, const std::string& content) {
    const std::string tmp = temp_path_for(path);
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw IoError("cannot open for writing: " + tmp);
        out.write(content.data(), static_cast<std::streamsize>(content.size()));
        out.flush();
        if (!out) {
            std::remove(tmp.c_str());
            throw IoError("write failed: " + tmp);
        }
    }
    rename_into_place(tmp, path);
}

void write_png(const RasterImage& img, const std::string& path) {
    validate(img);
    int color_type;
    switch (img.channels) {
        case 1: color_type = PNG_COLOR_TYPE_GRAY; break;
        case 3: color_type = PNG_COLOR_TYPE_RGB; break;
        case 4: color_type = PNG_COLOR_TYPE_RGBA; break;
        default:
            throw InvalidInput("write_png supports 1, 3, or 4 channels, got " +
                               std::to_string(img.channels));
    }

    const std::string tmp = temp_path_for(path);
    PngWriteCleanup c;
    c.fp = std::fopen(tmp.c_str(), "wb");
    if (!c.fp) throw IoError("cannot open for writing: " + tmp);

    c.png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    if (!c.png) throw IoError("png_create_write_struct failed");
    c.info = png_create_info_struct(c.png);
    if (!c.info) throw IoError("png_create_info_struct failed");
    if (setjmp(png_jmpbuf(c.png))) {
        std::remove(tmp.c_str());
        throw IoError("PNG encode failed: " + path);
    }

    png_init_io(c.png, c.fp);
    png_set_IHDR(c.png, c.info, static_cast<png_uint_32>(img.width),
                 static_cast<png_uint_32>(img.height), 8, color_type,
                 PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
                 PNG_FILTER_TYPE_DEFAULT);
    png_write_info(c.png, c.info);

    const size_t stride = static_cast<size_t>(img.width) * img.channels;
    std::vector<png_bytep> rows(static_cast<size_t>(img.height));
    for (int y = 0; y < img.height; ++y)
        rows[static_cast<size_t>(y)] =
            const_cast<png_bytep>(img.data.data() + static_cast<size_t>(y) * stride);
    png_write_image(c.png, rows.data());
    png_write_end(c.png, nullptr);

    std::fclose(c.fp);
    c.fp = nullptr;
    rename_into_place(tmp, path);
}

RasterImage read_png(const std::string& path) {
    PngReadCleanup c;
    c.fp = std::fopen(path.c_str(), "rb");
    if (!c.fp) throw IoError("cannot open image: " + path);

    unsigned char sig[8];
    if (std::fread(sig, 1, 8, c.fp) != 8 || png_sig_cmp(sig, 0, 8) != 0)
        throw ParseError("not a PNG file: " + path);

    c.png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    if (!c.png) throw IoError("png_create_read_struct failed");
    c.info = png_create_info_struct(c.png);
    if (!c.info) throw IoError("png_create_info_struct failed");
    if (setjmp(png_jmpbuf(c.png)))
        throw ParseError("PNG decode failed: " + path);

    png_init_io(c.png, c.fp);
    png_set_sig_bytes(c.png, 8);
    png_read_info(c.png, c.info);

    const png_uint_32 w = png_get_image_width(c.png, c.info);
    const png_uint_32 h = png_get_image_height(c.png, c.info);
    const int bit_depth = png_get_bit_depth(c.png, c.info);
    const int color_type = png_get_color_type(c.png, c.info);

    // Normalize everything to 8-bit gray, RGB, or RGBA.
    if (bit_depth == 16) png_set_strip_16(c.png);
    if (color_type == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(c.png);
    if (color_type == PNG_COLOR_TYPE_GRAY && bit_depth < 8)
        png_set_expand_gray_1_2_4_to_8(c.png);
    if (png_get_valid(c.png, c.info, PNG_INFO_tRNS))
        png_set_tRNS_to_alpha(c.png);
    if (color_type == PNG_COLOR_TYPE_GRAY_ALPHA)
        png_set_gray_to_rgb(c.png);
    png_read_update_info(c.png, c.info);

    const int channels = png_get_channels(c.png, c.info);
    if (channels != 1 && channels != 3 && channels != 4)
        throw ParseError("unsupported channel count in " + path + ": " +
                         std::to_string(channels));

    RasterImage img = RasterImage::create(static_cast<int>(w),
                                          static_cast<int>(h), channels);
    const size_t stride = static_cast<size_t>(img.width) * channels;
    if (png_get_rowbytes(c.png, c.info) != stride)
        throw ParseError("unexpected row size in " + path);
    std::vector<png_bytep> rows(static_cast<size_t>(img.height));
    for (int y = 0; y < img.height; ++y)
        rows[static_cast<size_t>(y)] = img.data.data() + static_cast<size_t>(y) * stride;
    png_read_image(c.png, rows.data());
    png_read_end(c.png, nullptr);
    return img;
}

std::string record_to_json_line(const ConversationRecord& rec) {
    nlohmann::ordered_json j;
    j["id"] = rec.id;
    j["image"] = rec.image;
    j["task"] = task_name(rec.task);
    j["conversations"] = nlohmann::ordered_json::array();
    for (const Turn& t : rec.conversations) {
        nlohmann::ordered_json turn;
        turn["from"] = t.from;
        turn["value"] = t.value;
        j["conversations"].push_back(std::move(turn));
    }
    return j.dump();
}

size_t write_records(const std::vector<ConversationRecord>& records,
                     const std::string& path) {
    std::string body;
    for (const ConversationRecord& rec : records) {
        validate(rec);
        body += record_to_json_line(rec);
        body += '\n';
    }
    atomic_write_text(path, body);
    return records.size();
}

namespace {

ConversationRecord parse_record_line(const std::string& line, int line_no) {
    nlohmann::json j = nlohmann::json::parse(line, nullptr, false);
    if (j.is_discarded() || !j.is_object())
        throw ParseError("invalid JSON object", line_no);
    for (const char* key : {"id", "image", "task", "conversations"})
        if (!j.contains(key))
            throw ParseError(std::string("missing field \"") + key + "\"", line_no);
    if (!j["id"].is_string() || !j["image"].is_string() || !j["task"].is_string() ||
        !j["conversations"].is_array())
        throw ParseError("field has wrong type", line_no);

    ConversationRecord rec;
    rec.id = j["id"].get<std::string>();
    rec.image = j["image"].get<std::string>();
    try {
        rec.task = task_from_name(j["task"].get<std::string>());
    } catch (const InvalidInput& e) {
        throw ParseError(e.what(), line_no);
    }
    for (const auto& t : j["conversations"]) {
        if (!t.is_object() || !t.contains("from") || !t["from"].is_string() ||
            !t.contains("value") || !t["value"].is_string())
            throw ParseError("malformed conversation turn", line_no);
        rec.conversations.push_back(
            {t["from"].get<std::string>(), t["value"].get<std::string>()});
    }
    try {
        validate(rec);
    } catch (const InvalidInput& e) {
        throw ParseError(e.what(), line_no);
    }
    return rec;
}

}  // namespace

std::vector<ConversationRecord> read_records(const std::string& path,
                                             ReadMode mode,
                                             std::vector<std::string>* errors) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open records file: " + path);
    std::vector<ConversationRecord> out;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        try {
            out.push_back(parse_record_line(line, line_no));
        } catch (const ParseError& e) {
            if (mode == ReadMode::strict) throw;
            if (errors) errors->push_back(e.what());
        }
    }
    return out;
}

DatasetStats compute_stats(const std::vector<ConversationRecord>& records) {
    DatasetStats s;
    std::set<std::string> images;
    for (const ConversationRecord& rec : records) {
        ++s.records_per_task[task_name(rec.task)];
        ++s.total_records;
        images.insert(rec.image);
    }
    s.total_images = images.size();
    return s;
}

namespace {

nlohmann::ordered_json stats_to_json(const DatasetStats& s) {
    nlohmann::ordered_json j;
    nlohmann::ordered_json per_task;
    for (const auto& [task, n] : s.records_per_task) per_task[task] = n;
    j["records_per_task"] = std::move(per_task);
    j["total_records"] = s.total_records;
    j["total_images"] = s.total_images;
    j["dropped_boxes"] = s.dropped_boxes;
    j["ocr_failures"] = s.ocr_failures;
    j["cot_skips"] = s.cot_skips;
    return j;
}

}  // namespace

void write_manifest(const RunManifest& m, const std::string& path) {
    nlohmann::ordered_json j;
    j["tool_version"] = m.tool_version;
    j["command"] = m.command;
    j["seed"] = m.seed;
    j["input_path"] = m.input_path;
    j["output_path"] = m.output_path;
    if (m.config_json.empty()) {
        j["config"] = nlohmann::ordered_json::object();
    } else {
        nlohmann::ordered_json cfg =
            nlohmann::ordered_json::parse(m.config_json, nullptr, false);
        if (cfg.is_discarded())
            throw InvalidInput("manifest config snapshot is not valid JSON");
        j["config"] = std::move(cfg);
    }
    j["stats"] = stats_to_json(m.stats);
    atomic_write_text(path, j.dump(2) + "\n");
}

}  // namespace visprompt
