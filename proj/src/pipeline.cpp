#include "visprompt/pipeline.hpp"

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <memory>

#include "visprompt/errors.hpp"
#include "visprompt/imgproc.hpp"
#include "visprompt/layout.hpp"
#include "visprompt/prompt_render.hpp"
#include "visprompt/qa.hpp"
#include "visprompt/synth.hpp"
#include "visprompt/tiler.hpp"

namespace fs = std::filesystem;

namespace visprompt {

const char* kToolVersion = "0.1.0";

std::vector<std::string> list_input_images(const std::string& dir) {
    std::error_code ec;
    if (!fs::is_directory(dir, ec))
        throw IoError("input is not a directory: " + dir);
    std::vector<std::string> out;
    for (const auto& entry : fs::directory_iterator(dir)) {
        if (!entry.is_regular_file()) continue;
        if (entry.path().extension() == ".png")
            out.push_back(entry.path().filename().string());
    }
    std::sort(out.begin(), out.end());
    return out;
}

uint64_t image_seed(uint64_t run_seed, const std::string& relative_path) {
    uint64_t state = run_seed;
    state ^= splitmix64(state) + hash_string(relative_path);
    return state;
}

std::vector<ElementBox> detect_element_boxes(const RasterImage& img,
                                             const PipelineConfig& cfg) {
    const RasterImage gray = to_grayscale(img);
    int threshold = cfg.binarize.fixed_threshold;
    if (cfg.binarize.method == "otsu") {
        const OtsuResult r = otsu_threshold(gray);
        if (r.degenerate) return {};  // flat image, no elements
        threshold = r.threshold;
    }
    BinaryImage b = binarize(gray, threshold, cfg.binarize.invert);
    if (cfg.morphology.open_kernel > 0)
        b = open(b, Kernel{cfg.morphology.open_kernel});
    if (cfg.morphology.close_kernel > 0)
        b = close(b, Kernel{cfg.morphology.close_kernel});

    std::vector<Rect> rects;
    for (const Contour& c : find_contours(b)) rects.push_back(c.bounds);
    rects = filter_candidates(rects, cfg.filter, img.width, img.height);
    rects = suppress_overlaps(rects, cfg.filter);
    return assign_labels(rects);
}

std::vector<ElementBox> detect_and_read(const RasterImage& img, OcrEngine& engine,
                                        const PipelineConfig& cfg, int* dropped) {
    const std::vector<ElementBox> boxes = detect_element_boxes(img, cfg);
    return extract_texts(img, boxes, engine, cfg.ocr.filter, dropped);
}

namespace {

struct OutTree {
    fs::path root;
    fs::path images;
    fs::path records;
};

OutTree prepare_out_tree(const std::string& out_dir) {
    OutTree t{out_dir, fs::path(out_dir) / "images", fs::path(out_dir) / "records"};
    std::error_code ec;
    fs::create_directories(t.images, ec);
    if (ec) throw IoError("cannot create " + t.images.string() + ": " + ec.message());
    fs::create_directories(t.records, ec);
    if (ec) throw IoError("cannot create " + t.records.string() + ": " + ec.message());
    return t;
}

std::string stem_of(const std::string& filename) {
    return fs::path(filename).stem().string();
}

// Mock OCR needs the page's ground-truth sidecar; absence is a per-image
// failure, not a run failure.
std::unique_ptr<OcrEngine> make_engine_for(const PipelineConfig& cfg,
                                           const fs::path& image_path) {
    if (cfg.ocr.engine == "mock") {
        const std::string sidecar = sidecar_path_for(image_path.string());
        return std::make_unique<MockSidecarOcr>(read_sidecar(sidecar));
    }
    return std::make_unique<ExternalProcessOcr>(cfg.ocr.command, cfg.ocr.tsv_output);
}

void finish_manifest(const std::string& command, const PipelineConfig& cfg,
                     const std::string& input_dir, const OutTree& tree,
                     const DatasetStats& stats) {
    RunManifest m;
    m.tool_version = kToolVersion;
    m.command = command;
    m.seed = cfg.seed;
    m.input_path = input_dir;
    m.output_path = tree.root.string();
    m.config_json = config_to_json(cfg);
    m.stats = stats;
    write_manifest(m, (tree.root / "manifest.json").string());
}

}  // namespace

RunResult run_annotate(const std::string& input_dir, const std::string& out_dir,
                       const PipelineConfig& cfg) {
    validate(cfg);
    const OutTree tree = prepare_out_tree(out_dir);
    RunResult res;
    std::vector<ConversationRecord> records;

    for (const std::string& rel : list_input_images(input_dir)) {
        ++res.images_seen;
        const fs::path img_path = fs::path(input_dir) / rel;
        try {
            const RasterImage img = read_png(img_path.string());
            const auto engine = make_engine_for(cfg, img_path);
            int dropped = 0;
            const std::vector<ElementBox> boxes =
                detect_and_read(img, *engine, cfg, &dropped);
            res.stats.dropped_boxes += static_cast<size_t>(dropped);
            if (boxes.empty()) {
                std::cerr << rel << ": no elements survived detection, skipping\n";
                continue;
            }
            write_png(draw_boxes(img, boxes, cfg.style),
                      (tree.images / (stem_of(rel) + "_boxes.png")).string());

            Rng rng(image_seed(cfg.seed, rel));
            const ElementBox& selected = select_box(boxes, rng);
            records.push_back(make_web_annotation_record(
                stem_of(rel) + "_web", rel, boxes, selected, rng, cfg.templates));
        } catch (const EngineUnavailable& e) {
            ++res.stats.ocr_failures;
            std::cerr << rel << ": OCR unavailable: " << e.what() << "\n";
        } catch (const IoError& e) {
            ++res.stats.ocr_failures;
            std::cerr << rel << ": " << e.what() << "\n";
        } catch (const ParseError& e) {
            ++res.stats.ocr_failures;
            std::cerr << rel << ": " << e.what() << "\n";
        }
    }

    res.records_written =
        write_records(records, (tree.records / "web_annotation.jsonl").string());
    const DatasetStats record_stats = compute_stats(records);
    res.stats.records_per_task = record_stats.records_per_task;
    res.stats.total_records = record_stats.total_records;
    res.stats.total_images = record_stats.total_images;
    finish_manifest("annotate", cfg, input_dir, tree, res.stats);
    res.exit_code = records.empty() ? 2 : 0;
    return res;
}

RunResult run_layout(const std::string& input_dir, const std::string& out_dir,
                     const PipelineConfig& cfg) {
    validate(cfg);
    if (cfg.layout.backend == "external" && cfg.layout.detections_file.empty())
        throw InvalidConfig("layout.detections_file is required with the external backend");
    const OutTree tree = prepare_out_tree(out_dir);
    RunResult res;
    std::vector<ConversationRecord> records;

    for (const std::string& rel : list_input_images(input_dir)) {
        ++res.images_seen;
        const fs::path img_path = fs::path(input_dir) / rel;
        try {
            const RasterImage img = read_png(img_path.string());
            std::vector<LayoutBlock> blocks;
            if (cfg.layout.backend == "external") {
                blocks = load_external_detections(cfg.layout.detections_file, rel,
                                                  img.width, img.height,
                                                  cfg.layout.categories);
            } else {
                blocks = detect_heuristic(img, cfg.layout.xycut);
            }
            if (blocks.empty()) {
                std::cerr << rel << ": no layout blocks found, skipping\n";
                continue;
            }

            std::vector<LayoutBlock> overlay_blocks;
            for (const LayoutBlock& b : blocks) {
                const auto& wanted = cfg.layout.overlay_categories;
                if (wanted.empty() ||
                    std::find(wanted.begin(), wanted.end(), b.category) != wanted.end())
                    overlay_blocks.push_back(b);
            }
            write_png(draw_layout_overlay(img, overlay_blocks, cfg.palette, cfg.style),
                      (tree.images / (stem_of(rel) + "_layout.png")).string());

            const auto image_records = make_layout_records(
                stem_of(rel) + "_layout", rel, blocks, img.width, img.height,
                cfg.templates);
            records.insert(records.end(), image_records.begin(), image_records.end());
        } catch (const IoError& e) {
            std::cerr << rel << ": " << e.what() << "\n";
        } catch (const ParseError& e) {
            std::cerr << rel << ": " << e.what() << "\n";
        }
    }

    res.records_written =
        write_records(records, (tree.records / "layout_qa.jsonl").string());
    const DatasetStats record_stats = compute_stats(records);
    res.stats.records_per_task = record_stats.records_per_task;
    res.stats.total_records = record_stats.total_records;
    res.stats.total_images = record_stats.total_images;
    finish_manifest("layout", cfg, input_dir, tree, res.stats);
    res.exit_code = records.empty() ? 2 : 0;
    return res;
}

RunResult run_cot(const std::string& input_dir, const std::string& out_dir,
                  const PipelineConfig& cfg) {
    validate(cfg);
    const OutTree tree = prepare_out_tree(out_dir);
    RunResult res;
    std::vector<ConversationRecord> records;

    std::unique_ptr<CoTClient> client;
    if (cfg.llm.mode == "offline") {
        client = std::make_unique<OfflineCoTClient>();
    } else {
        const char* key = std::getenv("LLM_API_KEY");
        client = std::make_unique<HttpCoTClient>(cfg.llm.endpoint, key ? key : "");
    }

    for (const std::string& rel : list_input_images(input_dir)) {
        ++res.images_seen;
        const fs::path img_path = fs::path(input_dir) / rel;
        try {
            const RasterImage img = read_png(img_path.string());
            const auto engine = make_engine_for(cfg, img_path);
            int dropped = 0;
            const std::vector<ElementBox> boxes =
                detect_and_read(img, *engine, cfg, &dropped);
            res.stats.dropped_boxes += static_cast<size_t>(dropped);
            if (boxes.empty()) {
                std::cerr << rel << ": no elements survived detection, skipping\n";
                continue;
            }

            Rng rng(image_seed(cfg.seed, rel));
            const ElementBox& selected = select_box(boxes, rng);
            // The dialogue references one red box, so only that box is drawn.
            const std::string annotated =
                (tree.images / (stem_of(rel) + "_cot.png")).string();
            write_png(draw_boxes(img, {selected}, cfg.style), annotated);

            try {
                records.push_back(make_cot_record(stem_of(rel) + "_cot", rel,
                                                  annotated, selected, img.width,
                                                  img.height, *client,
                                                  cfg.templates));
            } catch (const ClientError& e) {
                ++res.stats.cot_skips;
                std::cerr << rel << ": completion failed, record skipped: "
                          << e.what() << "\n";
            }
        } catch (const EngineUnavailable& e) {
            ++res.stats.ocr_failures;
            std::cerr << rel << ": OCR unavailable: " << e.what() << "\n";
        } catch (const IoError& e) {
            ++res.stats.ocr_failures;
            std::cerr << rel << ": " << e.what() << "\n";
        } catch (const ParseError& e) {
            ++res.stats.ocr_failures;
            std::cerr << rel << ": " << e.what() << "\n";
        }
    }

    res.records_written = write_records(records, (tree.records / "cot.jsonl").string());
    const DatasetStats record_stats = compute_stats(records);
    res.stats.records_per_task = record_stats.records_per_task;
    res.stats.total_records = record_stats.total_records;
    res.stats.total_images = record_stats.total_images;
    finish_manifest("cot", cfg, input_dir, tree, res.stats);
    res.exit_code = records.empty() ? 2 : 0;
    return res;
}

long long run_tiles(const std::string& image_path, const std::string& out_dir,
                    const PipelineConfig& cfg) {
    validate(cfg);
    std::error_code ec;
    fs::create_directories(out_dir, ec);
    if (ec) throw IoError("cannot create " + out_dir + ": " + ec.message());

    const RasterImage img = read_png(image_path);
    const TileSet tiles = split_quadrants(img, cfg.tiler.encoder_size);
    const std::string stem = fs::path(image_path).stem().string();
    const fs::path out(out_dir);
    write_png(tiles.global, (out / (stem + "_g.png")).string());
    const char* suffix[4] = {"_tl", "_tr", "_bl", "_br"};
    for (size_t i = 0; i < 4; ++i)
        write_png(tiles.quadrants[i], (out / (stem + suffix[i] + ".png")).string());

    const AggregateMode mode = cfg.tiler.aggregate == "mean" ? AggregateMode::mean
                                                             : AggregateMode::sum;
    const FeatureGrid fused = fuse_features(tiles, cfg.tiler.grid_h, cfg.tiler.grid_w,
                                            cfg.tiler.dim, cfg.seed, mode);
    return fused.token_count();
}

DatasetStats run_stats(const std::string& records_path) {
    return compute_stats(read_records(records_path, ReadMode::strict));
}

}  // namespace visprompt
