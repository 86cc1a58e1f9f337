#include <cstdint>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "visprompt/config.hpp"
#include "visprompt/dataset_io.hpp"
#include "visprompt/errors.hpp"
#include "visprompt/pipeline.hpp"
#include "visprompt/synth.hpp"

namespace {

using visprompt::PipelineConfig;

PipelineConfig load_effective_config(const std::string& config_path) {
    if (config_path.empty()) return PipelineConfig{};
    return visprompt::load_config(config_path);
}

void print_stats(const visprompt::DatasetStats& s) {
    std::cout << "records by task:\n";
    for (const auto& [task, n] : s.records_per_task)
        std::cout << "  " << task << ": " << n << "\n";
    std::cout << "total records: " << s.total_records << "\n";
    std::cout << "total images: " << s.total_images << "\n";
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Screenshot-to-training-data toolchain"};
    app.require_subcommand(1);

    std::string input, out, config_path, detections;
    uint64_t seed = 0;
    bool seed_set = false;
    std::string ocr_engine, layout_backend, llm_mode, llm_endpoint;
    int grid = 0, dim = 0;

    const auto add_common = [&](CLI::App* cmd, bool dir_input) {
        cmd->add_option("--input", input,
                        dir_input ? "Input directory of PNG images" : "Input PNG image")
            ->required();
        cmd->add_option("--out", out, "Output directory")->required();
        cmd->add_option("--config", config_path, "JSON config file");
    };

    CLI::App* annotate = app.add_subcommand(
        "annotate", "Detect elements, draw red boxes, emit web_annotation records");
    add_common(annotate, true);
    annotate->add_option("--seed", seed, "Random seed")->each([&](const std::string&) {
        seed_set = true;
    });
    annotate->add_option("--ocr", ocr_engine, "OCR engine: mock or external")
        ->check(CLI::IsMember({"mock", "external"}));

    CLI::App* layout = app.add_subcommand(
        "layout", "Segment the page, draw colored overlays, emit layout_qa records");
    add_common(layout, true);
    layout->add_option("--backend", layout_backend, "Layout backend: heuristic or external")
        ->check(CLI::IsMember({"heuristic", "external"}));
    layout->add_option("--detections", detections,
                       "Detections JSONL file (external backend)");

    CLI::App* cot = app.add_subcommand(
        "cot", "Generate two-round dialogue records for one element per image");
    add_common(cot, true);
    cot->add_option("--seed", seed, "Random seed")->each([&](const std::string&) {
        seed_set = true;
    });
    cot->add_option("--llm", llm_mode, "Completion backend: offline or endpoint")
        ->check(CLI::IsMember({"offline", "endpoint"}));
    cot->add_option("--endpoint", llm_endpoint, "HTTP completion endpoint URL");
    cot->add_option("--ocr", ocr_engine, "OCR engine: mock or external")
        ->check(CLI::IsMember({"mock", "external"}));

    CLI::App* tiles = app.add_subcommand(
        "tiles", "Split into quadrants, fuse features, report the token count");
    add_common(tiles, false);
    tiles->add_option("--grid", grid, "Feature grid side (default 32)");
    tiles->add_option("--dim", dim, "Feature dim per cell (default 8)");
    tiles->add_option("--seed", seed, "Random seed")->each([&](const std::string&) {
        seed_set = true;
    });

    CLI::App* stats = app.add_subcommand("stats", "Summarize a records JSONL file");
    std::string records_path;
    stats->add_option("--records", records_path, "Records JSONL file")->required();

    CLI::App* synth = app.add_subcommand(
        "synth", "Render a synthetic page spec to PNG plus ground-truth sidecar");
    std::string spec_path, synth_out;
    synth->add_option("--spec", spec_path, "Page spec JSON")->required();
    synth->add_option("--out", synth_out, "Output PNG path")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        PipelineConfig cfg = load_effective_config(config_path);
        if (seed_set) cfg.seed = seed;
        if (!ocr_engine.empty()) cfg.ocr.engine = ocr_engine;
        if (!layout_backend.empty()) cfg.layout.backend = layout_backend;
        if (!detections.empty()) cfg.layout.detections_file = detections;
        if (!llm_mode.empty()) cfg.llm.mode = llm_mode;
        if (!llm_endpoint.empty()) cfg.llm.endpoint = llm_endpoint;
        if (grid > 0) cfg.tiler.grid_h = cfg.tiler.grid_w = grid;
        if (dim > 0) cfg.tiler.dim = dim;

        if (annotate->parsed()) {
            return visprompt::run_annotate(input, out, cfg).exit_code;
        }
        if (layout->parsed()) {
            if (cfg.layout.backend == "external" && cfg.layout.detections_file.empty()) {
                std::cerr << "--detections is required with --backend external\n";
                return 1;
            }
            return visprompt::run_layout(input, out, cfg).exit_code;
        }
        if (cot->parsed()) {
            return visprompt::run_cot(input, out, cfg).exit_code;
        }
        if (tiles->parsed()) {
            const long long tokens = visprompt::run_tiles(input, out, cfg);
            std::cout << tokens << "\n";
            return 0;
        }
        if (stats->parsed()) {
            print_stats(visprompt::run_stats(records_path));
            return 0;
        }
        if (synth->parsed()) {
            const visprompt::PageSpec spec = visprompt::load_page_spec(spec_path);
            auto [img, sidecar] = visprompt::render(spec);
            visprompt::write_png(img, synth_out);
            visprompt::write_sidecar(sidecar, visprompt::sidecar_path_for(synth_out));
            return 0;
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 1;
}
