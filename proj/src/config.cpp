#include "visprompt/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"
#include "visprompt/errors.hpp"

namespace visprompt {

void validate(const PipelineConfig& cfg) {
    validate(cfg.filter);
    validate(cfg.style);
    validate(cfg.layout.xycut);
    validate(cfg.ocr.filter);

    if (cfg.binarize.method != "otsu" && cfg.binarize.method != "fixed")
        throw InvalidConfig("binarize.method must be \"otsu\" or \"fixed\"");
    if (cfg.binarize.fixed_threshold < 0 || cfg.binarize.fixed_threshold > 255)
        throw InvalidConfig("binarize.fixed_threshold must be 0..255");
    for (const auto& [key, k] :
         {std::pair<const char*, int>{"morphology.open_kernel", cfg.morphology.open_kernel},
          {"morphology.close_kernel", cfg.morphology.close_kernel}}) {
        if (k < 0 || (k > 0 && k % 2 == 0))
            throw InvalidConfig(std::string(key) + " must be 0 or an odd size");
    }
    if (cfg.ocr.engine != "mock" && cfg.ocr.engine != "external")
        throw InvalidConfig("ocr.engine must be \"mock\" or \"external\"");
    if (cfg.ocr.engine == "external" && cfg.ocr.command.empty())
        throw InvalidConfig("ocr.command is required when ocr.engine is \"external\"");
    if (cfg.layout.backend != "heuristic" && cfg.layout.backend != "external")
        throw InvalidConfig("layout.backend must be \"heuristic\" or \"external\"");
    if (cfg.tiler.encoder_size < 2)
        throw InvalidConfig("tiler.encoder_size must be >= 2");
    if (cfg.tiler.grid_h < 1 || cfg.tiler.grid_w < 1)
        throw InvalidConfig("tiler.grid_h and tiler.grid_w must be >= 1");
    if (cfg.tiler.dim < 1) throw InvalidConfig("tiler.dim must be >= 1");
    if (cfg.tiler.aggregate != "sum" && cfg.tiler.aggregate != "mean")
        throw InvalidConfig("tiler.aggregate must be \"sum\" or \"mean\"");
    if (cfg.llm.mode != "offline" && cfg.llm.mode != "endpoint")
        throw InvalidConfig("llm.mode must be \"offline\" or \"endpoint\"");
    if (cfg.llm.mode == "endpoint" && cfg.llm.endpoint.empty())
        throw InvalidConfig("llm.endpoint is required when llm.mode is \"endpoint\"");
    if (cfg.templates.web_question.empty())
        throw InvalidConfig("templates.web_question must have at least one entry");
}

namespace {

using nlohmann::json;

[[noreturn]] void unknown_key(const std::string& path, const std::string& key) {
    throw InvalidConfig("unknown config key: " +
                        (path.empty() ? key : path + "." + key));
}

void expect_keys(const json& j, const std::string& path,
                 const std::set<std::string>& allowed) {
    for (const auto& item : j.items())
        if (!allowed.count(item.key())) unknown_key(path, item.key());
}

const json& field(const json& j, const char* key) { return j.at(key); }

int get_int(const json& j, const std::string& path) {
    if (!j.is_number_integer())
        throw InvalidConfig(path + " must be an integer");
    return j.get<int>();
}

double get_double(const json& j, const std::string& path) {
    if (!j.is_number()) throw InvalidConfig(path + " must be a number");
    return j.get<double>();
}

bool get_bool(const json& j, const std::string& path) {
    if (!j.is_boolean()) throw InvalidConfig(path + " must be a boolean");
    return j.get<bool>();
}

std::string get_string(const json& j, const std::string& path) {
    if (!j.is_string()) throw InvalidConfig(path + " must be a string");
    return j.get<std::string>();
}

Rgba get_rgba(const json& j, const std::string& path) {
    if (!j.is_array() || (j.size() != 3 && j.size() != 4))
        throw InvalidConfig(path + " must be [r, g, b] or [r, g, b, a]");
    uint8_t v[4] = {0, 0, 0, 255};
    for (size_t i = 0; i < j.size(); ++i) {
        const int c = get_int(j[i], path);
        if (c < 0 || c > 255) throw InvalidConfig(path + " components must be 0..255");
        v[i] = static_cast<uint8_t>(c);
    }
    return {v[0], v[1], v[2], v[3]};
}

Category get_category(const json& j, const std::string& path) {
    try {
        return category_from_name(get_string(j, path));
    } catch (const InvalidInput& e) {
        throw InvalidConfig(path + ": " + e.what());
    }
}

void parse_filter(const json& j, CandidateFilter& f) {
    expect_keys(j, "filter",
                {"min_area", "max_area_fraction", "aspect_min", "aspect_max",
                 "iou_dedup", "containment_drop"});
    if (j.contains("min_area")) f.min_area = get_int(field(j, "min_area"), "filter.min_area");
    if (j.contains("max_area_fraction"))
        f.max_area_fraction = get_double(field(j, "max_area_fraction"), "filter.max_area_fraction");
    if (j.contains("aspect_min")) f.aspect_min = get_double(field(j, "aspect_min"), "filter.aspect_min");
    if (j.contains("aspect_max")) f.aspect_max = get_double(field(j, "aspect_max"), "filter.aspect_max");
    if (j.contains("iou_dedup")) f.iou_dedup = get_double(field(j, "iou_dedup"), "filter.iou_dedup");
    if (j.contains("containment_drop"))
        f.containment_drop = get_double(field(j, "containment_drop"), "filter.containment_drop");
}

void parse_binarize(const json& j, BinarizeSettings& b) {
    expect_keys(j, "binarize", {"method", "fixed_threshold", "invert"});
    if (j.contains("method")) b.method = get_string(field(j, "method"), "binarize.method");
    if (j.contains("fixed_threshold"))
        b.fixed_threshold = get_int(field(j, "fixed_threshold"), "binarize.fixed_threshold");
    if (j.contains("invert")) b.invert = get_bool(field(j, "invert"), "binarize.invert");
}

void parse_morphology(const json& j, MorphologySettings& m) {
    expect_keys(j, "morphology", {"open_kernel", "close_kernel"});
    if (j.contains("open_kernel"))
        m.open_kernel = get_int(field(j, "open_kernel"), "morphology.open_kernel");
    if (j.contains("close_kernel"))
        m.close_kernel = get_int(field(j, "close_kernel"), "morphology.close_kernel");
}

void parse_ocr(const json& j, OcrSettings& o) {
    expect_keys(j, "ocr",
                {"engine", "command", "tsv_output", "min_confidence",
                 "drop_empty_after_clean"});
    if (j.contains("engine")) o.engine = get_string(field(j, "engine"), "ocr.engine");
    if (j.contains("command")) o.command = get_string(field(j, "command"), "ocr.command");
    if (j.contains("tsv_output"))
        o.tsv_output = get_bool(field(j, "tsv_output"), "ocr.tsv_output");
    if (j.contains("min_confidence"))
        o.filter.min_confidence = get_int(field(j, "min_confidence"), "ocr.min_confidence");
    if (j.contains("drop_empty_after_clean"))
        o.filter.drop_empty_after_clean =
            get_bool(field(j, "drop_empty_after_clean"), "ocr.drop_empty_after_clean");
}

void parse_xycut(const json& j, XyCutConfig& x) {
    expect_keys(j, "layout.xycut",
                {"valley_ink_fraction", "valley_min_thickness", "min_region_side",
                 "drop_ink_fraction", "title_min_width_frac", "title_max_height_frac",
                 "title_top_frac", "figure_ink_fraction"});
    if (j.contains("valley_ink_fraction"))
        x.valley_ink_fraction = get_double(field(j, "valley_ink_fraction"),
                                           "layout.xycut.valley_ink_fraction");
    if (j.contains("valley_min_thickness"))
        x.valley_min_thickness = get_int(field(j, "valley_min_thickness"),
                                         "layout.xycut.valley_min_thickness");
    if (j.contains("min_region_side"))
        x.min_region_side = get_int(field(j, "min_region_side"),
                                    "layout.xycut.min_region_side");
    if (j.contains("drop_ink_fraction"))
        x.drop_ink_fraction = get_double(field(j, "drop_ink_fraction"),
                                         "layout.xycut.drop_ink_fraction");
    if (j.contains("title_min_width_frac"))
        x.title_min_width_frac = get_double(field(j, "title_min_width_frac"),
                                            "layout.xycut.title_min_width_frac");
    if (j.contains("title_max_height_frac"))
        x.title_max_height_frac = get_double(field(j, "title_max_height_frac"),
                                             "layout.xycut.title_max_height_frac");
    if (j.contains("title_top_frac"))
        x.title_top_frac = get_double(field(j, "title_top_frac"),
                                      "layout.xycut.title_top_frac");
    if (j.contains("figure_ink_fraction"))
        x.figure_ink_fraction = get_double(field(j, "figure_ink_fraction"),
                                           "layout.xycut.figure_ink_fraction");
}

void parse_layout(const json& j, LayoutSettings& l) {
    expect_keys(j, "layout",
                {"backend", "detections_file", "categories", "xycut",
                 "overlay_categories"});
    if (j.contains("backend")) l.backend = get_string(field(j, "backend"), "layout.backend");
    if (j.contains("detections_file"))
        l.detections_file = get_string(field(j, "detections_file"), "layout.detections_file");
    if (j.contains("categories")) {
        const json& c = field(j, "categories");
        if (!c.is_object())
            throw InvalidConfig("layout.categories must be an object of label -> category");
        l.categories.mapping.clear();
        for (const auto& item : c.items())
            l.categories.mapping[item.key()] =
                get_category(item.value(), "layout.categories." + item.key());
    }
    if (j.contains("xycut")) {
        const json& x = field(j, "xycut");
        if (!x.is_object()) throw InvalidConfig("layout.xycut must be an object");
        parse_xycut(x, l.xycut);
    }
    if (j.contains("overlay_categories")) {
        const json& oc = field(j, "overlay_categories");
        if (!oc.is_array())
            throw InvalidConfig("layout.overlay_categories must be an array");
        l.overlay_categories.clear();
        for (const auto& v : oc)
            l.overlay_categories.push_back(
                get_category(v, "layout.overlay_categories"));
    }
}

void parse_style(const json& j, AnnotationStyle& s) {
    expect_keys(j, "style", {"box_color", "stroke_px", "label_scale", "overlay_alpha"});
    if (j.contains("box_color")) s.box_color = get_rgba(field(j, "box_color"), "style.box_color");
    if (j.contains("stroke_px")) s.stroke_px = get_int(field(j, "stroke_px"), "style.stroke_px");
    if (j.contains("label_scale"))
        s.label_scale = get_int(field(j, "label_scale"), "style.label_scale");
    if (j.contains("overlay_alpha"))
        s.overlay_alpha = get_double(field(j, "overlay_alpha"), "style.overlay_alpha");
}

void parse_palette(const json& j, CategoryPalette& p) {
    for (const auto& item : j.items()) {
        const std::string path = "palette." + item.key();
        Category c;
        try {
            c = category_from_name(item.key());
        } catch (const InvalidInput&) {
            unknown_key("palette", item.key());
        }
        const Rgba v = get_rgba(item.value(), path);
        p.colors[c] = {v.r, v.g, v.b};
    }
}

void parse_templates(const json& j, QaTemplates& t) {
    expect_keys(j, "templates",
                {"web_question", "web_answer", "layout_inventory_question",
                 "layout_inventory_item", "layout_count_question",
                 "layout_count_answer", "cot_question_1", "cot_question_2",
                 "cot_system_1", "cot_user_1", "cot_system_2", "cot_user_2"});
    if (j.contains("web_question")) {
        const json& q = field(j, "web_question");
        if (!q.is_array()) throw InvalidConfig("templates.web_question must be an array");
        t.web_question.clear();
        for (const auto& v : q)
            t.web_question.push_back(get_string(v, "templates.web_question"));
    }
    const auto opt = [&](const char* key, std::string& dst) {
        if (j.contains(key)) dst = get_string(field(j, key), std::string("templates.") + key);
    };
    opt("web_answer", t.web_answer);
    opt("layout_inventory_question", t.layout_inventory_question);
    opt("layout_inventory_item", t.layout_inventory_item);
    opt("layout_count_question", t.layout_count_question);
    opt("layout_count_answer", t.layout_count_answer);
    opt("cot_question_1", t.cot_question_1);
    opt("cot_question_2", t.cot_question_2);
    opt("cot_system_1", t.cot_system_1);
    opt("cot_user_1", t.cot_user_1);
    opt("cot_system_2", t.cot_system_2);
    opt("cot_user_2", t.cot_user_2);
}

void parse_tiler(const json& j, TilerSettings& t) {
    expect_keys(j, "tiler", {"encoder_size", "grid_h", "grid_w", "dim", "aggregate"});
    if (j.contains("encoder_size"))
        t.encoder_size = get_int(field(j, "encoder_size"), "tiler.encoder_size");
    if (j.contains("grid_h")) t.grid_h = get_int(field(j, "grid_h"), "tiler.grid_h");
    if (j.contains("grid_w")) t.grid_w = get_int(field(j, "grid_w"), "tiler.grid_w");
    if (j.contains("dim")) t.dim = get_int(field(j, "dim"), "tiler.dim");
    if (j.contains("aggregate"))
        t.aggregate = get_string(field(j, "aggregate"), "tiler.aggregate");
}

void parse_llm(const json& j, LlmSettings& l) {
    expect_keys(j, "llm", {"mode", "endpoint"});
    if (j.contains("mode")) l.mode = get_string(field(j, "mode"), "llm.mode");
    if (j.contains("endpoint")) l.endpoint = get_string(field(j, "endpoint"), "llm.endpoint");
}

}  // namespace

PipelineConfig parse_config(const std::string& json_text) {
    json j = json::parse(json_text, nullptr, false);
    if (j.is_discarded() || !j.is_object())
        throw InvalidConfig("config must be a JSON object");

    expect_keys(j, "",
                {"seed", "filter", "binarize", "morphology", "ocr", "layout",
                 "style", "palette", "templates", "tiler", "llm"});

    PipelineConfig cfg;
    if (j.contains("seed")) {
        if (!j["seed"].is_number_unsigned() && !j["seed"].is_number_integer())
            throw InvalidConfig("seed must be a non-negative integer");
        const auto v = j["seed"].get<int64_t>();
        if (j["seed"].is_number_integer() && v < 0)
            throw InvalidConfig("seed must be a non-negative integer");
        cfg.seed = j["seed"].get<uint64_t>();
    }
    const auto section = [&](const char* key) -> const json* {
        if (!j.contains(key)) return nullptr;
        if (!j[key].is_object())
            throw InvalidConfig(std::string(key) + " must be an object");
        return &j[key];
    };
    if (const json* s = section("filter")) parse_filter(*s, cfg.filter);
    if (const json* s = section("binarize")) parse_binarize(*s, cfg.binarize);
    if (const json* s = section("morphology")) parse_morphology(*s, cfg.morphology);
    if (const json* s = section("ocr")) parse_ocr(*s, cfg.ocr);
    if (const json* s = section("layout")) parse_layout(*s, cfg.layout);
    if (const json* s = section("style")) parse_style(*s, cfg.style);
    if (const json* s = section("palette")) parse_palette(*s, cfg.palette);
    if (const json* s = section("templates")) parse_templates(*s, cfg.templates);
    if (const json* s = section("tiler")) parse_tiler(*s, cfg.tiler);
    if (const json* s = section("llm")) parse_llm(*s, cfg.llm);

    validate(cfg);
    return cfg;
}

PipelineConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open config file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_config(buf.str());
}

std::string config_to_json(const PipelineConfig& cfg) {
    nlohmann::ordered_json j;
    j["seed"] = cfg.seed;
    j["filter"] = {{"min_area", cfg.filter.min_area},
                   {"max_area_fraction", cfg.filter.max_area_fraction},
                   {"aspect_min", cfg.filter.aspect_min},
                   {"aspect_max", cfg.filter.aspect_max},
                   {"iou_dedup", cfg.filter.iou_dedup},
                   {"containment_drop", cfg.filter.containment_drop}};
    j["binarize"] = {{"method", cfg.binarize.method},
                     {"fixed_threshold", cfg.binarize.fixed_threshold},
                     {"invert", cfg.binarize.invert}};
    j["morphology"] = {{"open_kernel", cfg.morphology.open_kernel},
                       {"close_kernel", cfg.morphology.close_kernel}};
    j["ocr"] = {{"engine", cfg.ocr.engine},
                {"command", cfg.ocr.command},
                {"tsv_output", cfg.ocr.tsv_output},
                {"min_confidence", cfg.ocr.filter.min_confidence},
                {"drop_empty_after_clean", cfg.ocr.filter.drop_empty_after_clean}};
    nlohmann::ordered_json categories = nlohmann::ordered_json::object();
    for (const auto& [label, cat] : cfg.layout.categories.mapping)
        categories[label] = category_name(cat);
    nlohmann::ordered_json overlay = nlohmann::ordered_json::array();
    for (Category c : cfg.layout.overlay_categories) overlay.push_back(category_name(c));
    j["layout"] = {{"backend", cfg.layout.backend},
                   {"detections_file", cfg.layout.detections_file},
                   {"categories", categories},
                   {"xycut",
                    {{"valley_ink_fraction", cfg.layout.xycut.valley_ink_fraction},
                     {"valley_min_thickness", cfg.layout.xycut.valley_min_thickness},
                     {"min_region_side", cfg.layout.xycut.min_region_side},
                     {"drop_ink_fraction", cfg.layout.xycut.drop_ink_fraction},
                     {"title_min_width_frac", cfg.layout.xycut.title_min_width_frac},
                     {"title_max_height_frac", cfg.layout.xycut.title_max_height_frac},
                     {"title_top_frac", cfg.layout.xycut.title_top_frac},
                     {"figure_ink_fraction", cfg.layout.xycut.figure_ink_fraction}}},
                   {"overlay_categories", overlay}};
    j["style"] = {{"box_color",
                   {cfg.style.box_color.r, cfg.style.box_color.g,
                    cfg.style.box_color.b, cfg.style.box_color.a}},
                  {"stroke_px", cfg.style.stroke_px},
                  {"label_scale", cfg.style.label_scale},
                  {"overlay_alpha", cfg.style.overlay_alpha}};
    nlohmann::ordered_json palette = nlohmann::ordered_json::object();
    for (Category c : kAllCategories) {
        const Rgb v = cfg.palette.lookup(c);
        palette[category_name(c)] = {v.r, v.g, v.b};
    }
    j["palette"] = std::move(palette);
    j["templates"] = {{"web_question", cfg.templates.web_question},
                      {"web_answer", cfg.templates.web_answer},
                      {"layout_inventory_question", cfg.templates.layout_inventory_question},
                      {"layout_inventory_item", cfg.templates.layout_inventory_item},
                      {"layout_count_question", cfg.templates.layout_count_question},
                      {"layout_count_answer", cfg.templates.layout_count_answer},
                      {"cot_question_1", cfg.templates.cot_question_1},
                      {"cot_question_2", cfg.templates.cot_question_2},
                      {"cot_system_1", cfg.templates.cot_system_1},
                      {"cot_user_1", cfg.templates.cot_user_1},
                      {"cot_system_2", cfg.templates.cot_system_2},
                      {"cot_user_2", cfg.templates.cot_user_2}};
    j["tiler"] = {{"encoder_size", cfg.tiler.encoder_size},
                  {"grid_h", cfg.tiler.grid_h},
                  {"grid_w", cfg.tiler.grid_w},
                  {"dim", cfg.tiler.dim},
                  {"aggregate", cfg.tiler.aggregate}};
    j["llm"] = {{"mode", cfg.llm.mode}, {"endpoint", cfg.llm.endpoint}};
    return j.dump(2);
}

}  // namespace visprompt
