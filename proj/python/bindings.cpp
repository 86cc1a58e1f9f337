#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "visprompt/config.hpp"
#include "visprompt/dataset_io.hpp"
#include "visprompt/imgproc.hpp"
#include "visprompt/pipeline.hpp"
#include "visprompt/prompt_render.hpp"
#include "visprompt/qa.hpp"
#include "visprompt/synth.hpp"
#include "visprompt/tiler.hpp"

namespace py = pybind11;
using namespace visprompt;

namespace {

RasterImage image_from_array(const py::array_t<uint8_t>& arr) {
    const py::buffer_info info = arr.request();
    if (info.ndim != 2 && info.ndim != 3)
        throw py::value_error("expected an array of shape (h, w) or (h, w, c)");
    const int h = static_cast<int>(info.shape[0]);
    const int w = static_cast<int>(info.shape[1]);
    const int c = info.ndim == 2 ? 1 : static_cast<int>(info.shape[2]);
    if (c != 1 && c != 3 && c != 4)
        throw py::value_error("channel count must be 1, 3, or 4");

    RasterImage img = RasterImage::create(w, h, c);
    // Copy element-wise honoring strides.
    const auto* base = static_cast<const uint8_t*>(info.ptr);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x)
            for (int k = 0; k < c; ++k) {
                size_t off = static_cast<size_t>(y) * info.strides[0] +
                             static_cast<size_t>(x) * info.strides[1];
                if (info.ndim == 3) off += static_cast<size_t>(k) * info.strides[2];
                img.data[img.index(x, y, k)] = base[off];
            }
    return img;
}

py::array_t<uint8_t> image_to_array(const RasterImage& img) {
    py::array_t<uint8_t> arr(img.channels == 1
                                 ? std::vector<py::ssize_t>{img.height, img.width}
                                 : std::vector<py::ssize_t>{img.height, img.width,
                                                            img.channels});
    std::memcpy(arr.mutable_data(), img.data.data(), img.data.size());
    return arr;
}

PipelineConfig config_from_json(const std::string& config_json) {
    if (config_json.empty()) return PipelineConfig{};
    return parse_config(config_json);
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Screenshot-to-training-data toolchain";

    py::class_<Rect>(m, "Rect")
        .def(py::init<>())
        .def(py::init([](int x, int y, int w, int h) {
                 return Rect{x, y, w, h};
             }),
             py::arg("x"), py::arg("y"), py::arg("w"), py::arg("h"))
        .def_readwrite("x", &Rect::x)
        .def_readwrite("y", &Rect::y)
        .def_readwrite("w", &Rect::w)
        .def_readwrite("h", &Rect::h)
        .def("area", &Rect::area)
        .def("__repr__", [](const Rect& r) {
            return "Rect(x=" + std::to_string(r.x) + ", y=" + std::to_string(r.y) +
                   ", w=" + std::to_string(r.w) + ", h=" + std::to_string(r.h) + ")";
        });

    py::class_<ElementBox>(m, "ElementBox")
        .def(py::init<>())
        .def_readwrite("rect", &ElementBox::rect)
        .def_readwrite("label", &ElementBox::label)
        .def_readwrite("text", &ElementBox::text)
        .def_readwrite("confidence", &ElementBox::confidence);

    m.def("iou", &iou, py::arg("a"), py::arg("b"));
    m.def("clean_text", &clean_text, py::arg("raw"));
    m.def("format_bbox_ratio", &format_bbox_ratio, py::arg("rect"),
          py::arg("img_w"), py::arg("img_h"));

    m.def(
        "read_png",
        [](const std::string& path) { return image_to_array(read_png(path)); },
        py::arg("path"));
    m.def(
        "write_png",
        [](const py::array_t<uint8_t>& img, const std::string& path) {
            write_png(image_from_array(img), path);
        },
        py::arg("image"), py::arg("path"));

    m.def(
        "otsu_threshold",
        [](const py::array_t<uint8_t>& gray) {
            const RasterImage img = image_from_array(gray);
            const OtsuResult r = otsu_threshold(img);
            return py::make_tuple(r.threshold, r.degenerate);
        },
        py::arg("gray"), "Returns (threshold, degenerate)");

    m.def(
        "detect_element_boxes",
        [](const py::array_t<uint8_t>& img, const std::string& config_json) {
            return detect_element_boxes(image_from_array(img),
                                        config_from_json(config_json));
        },
        py::arg("image"), py::arg("config_json") = "");

    m.def(
        "draw_boxes",
        [](const py::array_t<uint8_t>& img, const std::vector<ElementBox>& boxes,
           const std::string& config_json) {
            return image_to_array(draw_boxes(image_from_array(img), boxes,
                                             config_from_json(config_json).style));
        },
        py::arg("image"), py::arg("boxes"), py::arg("config_json") = "");

    m.def(
        "render_page_spec",
        [](const std::string& spec_json) {
            const auto [img, sidecar] = render(parse_page_spec(spec_json));
            py::list entries;
            for (const SidecarEntry& e : sidecar) {
                py::dict d;
                d["rect"] = e.rect;
                d["text"] = e.text;
                d["kind"] = e.kind;
                entries.append(d);
            }
            return py::make_tuple(image_to_array(img), entries);
        },
        py::arg("spec_json"));

    m.def(
        "fused_token_count",
        [](const py::array_t<uint8_t>& img, int grid, int dim, uint64_t seed,
           int encoder_size) {
            const TileSet tiles =
                split_quadrants(image_from_array(img), encoder_size);
            return fuse_features(tiles, grid, grid, dim, seed).token_count();
        },
        py::arg("image"), py::arg("grid") = 32, py::arg("dim") = 8,
        py::arg("seed") = 0, py::arg("encoder_size") = 1024);

    m.def(
        "run_annotate",
        [](const std::string& input_dir, const std::string& out_dir,
           const std::string& config_json) {
            const RunResult r =
                run_annotate(input_dir, out_dir, config_from_json(config_json));
            return py::make_tuple(r.exit_code, r.records_written);
        },
        py::arg("input_dir"), py::arg("out_dir"), py::arg("config_json") = "");

    m.def(
        "run_layout",
        [](const std::string& input_dir, const std::string& out_dir,
           const std::string& config_json) {
            const RunResult r =
                run_layout(input_dir, out_dir, config_from_json(config_json));
            return py::make_tuple(r.exit_code, r.records_written);
        },
        py::arg("input_dir"), py::arg("out_dir"), py::arg("config_json") = "");

    m.def(
        "run_cot",
        [](const std::string& input_dir, const std::string& out_dir,
           const std::string& config_json) {
            const RunResult r =
                run_cot(input_dir, out_dir, config_from_json(config_json));
            return py::make_tuple(r.exit_code, r.records_written);
        },
        py::arg("input_dir"), py::arg("out_dir"), py::arg("config_json") = "");
}
