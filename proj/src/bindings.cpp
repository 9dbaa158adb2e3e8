#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "sentinel/classifier.hpp"
#include "sentinel/detector.hpp"
#include "sentinel/heatmap.hpp"
#include "sentinel/imaging.hpp"
#include "sentinel/pipeline.hpp"
#include "sentinel/tensor.hpp"

namespace py = pybind11;
using namespace sentinel;

PYBIND11_MODULE(_core, m) {
    m.doc() = "surveillance analytics core: CNN inference, grid decoding, heatmaps, alert rules";

    py::class_<Tensor>(m, "Tensor")
        .def(py::init<std::size_t, std::size_t, std::size_t>(), py::arg("height"),
             py::arg("width"), py::arg("channels"))
        .def(py::init<std::size_t, std::size_t, std::size_t, std::vector<double>>(),
             py::arg("height"), py::arg("width"), py::arg("channels"), py::arg("values"))
        .def_readonly("height", &Tensor::height)
        .def_readonly("width", &Tensor::width)
        .def_readonly("channels", &Tensor::channels)
        .def_readonly("data", &Tensor::data)
        .def("at", py::overload_cast<std::size_t, std::size_t, std::size_t>(&Tensor::at,
                                                                            py::const_))
        .def("__len__", &Tensor::size);

    py::class_<Kernel>(m, "Kernel")
        .def(py::init<std::size_t, std::size_t, std::size_t, std::size_t, std::vector<double>,
                      std::vector<double>>(),
             py::arg("kh"), py::arg("kw"), py::arg("in_channels"), py::arg("out_channels"),
             py::arg("weights"), py::arg("bias"))
        .def_readonly("kh", &Kernel::kh)
        .def_readonly("kw", &Kernel::kw)
        .def_readonly("in_channels", &Kernel::in_channels)
        .def_readonly("out_channels", &Kernel::out_channels);

    py::class_<Matrix>(m, "Matrix")
        .def(py::init<std::size_t, std::size_t, std::vector<double>>(), py::arg("rows"),
             py::arg("cols"), py::arg("values"))
        .def_readonly("rows", &Matrix::rows)
        .def_readonly("cols", &Matrix::cols)
        .def_readonly("values", &Matrix::values);

    m.def("conv2d", &conv2d, py::arg("input"), py::arg("kernel"), py::arg("stride") = 1);
    m.def("maxpool2d", &maxpool2d, py::arg("input"), py::arg("ph"), py::arg("pw"));
    m.def("flatten", &flatten, py::arg("input"));
    m.def("dense", &dense, py::arg("input"), py::arg("weights"), py::arg("bias"));
    m.def("relu", &relu, py::arg("input"));
    m.def("softmax", &softmax, py::arg("input"));
    m.def("dense_weight_count", &dense_weight_count, py::arg("inputs"), py::arg("outputs"));

    py::class_<Frame>(m, "Frame")
        .def(py::init<std::size_t, std::size_t, std::size_t, std::vector<double>>(),
             py::arg("width"), py::arg("height"), py::arg("channels"), py::arg("pixels"))
        .def_readonly("width", &Frame::width)
        .def_readonly("height", &Frame::height)
        .def_readonly("channels", &Frame::channels)
        .def_readonly("pixels", &Frame::pixels)
        .def_readwrite("index", &Frame::index)
        .def_readwrite("label", &Frame::label)
        .def("at", &Frame::at, py::arg("row"), py::arg("col"), py::arg("ch"));

    m.def(
        "parse_netpbm",
        [](py::bytes data) { return parse_netpbm(std::string_view(std::string(data))); },
        py::arg("data"));
    m.def(
        "encode_ppm",
        [](const Frame& frame) {
            const auto bytes = encode_ppm(frame);
            return py::bytes(reinterpret_cast<const char*>(bytes.data()), bytes.size());
        },
        py::arg("frame"));
    m.def("to_tensor", &to_tensor, py::arg("frame"), py::arg("target_h"), py::arg("target_w"));

    py::class_<ModelSpec>(m, "ModelSpec")
        .def_readonly("name", &ModelSpec::name)
        .def_readonly("input_h", &ModelSpec::input_h)
        .def_readonly("input_w", &ModelSpec::input_w)
        .def_readonly("input_c", &ModelSpec::input_c)
        .def_readonly("class_labels", &ModelSpec::class_labels)
        .def("parameter_count", &ModelSpec::parameter_count)
        .def("has_weights", &ModelSpec::has_weights);

    m.def(
        "load_model",
        [](const std::string& manifest_json, py::bytes blob) {
            const std::string raw(blob);
            return load_model(manifest_json,
                              std::span(reinterpret_cast<const std::uint8_t*>(raw.data()),
                                        raw.size()));
        },
        py::arg("manifest_json"), py::arg("weight_blob"));
    m.def("load_model_file", &load_model_file, py::arg("manifest_path"));
    m.def("serialize_manifest", &serialize_manifest, py::arg("model"));
    m.def(
        "serialize_weights",
        [](const ModelSpec& model) {
            const auto blob = serialize_weights(model);
            return py::bytes(reinterpret_cast<const char*>(blob.data()), blob.size());
        },
        py::arg("model"));
    m.def("forward", &forward, py::arg("model"), py::arg("input"));
    m.def("intensity_model", &intensity_model, py::arg("input_h") = 4, py::arg("input_w") = 4);

    py::class_<FrameVerdict>(m, "FrameVerdict")
        .def_readonly("frame", &FrameVerdict::frame)
        .def_readonly("probabilities", &FrameVerdict::probabilities)
        .def_readonly("predicted_label", &FrameVerdict::predicted_label)
        .def_readonly("crime_probability", &FrameVerdict::crime_probability);

    m.def("classify_frame", &classify_frame, py::arg("model"), py::arg("frame"));

    py::class_<AlarmAggregator>(m, "AlarmAggregator")
        .def(py::init<std::size_t, std::size_t>(), py::arg("window"), py::arg("trigger"))
        .def("observe", &AlarmAggregator::observe, py::arg("crime_flag"))
        .def_property_readonly("window", &AlarmAggregator::window)
        .def_property_readonly("trigger", &AlarmAggregator::trigger)
        .def_property_readonly("flags_set", &AlarmAggregator::flags_set);

    py::class_<BBox>(m, "BBox")
        .def(py::init<double, double, double, double>(), py::arg("x_min"), py::arg("y_min"),
             py::arg("x_max"), py::arg("y_max"))
        .def_readonly("x_min", &BBox::x_min)
        .def_readonly("y_min", &BBox::y_min)
        .def_readonly("x_max", &BBox::x_max)
        .def_readonly("y_max", &BBox::y_max)
        .def("area", &BBox::area)
        .def("center_x", &BBox::center_x)
        .def("center_y", &BBox::center_y);

    py::class_<Detection>(m, "Detection")
        .def(py::init<>())
        .def_readwrite("bbox", &Detection::bbox)
        .def_readwrite("class_id", &Detection::class_id)
        .def_readwrite("class_name", &Detection::class_name)
        .def_readwrite("confidence", &Detection::confidence)
        .def_readwrite("score", &Detection::score);

    py::class_<GridPrediction>(m, "GridPrediction")
        .def(py::init<std::size_t, std::size_t, std::size_t, std::vector<double>,
                      std::vector<std::string>>(),
             py::arg("S"), py::arg("B"), py::arg("C"), py::arg("values"),
             py::arg("class_names") = std::vector<std::string>{})
        .def_readonly("S", &GridPrediction::S)
        .def_readonly("B", &GridPrediction::B)
        .def_readonly("C", &GridPrediction::C)
        .def_readonly("values", &GridPrediction::values)
        .def_readonly("class_names", &GridPrediction::class_names);

    m.def("iou", &iou, py::arg("a"), py::arg("b"));
    m.def("decode_grid", &decode_grid, py::arg("prediction"), py::arg("conf_threshold"));
    m.def("nms", &nms, py::arg("detections"), py::arg("iou_threshold"));
    m.def(
        "parse_grid_prediction",
        [](const std::string& text) { return parse_grid_prediction(text); }, py::arg("json_text"));

    py::class_<HeatmapGrid>(m, "HeatmapGrid")
        .def(py::init<std::size_t>(), py::arg("side") = 32)
        .def_readonly("side", &HeatmapGrid::side)
        .def_readonly("bins", &HeatmapGrid::bins)
        .def_readonly("frames_seen", &HeatmapGrid::frames_seen)
        .def("bin", py::overload_cast<std::size_t, std::size_t>(&HeatmapGrid::bin, py::const_),
             py::arg("row"), py::arg("col"))
        .def("total", &HeatmapGrid::total);

    m.def("accumulate", &accumulate, py::arg("grid"), py::arg("detections"));
    m.def("merge", &merge, py::arg("a"), py::arg("b"));
    m.def("normalize", &normalize, py::arg("grid"));
    m.def("heat_color", &heat_color, py::arg("intensity"));
    m.def(
        "render_ppm",
        [](const HeatmapGrid& grid, std::size_t cell_px) {
            const auto bytes = render_ppm(grid, cell_px);
            return py::bytes(reinterpret_cast<const char*>(bytes.data()), bytes.size());
        },
        py::arg("grid"), py::arg("cell_px") = 8);
    m.def(
        "grid_to_json", [](const HeatmapGrid& grid) { return grid_to_json(grid); },
        py::arg("grid"));
    m.def(
        "grid_from_json", [](const std::string& text) { return grid_from_json(text); },
        py::arg("json_text"));
}
