#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace sentinel {

/// Axis-aligned box in normalized image coordinates, corners in [0,1].
struct BBox {
    double x_min = 0.0;
    double y_min = 0.0;
    double x_max = 0.0;
    double y_max = 0.0;

    BBox() = default;
    BBox(double x_min, double y_min, double x_max, double y_max);

    double area() const { return (x_max - x_min) * (y_max - y_min); }
    double center_x() const { return (x_min + x_max) / 2.0; }
    double center_y() const { return (y_min + y_max) / 2.0; }
};

struct Detection {
    BBox bbox;
    int class_id = 0;
    std::string class_name;
    double confidence = 0.0;  // in [0,1]
    double score = 0.0;       // confidence * class probability
};

/// Raw single-stage prediction grid: S x S cells, B boxes per cell, C shared
/// class probabilities per cell. Per cell the layout is B * (x, y, w, h,
/// confidence) followed by the C class probabilities; cells are row-major.
/// x,y are within-cell offsets, w,h are fractions of the whole image.
struct GridPrediction {
    std::size_t S = 1;
    std::size_t B = 1;
    std::size_t C = 1;
    std::vector<double> values;
    std::vector<std::string> class_names;  // optional; size C when present

    GridPrediction() = default;
    GridPrediction(std::size_t S, std::size_t B, std::size_t C, std::vector<double> values,
                   std::vector<std::string> class_names = {});

    std::size_t cell_stride() const { return B * 5 + C; }
    /// k in 0..4 selects x, y, w, h, confidence of box b in cell (row, col).
    double box_value(std::size_t row, std::size_t col, std::size_t b, std::size_t k) const;
    double class_prob(std::size_t row, std::size_t col, std::size_t k) const;
};

/// Intersection area over union area; 0 when the union is degenerate.
double iou(const BBox& a, const BBox& b);

/// Decode every cell/box into corner-form detections clamped to [0,1],
/// keeping only those with confidence >= conf_threshold. The cell's class is
/// the argmax class probability (lowest index on ties) and the score is
/// confidence * that probability.
std::vector<Detection> decode_grid(const GridPrediction& pred, double conf_threshold);

/// Greedy per-class non-maximum suppression: boxes are visited in descending
/// score order (ties by lower class id, then input order) and a box is
/// dropped when a kept box of the same class overlaps it with IoU >
/// iou_threshold. Output is in descending score order.
std::vector<Detection> nms(std::vector<Detection> detections, double iou_threshold);

/// Prediction file: one JSON document {"S":..,"B":..,"C":..,"values":[..]}
/// with an optional "class_names" array.
GridPrediction parse_grid_prediction(std::string_view json_text);

/// One detection as a JSONL object:
/// {frame, class_id, class_name, score, confidence, bbox:[x_min,y_min,x_max,y_max]}.
std::string detection_jsonl_line(std::size_t frame, const Detection& det);

/// Inverse of detection_jsonl_line; fills *frame_out when given.
Detection parse_detection_line(std::string_view json_line, std::size_t* frame_out = nullptr);

}  // namespace sentinel
