#include "sentinel/detector.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <json.hpp>

namespace sentinel {

namespace {

using nlohmann::json;

void require_finite_unit(double v, const char* what) {
    if (!std::isfinite(v) || v < 0.0 || v > 1.0) {
        throw std::invalid_argument(std::string(what) + " must lie in [0,1]");
    }
}

}  // namespace

BBox::BBox(double x_min, double y_min, double x_max, double y_max)
    : x_min(x_min), y_min(y_min), x_max(x_max), y_max(y_max) {
    if (!std::isfinite(x_min) || !std::isfinite(y_min) || !std::isfinite(x_max) ||
        !std::isfinite(y_max)) {
        throw std::invalid_argument("BBox: corners must be finite");
    }
    if (x_max < x_min || y_max < y_min) {
        throw std::invalid_argument("BBox: max corner must not precede min corner");
    }
}

GridPrediction::GridPrediction(std::size_t S, std::size_t B, std::size_t C,
                               std::vector<double> values, std::vector<std::string> class_names)
    : S(S), B(B), C(C), values(std::move(values)), class_names(std::move(class_names)) {
    if (S == 0 || B == 0 || C == 0) {
        throw std::invalid_argument("GridPrediction: S, B and C must be positive");
    }
    const std::size_t expected = S * S * cell_stride();
    if (this->values.size() != expected) {
        throw std::invalid_argument("GridPrediction: expected " + std::to_string(expected) +
                                    " values for S=" + std::to_string(S) +
                                    " B=" + std::to_string(B) + " C=" + std::to_string(C) +
                                    ", got " + std::to_string(this->values.size()));
    }
    if (!this->class_names.empty() && this->class_names.size() != C) {
        throw std::invalid_argument("GridPrediction: class_names must have exactly C entries");
    }
    for (std::size_t row = 0; row < S; ++row) {
        for (std::size_t col = 0; col < S; ++col) {
            for (std::size_t b = 0; b < B; ++b) {
                for (std::size_t k = 0; k < 2; ++k) {
                    require_finite_unit(box_value(row, col, b, k), "GridPrediction: box offset");
                }
                for (std::size_t k = 2; k < 4; ++k) {
                    const double v = box_value(row, col, b, k);
                    if (!std::isfinite(v) || v < 0.0) {
                        throw std::invalid_argument(
                            "GridPrediction: box extents must be non-negative");
                    }
                }
                require_finite_unit(box_value(row, col, b, 4), "GridPrediction: confidence");
            }
            for (std::size_t k = 0; k < C; ++k) {
                require_finite_unit(class_prob(row, col, k), "GridPrediction: class probability");
            }
        }
    }
}

double GridPrediction::box_value(std::size_t row, std::size_t col, std::size_t b,
                                 std::size_t k) const {
    return values[(row * S + col) * cell_stride() + b * 5 + k];
}

double GridPrediction::class_prob(std::size_t row, std::size_t col, std::size_t k) const {
    return values[(row * S + col) * cell_stride() + B * 5 + k];
}

double iou(const BBox& a, const BBox& b) {
    const double ix_min = std::max(a.x_min, b.x_min);
    const double iy_min = std::max(a.y_min, b.y_min);
    const double ix_max = std::min(a.x_max, b.x_max);
    const double iy_max = std::min(a.y_max, b.y_max);

    const double iw = ix_max - ix_min;
    const double ih = iy_max - iy_min;
    if (iw <= 0.0 || ih <= 0.0) {
        return 0.0;
    }
    const double intersection = iw * ih;
    const double union_area = a.area() + b.area() - intersection;
    if (union_area <= 0.0) {
        return 0.0;
    }
    return intersection / union_area;
}

std::vector<Detection> decode_grid(const GridPrediction& pred, double conf_threshold) {
    if (!(conf_threshold >= 0.0 && conf_threshold <= 1.0)) {
        throw std::invalid_argument("decode_grid: conf_threshold must lie in [0,1]");
    }
    const double S = static_cast<double>(pred.S);

    std::vector<Detection> out;
    for (std::size_t row = 0; row < pred.S; ++row) {
        for (std::size_t col = 0; col < pred.S; ++col) {
            std::size_t best = 0;
            for (std::size_t k = 1; k < pred.C; ++k) {
                if (pred.class_prob(row, col, k) > pred.class_prob(row, col, best)) {
                    best = k;
                }
            }
            const double class_p = pred.class_prob(row, col, best);

            for (std::size_t b = 0; b < pred.B; ++b) {
                const double conf = pred.box_value(row, col, b, 4);
                if (conf < conf_threshold) continue;

                const double cx = (static_cast<double>(col) + pred.box_value(row, col, b, 0)) / S;
                const double cy = (static_cast<double>(row) + pred.box_value(row, col, b, 1)) / S;
                const double w = pred.box_value(row, col, b, 2);
                const double h = pred.box_value(row, col, b, 3);

                Detection det;
                det.bbox = BBox(std::clamp(cx - w / 2.0, 0.0, 1.0),
                                std::clamp(cy - h / 2.0, 0.0, 1.0),
                                std::clamp(cx + w / 2.0, 0.0, 1.0),
                                std::clamp(cy + h / 2.0, 0.0, 1.0));
                det.class_id = static_cast<int>(best);
                det.class_name = best < pred.class_names.size() ? pred.class_names[best]
                                                                : std::to_string(best);
                det.confidence = conf;
                det.score = conf * class_p;
                out.push_back(std::move(det));
            }
        }
    }
    return out;
}

std::vector<Detection> nms(std::vector<Detection> detections, double iou_threshold) {
    if (!(iou_threshold >= 0.0 && iou_threshold <= 1.0)) {
        throw std::invalid_argument("nms: iou_threshold must lie in [0,1]");
    }
    std::stable_sort(detections.begin(), detections.end(),
                     [](const Detection& a, const Detection& b) {
                         if (a.score != b.score) return a.score > b.score;
                         return a.class_id < b.class_id;
                     });

    std::vector<Detection> kept;
    for (const Detection& candidate : detections) {
        bool suppressed = false;
        for (const Detection& keeper : kept) {
            if (keeper.class_id == candidate.class_id &&
                iou(keeper.bbox, candidate.bbox) > iou_threshold) {
                suppressed = true;
                break;
            }
        }
        if (!suppressed) {
            kept.push_back(candidate);
        }
    }
    return kept;
}

GridPrediction parse_grid_prediction(std::string_view json_text) {
    json doc;
    try {
        doc = json::parse(json_text);
    } catch (const json::exception& e) {
        throw std::runtime_error(std::string("prediction grid: malformed JSON: ") + e.what());
    }
    if (!doc.is_object() || !doc.contains("S") || !doc.contains("B") || !doc.contains("C") ||
        !doc.contains("values") || !doc["S"].is_number_unsigned() ||
        !doc["B"].is_number_unsigned() || !doc["C"].is_number_unsigned() ||
        !doc["values"].is_array()) {
        throw std::runtime_error(
            "prediction grid: document must carry integer S, B, C and an array 'values'");
    }
    std::vector<double> values;
    values.reserve(doc["values"].size());
    for (const auto& v : doc["values"]) {
        if (!v.is_number()) {
            throw std::runtime_error("prediction grid: 'values' must contain only numbers");
        }
        values.push_back(v.get<double>());
    }
    std::vector<std::string> class_names;
    if (doc.contains("class_names")) {
        if (!doc["class_names"].is_array()) {
            throw std::runtime_error("prediction grid: 'class_names' must be an array");
        }
        for (const auto& v : doc["class_names"]) {
            if (!v.is_string()) {
                throw std::runtime_error("prediction grid: class names must be strings");
            }
            class_names.push_back(v.get<std::string>());
        }
    }
    try {
        return GridPrediction(doc["S"].get<std::size_t>(), doc["B"].get<std::size_t>(),
                              doc["C"].get<std::size_t>(), std::move(values),
                              std::move(class_names));
    } catch (const std::invalid_argument& e) {
        throw std::runtime_error(std::string("prediction grid: ") + e.what());
    }
}

std::string detection_jsonl_line(std::size_t frame, const Detection& det) {
    const json doc{{"frame", frame},
                   {"class_id", det.class_id},
                   {"class_name", det.class_name},
                   {"score", det.score},
                   {"confidence", det.confidence},
                   {"bbox", {det.bbox.x_min, det.bbox.y_min, det.bbox.x_max, det.bbox.y_max}}};
    return doc.dump();
}

Detection parse_detection_line(std::string_view json_line, std::size_t* frame_out) {
    json doc;
    try {
        doc = json::parse(json_line);
    } catch (const json::exception& e) {
        throw std::runtime_error(std::string("detection line: malformed JSON: ") + e.what());
    }
    if (!doc.is_object() || !doc.contains("bbox") || !doc["bbox"].is_array() ||
        doc["bbox"].size() != 4 || !doc.contains("class_id") || !doc.contains("score") ||
        !doc.contains("confidence")) {
        throw std::runtime_error("detection line: missing bbox, class_id, score or confidence");
    }
    Detection det;
    det.bbox = BBox(doc["bbox"][0].get<double>(), doc["bbox"][1].get<double>(),
                    doc["bbox"][2].get<double>(), doc["bbox"][3].get<double>());
    det.class_id = doc["class_id"].get<int>();
    det.class_name = doc.value("class_name", std::string());
    det.score = doc["score"].get<double>();
    det.confidence = doc["confidence"].get<double>();
    if (frame_out) {
        *frame_out = doc.value("frame", std::size_t{0});
    }
    return det;
}

}  // namespace sentinel
