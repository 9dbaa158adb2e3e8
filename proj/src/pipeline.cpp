#include "sentinel/pipeline.hpp"

#include <algorithm>
#include <functional>
#include <map>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "sentinel/classifier.hpp"
#include "sentinel/detector.hpp"
#include "sentinel/heatmap.hpp"
#include "sentinel/imaging.hpp"
#include "file_util.hpp"

namespace sentinel {

namespace {

using nlohmann::json;

void check_range(bool ok, const char* what) {
    if (!ok) {
        throw std::invalid_argument(std::string("config: ") + what);
    }
}

/// Prediction files for the frames, lexicographic order = frame order.
std::vector<std::filesystem::path> prediction_files(const std::filesystem::path& dir) {
    std::vector<std::filesystem::path> files;
    for (const auto& entry : std::filesystem::directory_iterator(dir)) {
        if (entry.is_regular_file() && entry.path().extension() == ".json") {
            files.push_back(entry.path());
        }
    }
    std::sort(files.begin(), files.end(),
              [](const auto& a, const auto& b) { return a.generic_string() < b.generic_string(); });
    return files;
}

std::vector<Detection> detections_for(const std::filesystem::path& prediction_path,
                                      const RunConfig& cfg) {
    const GridPrediction pred =
        parse_grid_prediction(detail::read_file_bytes(prediction_path));
    return nms(decode_grid(pred, cfg.conf_threshold), cfg.iou_threshold);
}

std::string verdict_jsonl_line(const FrameVerdict& verdict) {
    const json doc{{"frame", verdict.frame},
                   {"label", verdict.predicted_label},
                   {"probabilities", verdict.probabilities}};
    return doc.dump();
}

int fail(std::ostream& err, const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitError;
}

}  // namespace

void RunConfig::validate() const {
    check_range(fps > 0.0, "fps must be positive");
    check_range(frame_threshold >= 0.0 && frame_threshold <= 1.0,
                "frame_threshold must lie in [0,1]");
    check_range(window >= 1, "window must be at least 1");
    check_range(trigger >= 1 && trigger <= window, "requires 1 <= trigger <= window");
    check_range(conf_threshold >= 0.0 && conf_threshold <= 1.0,
                "conf_threshold must lie in [0,1]");
    check_range(iou_threshold >= 0.0 && iou_threshold <= 1.0, "iou_threshold must lie in [0,1]");
    check_range(heatmap_grid >= 1, "heatmap_grid must be at least 1");
    check_range(heatmap_cell_px >= 1, "heatmap_cell_px must be at least 1");
    check_range(alert.policy.cooldown_s >= 0.0, "cooldown_s must be non-negative");
    check_range(alert.policy.max_retries >= 0, "max_retries must be non-negative");
    check_range(alert.policy.backoff_base_s >= 0.0, "backoff_base_s must be non-negative");
}

RunConfig parse_config(std::string_view json_text) {
    json doc;
    try {
        doc = json::parse(json_text);
    } catch (const json::exception& e) {
        throw std::runtime_error(std::string("config: malformed JSON: ") + e.what());
    }
    if (!doc.is_object()) {
        throw std::runtime_error("config: document must be a JSON object");
    }

    RunConfig cfg;
    std::map<std::string, std::function<void(const json&)>> fields{
        {"frames_dir", [&](const json& v) { cfg.frames_dir = v.get<std::string>(); }},
        {"frame_pattern", [&](const json& v) { cfg.frame_pattern = v.get<std::string>(); }},
        {"classifier_model", [&](const json& v) { cfg.classifier_model = v.get<std::string>(); }},
        {"detector_model", [&](const json& v) { cfg.detector_model = v.get<std::string>(); }},
        {"fps", [&](const json& v) { cfg.fps = v.get<double>(); }},
        {"frame_threshold", [&](const json& v) { cfg.frame_threshold = v.get<double>(); }},
        {"window", [&](const json& v) { cfg.window = v.get<std::size_t>(); }},
        {"trigger", [&](const json& v) { cfg.trigger = v.get<std::size_t>(); }},
        {"conf_threshold", [&](const json& v) { cfg.conf_threshold = v.get<double>(); }},
        {"iou_threshold", [&](const json& v) { cfg.iou_threshold = v.get<double>(); }},
        {"heatmap_grid", [&](const json& v) { cfg.heatmap_grid = v.get<std::size_t>(); }},
        {"heatmap_cell_px", [&](const json& v) { cfg.heatmap_cell_px = v.get<std::size_t>(); }},
        {"alert_endpoint", [&](const json& v) { cfg.alert.endpoint = v.get<std::string>(); }},
        {"cooldown_s", [&](const json& v) { cfg.alert.policy.cooldown_s = v.get<double>(); }},
        {"max_retries", [&](const json& v) { cfg.alert.policy.max_retries = v.get<int>(); }},
        {"backoff_base_s",
         [&](const json& v) { cfg.alert.policy.backoff_base_s = v.get<double>(); }},
        {"event_log", [&](const json& v) { cfg.event_log = v.get<std::string>(); }},
        {"heatmap_out", [&](const json& v) { cfg.heatmap_out = v.get<std::string>(); }},
    };

    for (const auto& [key, value] : doc.items()) {
        const auto it = fields.find(key);
        if (it == fields.end()) {
            throw std::runtime_error("config: unknown field '" + key + "'");
        }
        try {
            it->second(value);
        } catch (const json::exception&) {
            throw std::runtime_error("config: field '" + key + "' has the wrong type");
        }
    }
    cfg.validate();
    return cfg;
}

RunConfig load_config(const std::filesystem::path& path) {
    return parse_config(detail::read_file_bytes(path));
}

int cmd_model_info(const std::filesystem::path& model_path, std::ostream& out,
                   std::ostream& err) {
    try {
        const Manifest m = parse_manifest(detail::read_file_bytes(model_path));
        const std::vector<StageShape> shapes = shape_chain(m.spec);

        auto shape_str = [](const StageShape& s) {
            if (s.flat) {
                return "[" + std::to_string(s.len) + "]";
            }
            return std::to_string(s.h) + "x" + std::to_string(s.w) + "x" + std::to_string(s.c);
        };

        out << "model: " << m.spec.name << '\n';
        out << "input: " << shape_str(shapes.front()) << '\n';
        std::uint64_t dense_weights = 0;
        for (std::size_t i = 0; i < m.spec.layers.size(); ++i) {
            const LayerSpec& layer = m.spec.layers[i];
            out << "layer " << i << ": " << layer_kind_name(layer.kind) << " -> "
                << shape_str(shapes[i + 1]);
            if (layer.kind == LayerKind::dense) {
                const std::uint64_t w = dense_weight_count(layer.in_dim, layer.out_dim);
                dense_weights += w;
                out << "  weights=" << w;
            }
            out << '\n';
        }
        out << "dense weights: " << dense_weights << '\n';
        out << "parameters: " << m.spec.parameter_count() << '\n';
        out << "weights bundled: " << (m.has_checksum ? "yes" : "no") << '\n';
        return kExitClean;
    } catch (const std::exception& e) {
        return fail(err, e);
    }
}

int cmd_classify(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
    try {
        cfg.validate();
        const ModelSpec model = load_model_file(cfg.classifier_model);
        FrameSource source = open_sequence(cfg.frames_dir, cfg.frame_pattern);
        AlarmAggregator agg(cfg.window, cfg.trigger);
        bool alarmed = false;
        while (auto frame = source.next()) {
            const FrameVerdict verdict = classify_frame(model, *frame);
            out << verdict_jsonl_line(verdict) << '\n';
            alarmed = aggregate(agg, verdict, cfg.frame_threshold) || alarmed;
        }
        return alarmed ? kExitAlarm : kExitClean;
    } catch (const std::exception& e) {
        return fail(err, e);
    }
}

int cmd_detect(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
    try {
        cfg.validate();
        const auto files = prediction_files(cfg.detector_model);
        for (std::size_t frame = 0; frame < files.size(); ++frame) {
            for (const Detection& det : detections_for(files[frame], cfg)) {
                out << detection_jsonl_line(frame, det) << '\n';
            }
        }
        return kExitClean;
    } catch (const std::exception& e) {
        return fail(err, e);
    }
}

int cmd_heatmap(const std::filesystem::path& detections_jsonl, const RunConfig& cfg,
                std::ostream& err) {
    try {
        cfg.validate();
        // Group the flat JSONL stream back into per-frame detection lists.
        std::map<std::size_t, std::vector<Detection>> by_frame;
        std::istringstream lines(detail::read_file_bytes(detections_jsonl));
        std::string line;
        for (std::size_t line_no = 1; std::getline(lines, line); ++line_no) {
            if (line.empty()) continue;
            std::size_t frame = 0;
            try {
                Detection det = parse_detection_line(line, &frame);
                by_frame[frame].push_back(std::move(det));
            } catch (const std::exception& e) {
                throw std::runtime_error(detections_jsonl.string() + " line " +
                                         std::to_string(line_no) + ": " + e.what());
            }
        }

        HeatmapGrid grid(cfg.heatmap_grid);
        for (const auto& [frame, dets] : by_frame) {
            accumulate(grid, dets);
        }

        const auto ppm = render_ppm(grid, cfg.heatmap_cell_px);
        detail::write_file_bytes(cfg.heatmap_out, ppm.data(), ppm.size());

        std::filesystem::path state_path = cfg.heatmap_out;
        state_path.replace_extension(".json");
        const std::string state = grid_to_json(grid);
        detail::write_file_bytes(state_path, state.data(), state.size());
        return kExitClean;
    } catch (const std::exception& e) {
        return fail(err, e);
    }
}

int cmd_run(const RunConfig& cfg, const std::string& token, std::ostream& out,
            std::ostream& err) {
    try {
        cfg.validate();
        const ModelSpec model = load_model_file(cfg.classifier_model);

        std::vector<std::filesystem::path> predictions;
        if (!cfg.detector_model.empty()) {
            predictions = prediction_files(cfg.detector_model);
        }

        FrameSource source = open_sequence(cfg.frames_dir, cfg.frame_pattern);
        AlarmAggregator agg(cfg.window, cfg.trigger);
        CooldownGate gate;
        HeatmapGrid grid(cfg.heatmap_grid);

        std::size_t frames = 0;
        std::size_t alarms = 0;
        std::size_t delivered = 0;
        while (auto frame = source.next()) {
            const FrameVerdict verdict = classify_frame(model, *frame);
            const double ts = static_cast<double>(verdict.frame) / cfg.fps;
            ++frames;

            if (frame->index < predictions.size()) {
                accumulate(grid, detections_for(predictions[frame->index], cfg));
            } else {
                accumulate(grid, {});
            }

            if (aggregate(agg, verdict, cfg.frame_threshold)) {
                ++alarms;
                if (!cfg.alert.endpoint.empty() && gate.allow(ts, cfg.alert.policy)) {
                    AlertEvent event;
                    event.ts = ts;
                    event.frame = verdict.frame;
                    event.probability = verdict.crime_probability;
                    event.message = format_message(event);
                    const DispatchResult result =
                        dispatch(event, cfg.alert.endpoint, token, cfg.alert.policy);
                    if (result.delivered) ++delivered;
                    append_event(cfg.event_log, event, result);
                }
            }
        }

        const auto ppm = render_ppm(grid, cfg.heatmap_cell_px);
        detail::write_file_bytes(cfg.heatmap_out, ppm.data(), ppm.size());

        const json summary{
            {"frames", frames}, {"alarms", alarms}, {"alerts_delivered", delivered}};
        out << summary.dump() << '\n';
        return alarms > 0 ? kExitAlarm : kExitClean;
    } catch (const std::exception& e) {
        return fail(err, e);
    }
}

}  // namespace sentinel
