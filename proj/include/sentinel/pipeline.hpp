#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>

#include "sentinel/alerting.hpp"

namespace sentinel {

struct AlertConfig {
    std::string endpoint;  // empty disables dispatch
    DispatchPolicy policy;
};

/// Full configuration of a monitoring run. Loaded from a JSON document; every
/// field has a default and the CLI can override fields individually.
struct RunConfig {
    std::filesystem::path frames_dir;
    std::string frame_pattern = "*.p?m";
    std::filesystem::path classifier_model;
    std::filesystem::path detector_model;  // optional: directory of grid-prediction JSON files
    double fps = 10.0;
    double frame_threshold = 0.5;
    std::size_t window = 5;
    std::size_t trigger = 3;
    double conf_threshold = 0.25;
    double iou_threshold = 0.5;
    std::size_t heatmap_grid = 32;
    std::size_t heatmap_cell_px = 8;
    AlertConfig alert;
    std::filesystem::path event_log = "events.jsonl";
    std::filesystem::path heatmap_out = "heatmap.ppm";

    void validate() const;  // throws on out-of-range fields
};

RunConfig parse_config(std::string_view json_text);
RunConfig load_config(const std::filesystem::path& path);

/// Exit codes shared by all commands: 0 = clean (no alarm), 2 = at least one
/// alarm fired, 1 = operational error.
inline constexpr int kExitClean = 0;
inline constexpr int kExitError = 1;
inline constexpr int kExitAlarm = 2;

/// Report per-layer shapes and the dense weight count per dense layer plus
/// the total. Works from the manifest alone, so parameter arithmetic for
/// models too large to bundle weights for stays reproducible.
int cmd_model_info(const std::filesystem::path& model_path, std::ostream& out,
                   std::ostream& err);

/// One JSONL verdict per frame on `out`: {"frame":..,"label":..,"probabilities":[..]}.
int cmd_classify(const RunConfig& cfg, std::ostream& out, std::ostream& err);

/// Decode + NMS every prediction file in the detector_model directory
/// (lexicographic order = frame order); detections as JSONL on `out`.
int cmd_detect(const RunConfig& cfg, std::ostream& out, std::ostream& err);

/// Accumulate a detections JSONL file into a heatmap; writes heatmap_out and
/// the grid state JSON next to it (extension ".json").
int cmd_heatmap(const std::filesystem::path& detections_jsonl, const RunConfig& cfg,
                std::ostream& err);

/// End-to-end run: classify every frame, optionally decode detections and
/// accumulate the heatmap, dispatch debounced alerts, append the event log,
/// write the heatmap, and print a summary {"frames","alarms","alerts_delivered"}.
int cmd_run(const RunConfig& cfg, const std::string& token, std::ostream& out,
            std::ostream& err);

}  // namespace sentinel
