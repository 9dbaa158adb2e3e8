#include <cstdlib>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "sentinel/pipeline.hpp"

namespace {

using sentinel::RunConfig;

/// CLI values land here first; only flags the user actually passed are
/// overlaid onto the config file values.
struct Overrides {
    std::string config_path;
    std::string frames_dir;
    std::string frame_pattern;
    std::string classifier_model;
    std::string detector_model;
    double fps = 0.0;
    double frame_threshold = 0.0;
    std::size_t window = 0;
    std::size_t trigger = 0;
    double conf_threshold = 0.0;
    double iou_threshold = 0.0;
    std::size_t heatmap_grid = 0;
    std::size_t heatmap_cell_px = 0;
    std::string alert_endpoint;
    double cooldown_s = 0.0;
    int max_retries = 0;
    double backoff_base_s = 0.0;
    std::string event_log;
    std::string heatmap_out;
};

void add_run_options(CLI::App& cmd, Overrides& ov) {
    cmd.add_option("--config", ov.config_path, "JSON config file; flags override its fields")
        ->check(CLI::ExistingFile);
    cmd.add_option("--frames-dir", ov.frames_dir, "directory of netpbm frames");
    cmd.add_option("--frame-pattern", ov.frame_pattern, "glob for frame file names");
    cmd.add_option("--classifier-model", ov.classifier_model, "classifier manifest path");
    cmd.add_option("--detector-model", ov.detector_model,
                   "directory of per-frame grid prediction JSON files");
    cmd.add_option("--fps", ov.fps, "frames per second for synthesized timestamps");
    cmd.add_option("--frame-threshold", ov.frame_threshold,
                   "per-frame crime probability threshold");
    cmd.add_option("--window", ov.window, "alarm window length in frames");
    cmd.add_option("--trigger", ov.trigger, "flagged frames within the window to alarm");
    cmd.add_option("--conf-threshold", ov.conf_threshold, "detector confidence cutoff");
    cmd.add_option("--iou-threshold", ov.iou_threshold, "suppression overlap cutoff");
    cmd.add_option("--heatmap-grid", ov.heatmap_grid, "heatmap side length in bins");
    cmd.add_option("--heatmap-cell-px", ov.heatmap_cell_px, "rendered pixels per heatmap bin");
    cmd.add_option("--alert-endpoint", ov.alert_endpoint, "webhook URL; empty disables alerts");
    cmd.add_option("--cooldown", ov.cooldown_s, "seconds between dispatched alerts");
    cmd.add_option("--max-retries", ov.max_retries, "webhook retries after a failed attempt");
    cmd.add_option("--backoff-base", ov.backoff_base_s, "first retry delay in seconds");
    cmd.add_option("--event-log", ov.event_log, "alert event JSONL path");
    cmd.add_option("--heatmap-out", ov.heatmap_out, "rendered heatmap PPM path");
}

RunConfig build_config(const CLI::App& cmd, const Overrides& ov) {
    RunConfig cfg;
    if (!ov.config_path.empty()) {
        cfg = sentinel::load_config(ov.config_path);
    }
    const auto passed = [&cmd](const std::string& name) { return cmd.count(name) > 0; };
    if (passed("--frames-dir")) cfg.frames_dir = ov.frames_dir;
    if (passed("--frame-pattern")) cfg.frame_pattern = ov.frame_pattern;
    if (passed("--classifier-model")) cfg.classifier_model = ov.classifier_model;
    if (passed("--detector-model")) cfg.detector_model = ov.detector_model;
    if (passed("--fps")) cfg.fps = ov.fps;
    if (passed("--frame-threshold")) cfg.frame_threshold = ov.frame_threshold;
    if (passed("--window")) cfg.window = ov.window;
    if (passed("--trigger")) cfg.trigger = ov.trigger;
    if (passed("--conf-threshold")) cfg.conf_threshold = ov.conf_threshold;
    if (passed("--iou-threshold")) cfg.iou_threshold = ov.iou_threshold;
    if (passed("--heatmap-grid")) cfg.heatmap_grid = ov.heatmap_grid;
    if (passed("--heatmap-cell-px")) cfg.heatmap_cell_px = ov.heatmap_cell_px;
    if (passed("--alert-endpoint")) cfg.alert.endpoint = ov.alert_endpoint;
    if (passed("--cooldown")) cfg.alert.policy.cooldown_s = ov.cooldown_s;
    if (passed("--max-retries")) cfg.alert.policy.max_retries = ov.max_retries;
    if (passed("--backoff-base")) cfg.alert.policy.backoff_base_s = ov.backoff_base_s;
    if (passed("--event-log")) cfg.event_log = ov.event_log;
    if (passed("--heatmap-out")) cfg.heatmap_out = ov.heatmap_out;
    cfg.validate();
    return cfg;
}

std::string token_from_env() {
    const char* token = std::getenv("SENTINEL_TOKEN");
    return token ? token : "";
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"surveillance analytics: classify frames, decode detections, map activity, "
                 "raise alerts"};
    app.require_subcommand(1);

    std::string model_path;
    CLI::App* info = app.add_subcommand("model-info", "report layer shapes and weight counts");
    info->add_option("model", model_path, "model manifest JSON")->required();

    Overrides ov;
    CLI::App* classify =
        app.add_subcommand("classify", "per-frame class probabilities as JSONL on stdout");
    add_run_options(*classify, ov);

    CLI::App* detect =
        app.add_subcommand("detect", "decode + suppress grid predictions as JSONL on stdout");
    add_run_options(*detect, ov);

    std::string detections_path;
    CLI::App* heatmap =
        app.add_subcommand("heatmap", "accumulate a detections JSONL file into a heatmap");
    heatmap->add_option("detections", detections_path, "detections JSONL file")->required();
    add_run_options(*heatmap, ov);

    CLI::App* run = app.add_subcommand("run", "full monitoring pass over a frame directory");
    add_run_options(*run, ov);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? sentinel::kExitClean : sentinel::kExitError;
    }

    try {
        if (info->parsed()) {
            return sentinel::cmd_model_info(model_path, std::cout, std::cerr);
        }
        if (classify->parsed()) {
            return sentinel::cmd_classify(build_config(*classify, ov), std::cout, std::cerr);
        }
        if (detect->parsed()) {
            return sentinel::cmd_detect(build_config(*detect, ov), std::cout, std::cerr);
        }
        if (heatmap->parsed()) {
            return sentinel::cmd_heatmap(detections_path, build_config(*heatmap, ov), std::cerr);
        }
        if (run->parsed()) {
            return sentinel::cmd_run(build_config(*run, ov), token_from_env(), std::cout,
                                     std::cerr);
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return sentinel::kExitError;
    }
    return sentinel::kExitError;
}
