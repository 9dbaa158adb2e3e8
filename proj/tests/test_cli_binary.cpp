// Drives the installed binary end to end; covers exit codes and flag plumbing
// that the in-process command tests cannot see.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <sys/wait.h>

#include <cstdio>
#include <cstdlib>
#include <string>

#include <json.hpp>

#include "sentinel/classifier.hpp"
#include "sentinel/imaging.hpp"

#include "helpers.hpp"

using namespace sentinel;
using nlohmann::json;

namespace {

struct CliResult {
    int exit_code = -1;
    std::string output;  // stdout and stderr combined
};

CliResult run_cli(const std::string& args) {
    testutil::TempDir scratch;
    const auto capture = scratch / "out.txt";
    const std::string cmd =
        std::string("\"") + SENTINEL_CLI_PATH + "\" " + args + " > \"" + capture.string() +
        "\" 2>&1";
    const int rc = std::system(cmd.c_str());
    REQUIRE(rc != -1);
    REQUIRE(WIFEXITED(rc));
    return {WEXITSTATUS(rc), testutil::read_file(capture)};
}

std::string models() { return SENTINEL_MODELS_DIR; }

void write_frames(const std::filesystem::path& dir, std::uint8_t dark, std::uint8_t bright) {
    std::filesystem::create_directories(dir);
    for (int i = 0; i < 40; ++i) {
        char name[16];
        std::snprintf(name, sizeof(name), "f%03d.pgm", i);
        testutil::write_pgm(dir / name, 4, 4, (i >= 10 && i <= 20) ? bright : dark);
    }
}

std::filesystem::path write_model(const std::filesystem::path& dir) {
    const ModelSpec model = intensity_model();
    testutil::write_file(dir / "model.json", serialize_manifest(model));
    const auto blob = serialize_weights(model);
    testutil::write_file(dir / "model.weights", blob.data(), blob.size());
    return dir / "model.json";
}

}  // namespace

TEST_CASE("model-info reports the bundled manifests") {
    const CliResult uhd = run_cli("model-info " + models() + "/uhd_1920x1080.json");
    CHECK(uhd.exit_code == 0);
    CHECK(uhd.output.find("weights=132710400") != std::string::npos);

    const CliResult demo = run_cli("model-info " + models() + "/demo_28x28.json");
    CHECK(demo.exit_code == 0);
    CHECK(demo.output.find("[784]") != std::string::npos);

    const CliResult missing = run_cli("model-info /no/such/manifest.json");
    CHECK(missing.exit_code == 1);
    CHECK(missing.output.find("error:") != std::string::npos);
}

TEST_CASE("usage errors and help exit cleanly") {
    CHECK(run_cli("--help").exit_code == 0);
    CHECK(run_cli("model-info --help").exit_code == 0);
    CHECK(run_cli("").exit_code == 1);          // a subcommand is required
    CHECK(run_cli("frobnicate").exit_code == 1);
    CHECK(run_cli("model-info").exit_code == 1);  // missing positional
}

TEST_CASE("classify exposes the alarm exit code") {
    testutil::TempDir dir;
    write_frames(dir / "frames", 20, 230);
    const auto model = write_model(dir.path());

    const CliResult alarmed = run_cli("classify --frames-dir " + (dir / "frames").string() +
                                      " --classifier-model " + model.string());
    CHECK(alarmed.exit_code == 2);
    CHECK(alarmed.output.find("\"label\":\"crime\"") != std::string::npos);

    write_frames(dir / "calm", 20, 25);
    const CliResult calm = run_cli("classify --frames-dir " + (dir / "calm").string() +
                                   " --classifier-model " + model.string());
    CHECK(calm.exit_code == 0);

    const CliResult broken = run_cli("classify --frames-dir " + (dir / "absent").string() +
                                     " --classifier-model " + model.string());
    CHECK(broken.exit_code == 1);
}

TEST_CASE("run takes a config file and flags override it") {
    testutil::TempDir dir;
    write_frames(dir / "frames", 20, 230);
    const auto model = write_model(dir.path());

    const json config{{"frames_dir", (dir / "frames").string()},
                      {"classifier_model", model.string()},
                      {"event_log", (dir / "events.jsonl").string()},
                      {"heatmap_out", (dir / "map.ppm").string()}};
    testutil::write_file(dir / "run.json", config.dump());

    const CliResult run = run_cli("run --config " + (dir / "run.json").string());
    CHECK(run.exit_code == 2);
    const json summary = json::parse(run.output);
    CHECK(summary["frames"] == 40);
    CHECK(summary["alarms"] == 11);
    CHECK(std::filesystem::exists(dir / "map.ppm"));

    // an impossible trigger via flag must beat the config default
    const CliResult overridden = run_cli("run --config " + (dir / "run.json").string() +
                                         " --trigger 40 --window 40");
    CHECK(overridden.exit_code == 0);

    const CliResult invalid = run_cli("run --config " + (dir / "run.json").string() +
                                      " --trigger 9 --window 3");
    CHECK(invalid.exit_code == 1);
}

TEST_CASE("detect and heatmap round through files") {
    testutil::TempDir dir;
    std::filesystem::create_directories(dir / "preds");
    testutil::write_file(dir / "preds" / "p0.json",
                         R"({"S":1,"B":1,"C":1,"values":[0.5,0.5,0.5,0.5,0.9,1.0]})");

    const CliResult detect = run_cli("detect --detector-model " + (dir / "preds").string());
    CHECK(detect.exit_code == 0);
    CHECK(detect.output.find("\"score\":0.9") != std::string::npos);

    testutil::write_file(dir / "dets.jsonl", detect.output);
    const CliResult heat = run_cli("heatmap " + (dir / "dets.jsonl").string() +
                                   " --heatmap-out " + (dir / "map.ppm").string() +
                                   " --heatmap-grid 4 --heatmap-cell-px 2");
    CHECK(heat.exit_code == 0);
    const Frame img = parse_netpbm(testutil::read_file(dir / "map.ppm"));
    CHECK(img.width == 8);
    CHECK(img.channels == 3);
}
