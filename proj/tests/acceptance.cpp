// Acceptance gate: every release-blocking behavior, one PASS/FAIL line each,
// timed where a budget applies. Exit 0 only when all criteria hold.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "sentinel/alerting.hpp"
#include "sentinel/classifier.hpp"
#include "sentinel/detector.hpp"
#include "sentinel/heatmap.hpp"
#include "sentinel/imaging.hpp"
#include "sentinel/pipeline.hpp"
#include "sentinel/tensor.hpp"

#include "helpers.hpp"
#include "mock_server.hpp"

using namespace sentinel;
using nlohmann::json;

namespace {

struct Check {
    bool ok = true;
    std::string why;

    void expect(bool cond, const std::string& what) {
        if (ok && !cond) {
            ok = false;
            why = what;
        }
    }
    void close(double got, double want, double tol, const std::string& what) {
        expect(std::abs(got - want) <= tol,
               what + ": got " + std::to_string(got) + ", want " + std::to_string(want));
    }
};

int g_failed = 0;

/// budget_s <= 0 means untimed.
void criterion(int number, const char* title, double budget_s,
               const std::function<void(Check&)>& body) {
    Check check;
    const auto start = std::chrono::steady_clock::now();
    try {
        body(check);
    } catch (const std::exception& e) {
        check.expect(false, std::string("unexpected exception: ") + e.what());
    }
    const double elapsed =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (budget_s > 0.0 && elapsed >= budget_s) {
        check.expect(false, "took " + std::to_string(elapsed) + "s, budget " +
                                std::to_string(budget_s) + "s");
    }
    if (check.ok) {
        std::printf("PASS criterion %d: %s [%.3fs]\n", number, title, elapsed);
    } else {
        std::printf("FAIL criterion %d: %s [%.3fs] -- %s\n", number, title, elapsed,
                    check.why.c_str());
        ++g_failed;
    }
    std::fflush(stdout);
}

// ---- independent references ------------------------------------------------

Tensor ref_conv(const Tensor& in, const Kernel& k, std::size_t stride) {
    const std::size_t oh = (in.height - k.kh) / stride + 1;
    const std::size_t ow = (in.width - k.kw) / stride + 1;
    Tensor out(oh, ow, k.out_channels);
    for (std::size_t oc = 0; oc < k.out_channels; ++oc) {
        for (std::size_t r = 0; r < oh; ++r) {
            for (std::size_t c = 0; c < ow; ++c) {
                long double acc = 0.0L;
                for (std::size_t ic = 0; ic < k.in_channels; ++ic) {
                    for (std::size_t kr = 0; kr < k.kh; ++kr) {
                        for (std::size_t kc = 0; kc < k.kw; ++kc) {
                            acc += static_cast<long double>(
                                       in.at(r * stride + kr, c * stride + kc, ic)) *
                                   k.weight(kr, kc, ic, oc);
                        }
                    }
                }
                out.at(r, c, oc) = static_cast<double>(acc + k.bias[oc]);
            }
        }
    }
    return out;
}

Tensor ref_maxpool(const Tensor& in, std::size_t ph, std::size_t pw) {
    const std::size_t oh = in.height / ph;
    const std::size_t ow = in.width / pw;
    Tensor out(oh, ow, in.channels);
    for (std::size_t r = 0; r < oh; ++r) {
        for (std::size_t c = 0; c < ow; ++c) {
            for (std::size_t ch = 0; ch < in.channels; ++ch) {
                double best = in.at(r * ph, c * pw, ch);
                for (std::size_t i = 0; i < ph; ++i) {
                    for (std::size_t j = 0; j < pw; ++j) {
                        best = std::max(best, in.at(r * ph + i, c * pw + j, ch));
                    }
                }
                out.at(r, c, ch) = best;
            }
        }
    }
    return out;
}

std::vector<double> ref_dense(const std::vector<double>& in, const Matrix& w,
                              const std::vector<double>& b) {
    std::vector<double> out(w.rows);
    for (std::size_t r = 0; r < w.rows; ++r) {
        long double acc = b[r];
        for (std::size_t c = 0; c < w.cols; ++c) {
            acc += static_cast<long double>(w.at(r, c)) * in[c];
        }
        out[r] = static_cast<double>(acc);
    }
    return out;
}

std::vector<double> ref_softmax(const std::vector<double>& in) {
    long double sum = 0.0L;
    std::vector<long double> e(in.size());
    for (std::size_t i = 0; i < in.size(); ++i) {
        e[i] = std::exp(static_cast<long double>(in[i]));
        sum += e[i];
    }
    std::vector<double> out(in.size());
    for (std::size_t i = 0; i < in.size(); ++i) {
        out[i] = static_cast<double>(e[i] / sum);
    }
    return out;
}

/// Exact for boxes whose corners sit on the 1/100 lattice: counts the 100x100
/// cell centers inside each rectangle; centers never land on lattice lines.
double raster_iou(const BBox& a, const BBox& b) {
    auto inside = [](const BBox& box, double x, double y) {
        return x > box.x_min && x < box.x_max && y > box.y_min && y < box.y_max;
    };
    std::size_t in_a = 0, in_b = 0, in_both = 0;
    for (int i = 0; i < 100; ++i) {
        for (int j = 0; j < 100; ++j) {
            const double x = (i + 0.5) / 100.0;
            const double y = (j + 0.5) / 100.0;
            const bool pa = inside(a, x, y);
            const bool pb = inside(b, x, y);
            in_a += pa;
            in_b += pb;
            in_both += pa && pb;
        }
    }
    const std::size_t in_union = in_a + in_b - in_both;
    return in_union == 0 ? 0.0 : static_cast<double>(in_both) / static_cast<double>(in_union);
}

/// Quadratic per-class suppression with its own overlap formula.
std::vector<Detection> ref_nms(std::vector<Detection> dets, double thr) {
    std::stable_sort(dets.begin(), dets.end(), [](const Detection& a, const Detection& b) {
        if (a.score != b.score) return a.score > b.score;
        return a.class_id < b.class_id;
    });
    auto overlap = [](const BBox& a, const BBox& b) {
        const double iw =
            std::max(0.0, std::min(a.x_max, b.x_max) - std::max(a.x_min, b.x_min));
        const double ih =
            std::max(0.0, std::min(a.y_max, b.y_max) - std::max(a.y_min, b.y_min));
        const double inter = iw * ih;
        const double uni = a.area() + b.area() - inter;
        return uni <= 0.0 ? 0.0 : inter / uni;
    };
    std::vector<Detection> kept;
    for (const Detection& d : dets) {
        bool suppressed = false;
        for (const Detection& k : kept) {
            if (k.class_id == d.class_id && overlap(k.bbox, d.bbox) > thr) {
                suppressed = true;
                break;
            }
        }
        if (!suppressed) kept.push_back(d);
    }
    return kept;
}

BBox random_lattice_box() {
    const double x0 = static_cast<double>(testutil::uniform_index(0, 95)) / 100.0;
    const double y0 = static_cast<double>(testutil::uniform_index(0, 95)) / 100.0;
    const double x1 =
        x0 + static_cast<double>(testutil::uniform_index(1, 100 - std::llround(x0 * 100))) / 100.0;
    const double y1 =
        y0 + static_cast<double>(testutil::uniform_index(1, 100 - std::llround(y0 * 100))) / 100.0;
    return BBox(x0, y0, std::min(x1, 1.0), std::min(y1, 1.0));
}

Tensor random_tensor(std::size_t h, std::size_t w, std::size_t c) {
    Tensor t(h, w, c);
    for (double& v : t.data) v = testutil::uniform(-2.0, 2.0);
    return t;
}

std::filesystem::path models_dir() { return SENTINEL_MODELS_DIR; }

/// 40 synthetic frames with a bright burst on [10, 20].
void write_burst_sequence(const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    for (int i = 0; i < 40; ++i) {
        char name[16];
        std::snprintf(name, sizeof(name), "f%03d.pgm", i);
        testutil::write_pgm(dir / name, 4, 4, (i >= 10 && i <= 20) ? 230 : 20);
    }
}

std::filesystem::path write_intensity_model(const std::filesystem::path& dir) {
    const ModelSpec model = intensity_model();
    testutil::write_file(dir / "model.json", serialize_manifest(model));
    const auto blob = serialize_weights(model);
    testutil::write_file(dir / "model.weights", blob.data(), blob.size());
    return dir / "model.json";
}

// ---- criteria ---------------------------------------------------------------

void layer_arithmetic(Check& check) {
    check.expect(dense_weight_count(784, 10) == 7840, "784x10 fan-in");
    check.expect(dense_weight_count(2073600, 64) == 132710400ull, "2073600x64 fan-in");

    const Manifest demo =
        parse_manifest(testutil::read_file(models_dir() / "demo_28x28.json"));
    const std::vector<StageShape> chain = shape_chain(demo.spec);
    bool saw_784 = false;
    for (const StageShape& s : chain) saw_784 = saw_784 || (s.flat && s.len == 784);
    check.expect(saw_784, "28x28 flatten must produce a 784-vector");

    std::ostringstream out, err;
    check.expect(cmd_model_info(models_dir() / "demo_28x28.json", out, err) == kExitClean,
                 "model info on the 28x28 manifest");
    check.expect(out.str().find("[784]") != std::string::npos, "[784] missing from report");

    std::ostringstream out2, err2;
    check.expect(cmd_model_info(models_dir() / "uhd_1920x1080.json", out2, err2) == kExitClean,
                 "model info on the 1920x1080 manifest");
    check.expect(out2.str().find("weights=132710400") != std::string::npos,
                 "132710400 missing from report");
}

void iou_oracle(Check& check) {
    for (int i = 0; i < 1200 && check.ok; ++i) {
        const BBox a = random_lattice_box();
        const BBox b = random_lattice_box();
        check.close(iou(a, b), raster_iou(a, b), 1e-9, "pair " + std::to_string(i));
    }
    check.close(iou(BBox(0, 0, 0.5, 0.5), BBox(0.5, 0.5, 1, 1)), 0.0, 0.0, "touching corners");
    check.close(iou(BBox(0.1, 0.1, 0.9, 0.9), BBox(0.1, 0.1, 0.9, 0.9)), 1.0, 0.0, "identical");
}

void forward_ops(Check& check) {
    for (int i = 0; i < 120 && check.ok; ++i) {
        const std::size_t kh = testutil::uniform_index(1, 3);
        const std::size_t kw = testutil::uniform_index(1, 3);
        const std::size_t stride = testutil::uniform_index(1, 2);
        const std::size_t ic = testutil::uniform_index(1, 3);
        const std::size_t oc = testutil::uniform_index(1, 3);
        const Tensor in = random_tensor(testutil::uniform_index(kh, 7),
                                        testutil::uniform_index(kw, 7), ic);
        std::vector<double> w(kh * kw * ic * oc), b(oc);
        for (double& v : w) v = testutil::uniform(-1.0, 1.0);
        for (double& v : b) v = testutil::uniform(-1.0, 1.0);
        const Kernel kernel(kh, kw, ic, oc, w, b);

        const Tensor got = conv2d(in, kernel, stride);
        const Tensor want = ref_conv(in, kernel, stride);
        check.expect(got.height == want.height && got.width == want.width &&
                         got.channels == want.channels,
                     "conv output dims, case " + std::to_string(i));
        for (std::size_t j = 0; j < want.data.size() && check.ok; ++j) {
            check.close(got.data[j], want.data[j], 1e-9, "conv case " + std::to_string(i));
        }
    }

    for (int i = 0; i < 120 && check.ok; ++i) {
        const std::size_t ph = testutil::uniform_index(1, 3);
        const std::size_t pw = testutil::uniform_index(1, 3);
        const Tensor in = random_tensor(testutil::uniform_index(ph, 8),
                                        testutil::uniform_index(pw, 8),
                                        testutil::uniform_index(1, 3));
        const Tensor got = maxpool2d(in, ph, pw);
        const Tensor want = ref_maxpool(in, ph, pw);
        check.expect(got.data == want.data && got.height == want.height &&
                         got.width == want.width,
                     "maxpool case " + std::to_string(i));
    }

    for (int i = 0; i < 120 && check.ok; ++i) {
        const std::size_t n = testutil::uniform_index(1, 12);
        const std::size_t m = testutil::uniform_index(1, 12);
        std::vector<double> in(n), w(m * n), b(m);
        for (double& v : in) v = testutil::uniform(-2.0, 2.0);
        for (double& v : w) v = testutil::uniform(-1.0, 1.0);
        for (double& v : b) v = testutil::uniform(-1.0, 1.0);
        const Matrix weights(m, n, w);
        const std::vector<double> got = dense(in, weights, b);
        const std::vector<double> want = ref_dense(in, weights, b);
        for (std::size_t j = 0; j < m && check.ok; ++j) {
            check.close(got[j], want[j], 1e-9, "dense case " + std::to_string(i));
        }
    }

    for (int i = 0; i < 1000 && check.ok; ++i) {
        std::vector<double> v(testutil::uniform_index(2, 16));
        for (double& x : v) x = testutil::uniform(-30.0, 30.0);
        const std::vector<double> got = softmax(v);
        const std::vector<double> want = ref_softmax(v);
        long double total = 0.0L;
        for (std::size_t j = 0; j < v.size() && check.ok; ++j) {
            check.close(got[j], want[j], 1e-12, "softmax case " + std::to_string(i));
            total += got[j];
        }
        check.close(static_cast<double>(total), 1.0, 1e-12,
                    "softmax sum, case " + std::to_string(i));

        std::vector<double> shifted = v;
        for (double& x : shifted) x += 123.0;
        const std::vector<double> got2 = softmax(shifted);
        for (std::size_t j = 0; j < v.size() && check.ok; ++j) {
            check.close(got2[j], got[j], 1e-12, "softmax shift, case " + std::to_string(i));
        }
    }
}

void nms_reference(Check& check) {
    for (int instance = 0; instance < 600 && check.ok; ++instance) {
        const std::size_t n = testutil::uniform_index(0, 20);
        std::vector<Detection> dets(n);
        for (Detection& d : dets) {
            const double x0 = static_cast<double>(testutil::uniform_index(0, 15)) / 20.0;
            const double y0 = static_cast<double>(testutil::uniform_index(0, 15)) / 20.0;
            const double w = static_cast<double>(testutil::uniform_index(1, 5)) / 20.0;
            const double h = static_cast<double>(testutil::uniform_index(1, 5)) / 20.0;
            d.bbox = BBox(x0, y0, std::min(x0 + w, 1.0), std::min(y0 + h, 1.0));
            d.class_id = static_cast<int>(testutil::uniform_index(0, 2));
            d.score = static_cast<double>(testutil::uniform_index(1, 9)) / 10.0;
            d.confidence = d.score;
        }
        const double thr = std::vector<double>{0.3, 0.5, 0.7}[instance % 3];

        const std::vector<Detection> got = nms(dets, thr);
        const std::vector<Detection> want = ref_nms(dets, thr);
        check.expect(got.size() == want.size(),
                     "survivor count, instance " + std::to_string(instance));
        for (std::size_t i = 0; i < got.size() && check.ok; ++i) {
            check.expect(got[i].class_id == want[i].class_id && got[i].score == want[i].score &&
                             got[i].bbox.x_min == want[i].bbox.x_min &&
                             got[i].bbox.y_max == want[i].bbox.y_max,
                         "survivor " + std::to_string(i) + ", instance " +
                             std::to_string(instance));
        }
    }
}

void decode_hand_cases(Check& check) {
    const GridPrediction silent(7, 2, 3, std::vector<double>(7 * 7 * 13, 0.0));
    check.expect(decode_grid(silent, 0.25).empty(), "all-zero grid must decode to nothing");

    const GridPrediction one(1, 1, 1, {0.5, 0.5, 0.5, 0.5, 0.9, 1.0});
    const std::vector<Detection> dets = decode_grid(one, 0.25);
    check.expect(dets.size() == 1, "centered box must survive the threshold");
    if (!dets.empty()) {
        check.close(dets[0].bbox.x_min, 0.25, 1e-12, "x_min");
        check.close(dets[0].bbox.y_min, 0.25, 1e-12, "y_min");
        check.close(dets[0].bbox.x_max, 0.75, 1e-12, "x_max");
        check.close(dets[0].bbox.y_max, 0.75, 1e-12, "y_max");
        check.close(dets[0].score, 0.9, 1e-12, "score");
        check.expect(dets[0].class_id == 0, "class id");
    }
}

void end_to_end_alert(Check& check) {
    testutil::TempDir dir;
    write_burst_sequence(dir / "frames");
    testutil::MockReceiver receiver({200});

    RunConfig cfg;
    cfg.frames_dir = dir / "frames";
    cfg.classifier_model = write_intensity_model(dir.path());
    cfg.fps = 10.0;
    cfg.window = 5;
    cfg.trigger = 3;
    cfg.frame_threshold = 0.5;
    cfg.alert.endpoint = receiver.endpoint();
    cfg.alert.policy.cooldown_s = 60.0;
    cfg.event_log = dir / "events.jsonl";
    cfg.heatmap_out = dir / "heatmap.ppm";

    std::ostringstream out, err;
    const int code = cmd_run(cfg, "", out, err);
    check.expect(code == kExitAlarm, "run must exit with the alarm code, got " +
                                         std::to_string(code) + " err=" + err.str());

    const json summary = json::parse(out.str());
    check.expect(summary["frames"] == 40, "frame count");
    check.expect(summary["alerts_delivered"] == 1,
                 "exactly one alert must get through the cooldown, got " +
                     summary["alerts_delivered"].dump());
    check.expect(receiver.hits() == 1,
                 "receiver saw " + std::to_string(receiver.hits()) + " posts, want 1");

    if (receiver.hits() == 1) {
        const json body = json::parse(receiver.bodies()[0]);
        check.expect(body.contains("ts") && body.contains("type") && body.contains("frame") &&
                         body.contains("probability") && body.contains("message"),
                     "post body schema");
        check.expect(body["type"] == "crime_alert", "post body type");
        check.expect(body["frame"] == 12, "first alarm frame");
    }

    std::ifstream log(cfg.event_log);
    std::string line;
    std::size_t entries = 0;
    bool delivered = true;
    while (std::getline(log, line)) {
        const json row = json::parse(line);
        delivered = delivered && row["delivered"] == true && row["attempts"] == 1;
        ++entries;
    }
    check.expect(entries == 1, "event log must hold exactly one entry, got " +
                                   std::to_string(entries));
    check.expect(delivered, "event log entry must record the delivery");

    const std::string ppm = testutil::read_file(cfg.heatmap_out);
    check.expect(ppm.rfind("P6", 0) == 0, "heatmap must be binary P6");
    const Frame img = parse_netpbm(ppm);
    check.expect(img.channels == 3 && img.width == cfg.heatmap_grid * cfg.heatmap_cell_px,
                 "heatmap dimensions");
}

void heatmap_invariants(Check& check) {
    HeatmapGrid grid(16);
    std::size_t placed = 0;
    for (int frame = 0; frame < 25; ++frame) {
        std::vector<Detection> dets(testutil::uniform_index(0, 9));
        for (Detection& d : dets) {
            const double cx = testutil::uniform(0.0, 1.0);
            const double cy = testutil::uniform(0.0, 1.0);
            d.bbox = BBox(std::max(0.0, cx - 0.01), std::max(0.0, cy - 0.01),
                          std::min(1.0, cx + 0.01), std::min(1.0, cy + 0.01));
        }
        placed += dets.size();
        accumulate(grid, dets);
    }
    check.close(grid.total(), static_cast<double>(placed), 0.0, "mass conservation");
    check.expect(grid.frames_seen == 25, "frames seen");

    HeatmapGrid other(16);
    accumulate(other, {Detection{}});
    const HeatmapGrid merged = merge(grid, other);
    check.close(merged.total(), grid.total() + other.total(), 0.0, "merge adds mass");

    const std::vector<double> norm = normalize(merged);
    check.close(*std::max_element(norm.begin(), norm.end()), 1.0, 0.0, "normalize peak");
    const std::vector<double> empty_norm = normalize(HeatmapGrid(4));
    check.expect(*std::max_element(empty_norm.begin(), empty_norm.end()) == 0.0,
                 "empty grid normalizes to zeros");

    const std::vector<std::uint8_t> once = render_ppm(merged, 4);
    const std::vector<std::uint8_t> twice = render_ppm(merged, 4);
    check.expect(once == twice, "renders must be byte-identical");
    const Frame img = parse_netpbm(once);
    check.expect(img.width == 64 && img.height == 64 && img.channels == 3,
                 "render-parse roundtrip dimensions");

    const HeatmapGrid back = grid_from_json(grid_to_json(merged));
    check.expect(back.bins == merged.bins && back.frames_seen == merged.frames_seen,
                 "grid state roundtrip");
}

void alert_discipline(Check& check) {
    DispatchPolicy policy;
    policy.cooldown_s = 60.0;
    check.expect(should_dispatch(std::nullopt, 0.0, policy), "first alert always allowed");
    check.expect(!should_dispatch(0.0, 59.999, policy), "inside the cooldown");
    check.expect(should_dispatch(0.0, 60.0, policy), "boundary is inclusive");

    CooldownGate gate;
    std::size_t allowed = 0;
    for (int frame = 0; frame < 3000; ++frame) {
        allowed += gate.allow(frame / 10.0, policy) ? 1 : 0;
    }
    check.expect(allowed == 5, "300s at a 60s cooldown must allow 5, got " +
                                   std::to_string(allowed));

    testutil::MockReceiver failing({500});
    DispatchPolicy retrying;
    retrying.max_retries = 3;
    retrying.backoff_base_s = 0.001;
    AlertEvent event;
    event.message = format_message(event);
    const DispatchResult result = dispatch(event, failing.endpoint(), "", retrying);
    check.expect(!result.delivered, "5xx must not count as delivered");
    check.expect(result.attempts == 4, "persistent failure must stop after 1+max_retries, got " +
                                           std::to_string(result.attempts));
    check.expect(failing.hits() == 4,
                 "receiver saw " + std::to_string(failing.hits()) + " posts, want 4");

    // delivery failure must not abort the run
    testutil::TempDir dir;
    write_burst_sequence(dir / "frames");
    testutil::MockReceiver down({503});
    RunConfig cfg;
    cfg.frames_dir = dir / "frames";
    cfg.classifier_model = write_intensity_model(dir.path());
    cfg.alert.endpoint = down.endpoint();
    cfg.alert.policy.max_retries = 1;
    cfg.alert.policy.backoff_base_s = 0.001;
    cfg.event_log = dir / "events.jsonl";
    cfg.heatmap_out = dir / "heatmap.ppm";

    std::ostringstream out, err;
    check.expect(cmd_run(cfg, "", out, err) == kExitAlarm,
                 "run must finish with the alarm code despite delivery failure");
    const json summary = json::parse(out.str());
    check.expect(summary["frames"] == 40, "all frames processed");
    check.expect(summary["alerts_delivered"] == 0, "nothing delivered");
    const std::string log = testutil::read_file(cfg.event_log);
    const json row = json::parse(log.substr(0, log.find('\n')));
    check.expect(row["delivered"] == false && row["attempts"] == 2,
                 "failed delivery must still be logged");
}

}  // namespace

int main() {
    criterion(1, "layer arithmetic on the bundled manifests", 1.0, layer_arithmetic);
    criterion(2, "IoU against a rasterization oracle", 10.0, iou_oracle);
    criterion(3, "forward-pass ops against naive references", 10.0, forward_ops);
    criterion(4, "NMS against a quadratic reference", 10.0, nms_reference);
    criterion(5, "grid decode hand cases", 0.0, decode_hand_cases);
    criterion(6, "end-to-end run delivers exactly one debounced alert", 5.0, end_to_end_alert);
    criterion(7, "heatmap conservation, normalization, render stability", 0.0,
              heatmap_invariants);
    criterion(8, "alert cooldown boundary and bounded retries", 0.0, alert_discipline);

    if (g_failed == 0) {
        std::printf("acceptance: all 8 criteria passed\n");
        return 0;
    }
    std::printf("acceptance: %d of 8 criteria FAILED\n", g_failed);
    return 1;
}
