#include "sentinel/classifier.hpp"

#include <zlib.h>

#include <bit>
#include <cmath>
#include <stdexcept>
#include <variant>

#include <json.hpp>

#include "file_util.hpp"

namespace sentinel {

namespace {

using nlohmann::json;

std::uint32_t crc32_of(std::span<const std::uint8_t> bytes) {
    uLong crc = ::crc32(0L, Z_NULL, 0);
    crc = ::crc32(crc, bytes.data(), static_cast<uInt>(bytes.size()));
    return static_cast<std::uint32_t>(crc);
}

LayerKind kind_from_string(const std::string& s) {
    if (s == "conv") return LayerKind::conv;
    if (s == "maxpool") return LayerKind::maxpool;
    if (s == "flatten") return LayerKind::flatten;
    if (s == "dense") return LayerKind::dense;
    if (s == "relu") return LayerKind::relu;
    if (s == "softmax") return LayerKind::softmax;
    throw std::runtime_error("model manifest: unknown layer kind '" + s + "'");
}

std::size_t require_size(const json& j, const char* field, const char* where) {
    if (!j.contains(field) || !j[field].is_number_unsigned()) {
        throw std::runtime_error(std::string("model manifest: ") + where +
                                 " needs a non-negative integer field '" + field + "'");
    }
    return j[field].get<std::size_t>();
}

void append_f32_le(std::vector<std::uint8_t>& out, double v) {
    const auto bits = std::bit_cast<std::uint32_t>(static_cast<float>(v));
    out.push_back(static_cast<std::uint8_t>(bits & 0xff));
    out.push_back(static_cast<std::uint8_t>((bits >> 8) & 0xff));
    out.push_back(static_cast<std::uint8_t>((bits >> 16) & 0xff));
    out.push_back(static_cast<std::uint8_t>((bits >> 24) & 0xff));
}

double read_f32_le(std::span<const std::uint8_t> blob, std::size_t index) {
    const std::size_t o = index * 4;
    const std::uint32_t bits = static_cast<std::uint32_t>(blob[o]) |
                               (static_cast<std::uint32_t>(blob[o + 1]) << 8) |
                               (static_cast<std::uint32_t>(blob[o + 2]) << 16) |
                               (static_cast<std::uint32_t>(blob[o + 3]) << 24);
    return static_cast<double>(std::bit_cast<float>(bits));
}

}  // namespace

std::string_view layer_kind_name(LayerKind kind) {
    switch (kind) {
        case LayerKind::conv: return "conv";
        case LayerKind::maxpool: return "maxpool";
        case LayerKind::flatten: return "flatten";
        case LayerKind::dense: return "dense";
        case LayerKind::relu: return "relu";
        case LayerKind::softmax: return "softmax";
    }
    return "?";
}

std::uint64_t LayerSpec::parameter_count() const {
    switch (kind) {
        case LayerKind::conv:
            return static_cast<std::uint64_t>(kh) * kw * in_channels * out_channels +
                   out_channels;
        case LayerKind::dense:
            return static_cast<std::uint64_t>(in_dim) * out_dim + out_dim;
        default:
            return 0;
    }
}

std::uint64_t ModelSpec::parameter_count() const {
    std::uint64_t total = 0;
    for (const auto& layer : layers) {
        total += layer.parameter_count();
    }
    return total;
}

bool ModelSpec::has_weights() const {
    for (const auto& layer : layers) {
        if (layer.parameter_count() > 0 && layer.weights.empty()) {
            return false;
        }
    }
    return true;
}

std::vector<StageShape> shape_chain(const ModelSpec& model) {
    if (model.input_h == 0 || model.input_w == 0 || model.input_c == 0) {
        throw std::runtime_error("model manifest: input dimensions must be positive");
    }
    std::vector<StageShape> shapes;
    StageShape cur{false, model.input_h, model.input_w, model.input_c, 0};
    shapes.push_back(cur);

    auto broken = [](std::size_t i, const std::string& why) {
        return std::runtime_error("model manifest: shape chain broken at layer " +
                                  std::to_string(i) + ": " + why);
    };

    for (std::size_t i = 0; i < model.layers.size(); ++i) {
        const LayerSpec& layer = model.layers[i];
        switch (layer.kind) {
            case LayerKind::conv:
                if (cur.flat) throw broken(i, "conv applied after flatten");
                if (layer.in_channels != cur.c) {
                    throw broken(i, "conv declares " + std::to_string(layer.in_channels) +
                                        " input channels but receives " + std::to_string(cur.c));
                }
                if (layer.kh == 0 || layer.kw == 0 || layer.out_channels == 0 || layer.stride == 0) {
                    throw broken(i, "conv extents, channels and stride must be positive");
                }
                if (layer.kh > cur.h || layer.kw > cur.w) {
                    throw broken(i, "conv kernel exceeds its input dimensions");
                }
                cur.h = (cur.h - layer.kh) / layer.stride + 1;
                cur.w = (cur.w - layer.kw) / layer.stride + 1;
                cur.c = layer.out_channels;
                break;
            case LayerKind::maxpool:
                if (cur.flat) throw broken(i, "maxpool applied after flatten");
                if (layer.ph == 0 || layer.pw == 0) {
                    throw broken(i, "maxpool window extents must be positive");
                }
                if (layer.ph > cur.h || layer.pw > cur.w) {
                    throw broken(i, "maxpool window exceeds its input dimensions");
                }
                cur.h /= layer.ph;
                cur.w /= layer.pw;
                break;
            case LayerKind::flatten:
                if (cur.flat) throw broken(i, "flatten applied twice");
                cur.len = cur.h * cur.w * cur.c;
                cur.flat = true;
                break;
            case LayerKind::dense:
                if (!cur.flat) throw broken(i, "dense requires a flattened input");
                if (layer.out_dim == 0) throw broken(i, "dense output dimension must be positive");
                if (layer.in_dim != cur.len) {
                    throw broken(i, "dense declares " + std::to_string(layer.in_dim) +
                                        " inputs but receives " + std::to_string(cur.len));
                }
                cur.len = layer.out_dim;
                break;
            case LayerKind::relu:
                break;  // shape-preserving in both stages
            case LayerKind::softmax:
                if (!cur.flat) throw broken(i, "softmax requires a flattened input");
                break;
        }
        shapes.push_back(cur);
    }

    const StageShape& out = shapes.back();
    if (!out.flat) {
        throw std::runtime_error("model manifest: shape chain broken: model must end in a vector");
    }
    if (!model.class_labels.empty() && model.class_labels.size() != out.len) {
        throw std::runtime_error("model manifest: shape chain broken: " +
                                 std::to_string(model.class_labels.size()) +
                                 " class labels for an output of length " +
                                 std::to_string(out.len));
    }
    return shapes;
}

Manifest parse_manifest(std::string_view manifest_json) {
    json doc;
    try {
        doc = json::parse(manifest_json);
    } catch (const json::exception& e) {
        throw std::runtime_error(std::string("model manifest: malformed JSON: ") + e.what());
    }
    if (!doc.is_object()) {
        throw std::runtime_error("model manifest: document must be a JSON object");
    }

    Manifest m;
    if (!doc.contains("name") || !doc["name"].is_string()) {
        throw std::runtime_error("model manifest: missing string field 'name'");
    }
    m.spec.name = doc["name"].get<std::string>();

    if (!doc.contains("input") || !doc["input"].is_array() || doc["input"].size() != 3 ||
        !doc["input"][0].is_number_unsigned() || !doc["input"][1].is_number_unsigned() ||
        !doc["input"][2].is_number_unsigned()) {
        throw std::runtime_error(
            "model manifest: 'input' must be an array of three non-negative integers [h, w, c]");
    }
    m.spec.input_h = doc["input"][0].get<std::size_t>();
    m.spec.input_w = doc["input"][1].get<std::size_t>();
    m.spec.input_c = doc["input"][2].get<std::size_t>();

    if (!doc.contains("layers") || !doc["layers"].is_array()) {
        throw std::runtime_error("model manifest: missing array field 'layers'");
    }
    for (const auto& jl : doc["layers"]) {
        if (!jl.is_object() || !jl.contains("kind") || !jl["kind"].is_string()) {
            throw std::runtime_error("model manifest: every layer needs a string 'kind'");
        }
        LayerSpec layer;
        layer.kind = kind_from_string(jl["kind"].get<std::string>());
        switch (layer.kind) {
            case LayerKind::conv:
                layer.kh = require_size(jl, "kh", "conv layer");
                layer.kw = require_size(jl, "kw", "conv layer");
                layer.in_channels = require_size(jl, "in_channels", "conv layer");
                layer.out_channels = require_size(jl, "out_channels", "conv layer");
                layer.stride = jl.contains("stride") ? require_size(jl, "stride", "conv layer") : 1;
                break;
            case LayerKind::maxpool:
                layer.ph = require_size(jl, "ph", "maxpool layer");
                layer.pw = require_size(jl, "pw", "maxpool layer");
                break;
            case LayerKind::dense:
                layer.in_dim = require_size(jl, "in_dim", "dense layer");
                layer.out_dim = require_size(jl, "out_dim", "dense layer");
                break;
            default:
                break;
        }
        m.spec.layers.push_back(std::move(layer));
    }

    if (!doc.contains("class_labels") || !doc["class_labels"].is_array()) {
        throw std::runtime_error("model manifest: missing array field 'class_labels'");
    }
    for (const auto& jl : doc["class_labels"]) {
        if (!jl.is_string()) {
            throw std::runtime_error("model manifest: class labels must be strings");
        }
        m.spec.class_labels.push_back(jl.get<std::string>());
    }

    if (!doc.contains("parameter_count") || !doc["parameter_count"].is_number_unsigned()) {
        throw std::runtime_error("model manifest: missing integer field 'parameter_count'");
    }
    m.declared_parameter_count = doc["parameter_count"].get<std::uint64_t>();

    if (!doc.contains("weight_checksum")) {
        throw std::runtime_error("model manifest: missing field 'weight_checksum'");
    }
    if (doc["weight_checksum"].is_null()) {
        m.has_checksum = false;  // manifest-only model, no blob bundled
    } else if (doc["weight_checksum"].is_number_unsigned()) {
        m.has_checksum = true;
        m.weight_checksum = doc["weight_checksum"].get<std::uint32_t>();
    } else {
        throw std::runtime_error("model manifest: 'weight_checksum' must be an integer or null");
    }

    shape_chain(m.spec);

    const std::uint64_t implied = m.spec.parameter_count();
    if (m.declared_parameter_count != implied) {
        throw std::runtime_error("model manifest: parameter count mismatch: declares " +
                                 std::to_string(m.declared_parameter_count) +
                                 ", layer dims imply " + std::to_string(implied));
    }
    return m;
}

ModelSpec load_model(std::string_view manifest_json, std::span<const std::uint8_t> weight_blob) {
    Manifest m = parse_manifest(manifest_json);

    const std::uint64_t params = m.spec.parameter_count();
    if (weight_blob.size() != params * 4) {
        throw std::runtime_error("weight blob: expected " + std::to_string(params * 4) +
                                 " bytes for " + std::to_string(params) + " parameters, got " +
                                 std::to_string(weight_blob.size()));
    }
    if (!m.has_checksum) {
        throw std::runtime_error("weight blob: manifest carries no weight_checksum to verify "
                                 "the blob against");
    }
    const std::uint32_t crc = crc32_of(weight_blob);
    if (crc != m.weight_checksum) {
        throw std::runtime_error("weight blob: checksum mismatch (manifest declares " +
                                 std::to_string(m.weight_checksum) + ", blob has " +
                                 std::to_string(crc) + ")");
    }

    std::size_t cursor = 0;
    auto take = [&](std::size_t n) {
        std::vector<double> out(n);
        for (std::size_t i = 0; i < n; ++i) {
            out[i] = read_f32_le(weight_blob, cursor + i);
        }
        cursor += n;
        return out;
    };
    for (auto& layer : m.spec.layers) {
        switch (layer.kind) {
            case LayerKind::conv:
                layer.weights = take(layer.kh * layer.kw * layer.in_channels * layer.out_channels);
                layer.bias = take(layer.out_channels);
                break;
            case LayerKind::dense:
                layer.weights = take(layer.in_dim * layer.out_dim);
                layer.bias = take(layer.out_dim);
                break;
            default:
                break;
        }
    }
    return m.spec;
}

ModelSpec load_model_file(const std::filesystem::path& manifest_path) {
    const std::string manifest = detail::read_file_bytes(manifest_path);
    std::filesystem::path blob_path = manifest_path;
    blob_path.replace_extension(".weights");
    if (!std::filesystem::exists(blob_path)) {
        throw std::runtime_error("weights file not found: " + blob_path.string());
    }
    const std::string blob = detail::read_file_bytes(blob_path);
    return load_model(manifest,
                      std::span(reinterpret_cast<const std::uint8_t*>(blob.data()), blob.size()));
}

std::string serialize_manifest(const ModelSpec& model) {
    json layers = json::array();
    for (const auto& layer : model.layers) {
        json jl{{"kind", std::string(layer_kind_name(layer.kind))}};
        switch (layer.kind) {
            case LayerKind::conv:
                jl["kh"] = layer.kh;
                jl["kw"] = layer.kw;
                jl["in_channels"] = layer.in_channels;
                jl["out_channels"] = layer.out_channels;
                jl["stride"] = layer.stride;
                break;
            case LayerKind::maxpool:
                jl["ph"] = layer.ph;
                jl["pw"] = layer.pw;
                break;
            case LayerKind::dense:
                jl["in_dim"] = layer.in_dim;
                jl["out_dim"] = layer.out_dim;
                break;
            default:
                break;
        }
        layers.push_back(std::move(jl));
    }

    json doc{{"name", model.name},
             {"input", {model.input_h, model.input_w, model.input_c}},
             {"layers", layers},
             {"class_labels", model.class_labels},
             {"parameter_count", model.parameter_count()}};
    if (model.has_weights()) {
        const auto blob = serialize_weights(model);
        doc["weight_checksum"] = crc32_of(blob);
    } else {
        doc["weight_checksum"] = nullptr;
    }
    return doc.dump();
}

std::vector<std::uint8_t> serialize_weights(const ModelSpec& model) {
    std::vector<std::uint8_t> blob;
    blob.reserve(model.parameter_count() * 4);
    for (const auto& layer : model.layers) {
        if (layer.parameter_count() == 0) continue;
        const std::size_t expect_w = (layer.kind == LayerKind::conv)
                                         ? layer.kh * layer.kw * layer.in_channels * layer.out_channels
                                         : layer.in_dim * layer.out_dim;
        const std::size_t expect_b =
            (layer.kind == LayerKind::conv) ? layer.out_channels : layer.out_dim;
        if (layer.weights.size() != expect_w || layer.bias.size() != expect_b) {
            throw std::runtime_error("serialize_weights: layer parameters missing or sized "
                                     "inconsistently with its dims");
        }
        for (double v : layer.weights) append_f32_le(blob, v);
        for (double v : layer.bias) append_f32_le(blob, v);
    }
    return blob;
}

std::vector<double> forward(const ModelSpec& model, const Tensor& input) {
    shape_chain(model);  // validates the layer chain before any work
    if (input.height != model.input_h || input.width != model.input_w ||
        input.channels != model.input_c) {
        throw std::invalid_argument(
            "forward: input " + std::to_string(input.height) + "x" +
            std::to_string(input.width) + "x" + std::to_string(input.channels) +
            " does not match model input " + std::to_string(model.input_h) + "x" +
            std::to_string(model.input_w) + "x" + std::to_string(model.input_c));
    }

    std::variant<Tensor, std::vector<double>> value = input;
    for (std::size_t i = 0; i < model.layers.size(); ++i) {
        const LayerSpec& layer = model.layers[i];
        if (layer.parameter_count() > 0 && layer.weights.empty()) {
            throw std::runtime_error("forward: layer " + std::to_string(i) +
                                     " has no weights loaded");
        }
        switch (layer.kind) {
            case LayerKind::conv: {
                Kernel kernel(layer.kh, layer.kw, layer.in_channels, layer.out_channels,
                              layer.weights, layer.bias);
                value = conv2d(std::get<Tensor>(value), kernel, layer.stride);
                break;
            }
            case LayerKind::maxpool:
                value = maxpool2d(std::get<Tensor>(value), layer.ph, layer.pw);
                break;
            case LayerKind::flatten:
                value = flatten(std::get<Tensor>(value));
                break;
            case LayerKind::dense: {
                Matrix weights(layer.out_dim, layer.in_dim, layer.weights);
                value = dense(std::get<std::vector<double>>(value), weights, layer.bias);
                break;
            }
            case LayerKind::relu:
                if (std::holds_alternative<Tensor>(value)) {
                    Tensor& t = std::get<Tensor>(value);
                    value = Tensor(t.height, t.width, t.channels, relu(std::move(t.data)));
                } else {
                    value = relu(std::move(std::get<std::vector<double>>(value)));
                }
                break;
            case LayerKind::softmax:
                value = softmax(std::get<std::vector<double>>(value));
                break;
        }
    }
    return std::get<std::vector<double>>(value);
}

FrameVerdict classify_frame(const ModelSpec& model, const Frame& frame) {
    const Tensor input = to_tensor(frame, model.input_h, model.input_w);
    FrameVerdict verdict;
    verdict.frame = frame.index;
    verdict.probabilities = forward(model, input);

    std::size_t best = 0;
    for (std::size_t i = 1; i < verdict.probabilities.size(); ++i) {
        if (verdict.probabilities[i] > verdict.probabilities[best]) {
            best = i;  // strict > keeps the lowest index on ties
        }
    }
    verdict.predicted_label =
        best < model.class_labels.size() ? model.class_labels[best] : std::to_string(best);

    verdict.crime_probability = 0.0;
    for (std::size_t i = 0; i < model.class_labels.size(); ++i) {
        if (model.class_labels[i] == "crime") {
            verdict.crime_probability = verdict.probabilities[i];
            break;
        }
    }
    return verdict;
}

AlarmAggregator::AlarmAggregator(std::size_t window, std::size_t trigger)
    : window_(window), trigger_(trigger) {
    if (trigger_ < 1 || trigger_ > window_) {
        throw std::invalid_argument("AlarmAggregator: requires 1 <= trigger <= window");
    }
}

bool AlarmAggregator::observe(bool crime_flag) {
    flags_.push_back(crime_flag);
    if (crime_flag) ++set_;
    if (flags_.size() > window_) {
        if (flags_.front()) --set_;
        flags_.pop_front();
    }
    return set_ >= trigger_;
}

bool aggregate(AlarmAggregator& agg, const FrameVerdict& verdict, double frame_threshold) {
    if (!(frame_threshold >= 0.0 && frame_threshold <= 1.0)) {
        throw std::invalid_argument("aggregate: frame_threshold must lie in [0,1]");
    }
    return agg.observe(verdict.crime_probability >= frame_threshold);
}

ModelSpec intensity_model(std::size_t input_h, std::size_t input_w) {
    const std::size_t n = input_h * input_w;
    // Logits are +/-(8 * mean - 4), so the crime probability is a sigmoid of
    // the mean pixel intensity: ~0.0003 at mean 0, exactly 0.5 at mean 0.5,
    // ~0.9997 at mean 1. Weights are kept float32-exact for stable files.
    const double w = static_cast<double>(static_cast<float>(8.0 / static_cast<double>(n)));

    ModelSpec m;
    m.name = "intensity-reference";
    m.input_h = input_h;
    m.input_w = input_w;
    m.input_c = 1;
    m.class_labels = {"normal", "crime"};

    m.layers.push_back(LayerSpec{.kind = LayerKind::flatten});

    LayerSpec fc;
    fc.kind = LayerKind::dense;
    fc.in_dim = n;
    fc.out_dim = 2;
    fc.weights.resize(2 * n);
    for (std::size_t j = 0; j < n; ++j) {
        fc.weights[j] = -w;      // row 0: "normal"
        fc.weights[n + j] = w;   // row 1: "crime"
    }
    fc.bias = {4.0, -4.0};
    m.layers.push_back(std::move(fc));

    m.layers.push_back(LayerSpec{.kind = LayerKind::softmax});
    return m;
}

}  // namespace sentinel
