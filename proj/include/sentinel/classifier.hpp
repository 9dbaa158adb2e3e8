#pragma once

#include <cstdint>
#include <deque>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "sentinel/imaging.hpp"
#include "sentinel/tensor.hpp"

namespace sentinel {

enum class LayerKind { conv, maxpool, flatten, dense, relu, softmax };

std::string_view layer_kind_name(LayerKind kind);

/// One layer of a model. Only the fields for the layer's kind are meaningful;
/// weights/bias are empty until a weight blob has been attached.
struct LayerSpec {
    LayerKind kind = LayerKind::flatten;
    std::size_t kh = 0, kw = 0, in_channels = 0, out_channels = 0, stride = 1;  // conv
    std::size_t ph = 0, pw = 0;                                                 // maxpool
    std::size_t in_dim = 0, out_dim = 0;                                        // dense
    std::vector<double> weights;
    std::vector<double> bias;

    /// Parameters implied by the declared dims (weights plus bias).
    std::uint64_t parameter_count() const;
};

struct ModelSpec {
    std::string name;
    std::size_t input_h = 0, input_w = 0, input_c = 0;
    std::vector<LayerSpec> layers;
    std::vector<std::string> class_labels;

    std::uint64_t parameter_count() const;
    bool has_weights() const;
};

/// Value shape between layers: a tensor until flatten, a vector afterwards.
struct StageShape {
    bool flat = false;
    std::size_t h = 0, w = 0, c = 0;
    std::size_t len = 0;
};

/// Validate the layer chain of a model and return the shape entering each
/// layer plus the final output shape ([0] is the model input; size is
/// layers + 1). Throws on any break in the chain.
std::vector<StageShape> shape_chain(const ModelSpec& model);

/// Parsed manifest: the weightless model plus the blob metadata it declares.
struct Manifest {
    ModelSpec spec;
    std::uint64_t declared_parameter_count = 0;
    bool has_checksum = false;   // manifests without a bundled blob carry null
    std::uint32_t weight_checksum = 0;
};

Manifest parse_manifest(std::string_view manifest_json);

/// Parse the manifest, validate the blob (length and CRC32) and attach the
/// 32-bit stored weights widened to doubles.
ModelSpec load_model(std::string_view manifest_json, std::span<const std::uint8_t> weight_blob);

/// Load from a manifest path; the weight blob is the sibling file with the
/// extension replaced by ".weights".
ModelSpec load_model_file(const std::filesystem::path& manifest_path);

/// Canonical manifest JSON (sorted keys, checksum and parameter count
/// computed from the attached weights). load + re-serialize is byte-stable.
std::string serialize_manifest(const ModelSpec& model);

/// Weight blob: little-endian IEEE-754 float32, layers concatenated in order,
/// within each layer weights then bias in canonical order.
std::vector<std::uint8_t> serialize_weights(const ModelSpec& model);

/// Run the layer stack on an input tensor of the model's declared dims.
std::vector<double> forward(const ModelSpec& model, const Tensor& input);

struct FrameVerdict {
    std::size_t frame = 0;
    std::vector<double> probabilities;
    std::string predicted_label;
    double crime_probability = 0.0;
};

/// Resize the frame to the model input dims, run forward, and take the argmax
/// label (ties break toward the lowest class index).
FrameVerdict classify_frame(const ModelSpec& model, const Frame& frame);

/// k-of-N windowed alarm rule over per-frame crime flags.
class AlarmAggregator {
  public:
    AlarmAggregator(std::size_t window, std::size_t trigger);

    /// Push one frame's flag; returns whether the alarm condition holds.
    bool observe(bool crime_flag);

    std::size_t window() const { return window_; }
    std::size_t trigger() const { return trigger_; }
    std::size_t flags_set() const { return set_; }

  private:
    std::size_t window_ = 1;
    std::size_t trigger_ = 1;
    std::size_t set_ = 0;
    std::deque<bool> flags_;
};

/// Flag the verdict against the per-frame threshold (crime probability >=
/// threshold) and advance the aggregator exactly one frame.
bool aggregate(AlarmAggregator& agg, const FrameVerdict& verdict, double frame_threshold);

/// Hand-constructed reference classifier: flatten -> dense -> softmax with
/// weights chosen so the "crime" probability increases with mean pixel
/// intensity and is exactly 0.5 at mean 0.5. Deterministic, training-free.
ModelSpec intensity_model(std::size_t input_h = 4, std::size_t input_w = 4);

}  // namespace sentinel
