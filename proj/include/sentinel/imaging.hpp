#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "sentinel/tensor.hpp"

namespace sentinel {

/// One decoded image of a monitored sequence. Pixels are row-major,
/// channel-minor doubles in [0,1]; channels is 1 (grayscale) or 3 (RGB).
struct Frame {
    std::size_t width = 0;
    std::size_t height = 0;
    std::size_t channels = 1;
    std::vector<double> pixels;
    std::size_t index = 0;
    std::string label;

    Frame() = default;
    Frame(std::size_t w, std::size_t h, std::size_t c, std::vector<double> px);

    double at(std::size_t row, std::size_t col, std::size_t ch) const {
        return pixels[(row * width + col) * channels + ch];
    }
};

/// Decode a binary netpbm image: P5 (grayscale) or P6 (RGB), maxval 1..255,
/// "#" comment lines permitted between header tokens. Samples are divided by
/// maxval into [0,1].
Frame parse_netpbm(std::string_view bytes);
Frame parse_netpbm(const std::vector<std::uint8_t>& bytes);

/// Encode as binary P6, maxval 255, samples rounded half-up. Grayscale frames
/// are replicated across the three output channels.
std::vector<std::uint8_t> encode_ppm(const Frame& frame);

/// Ordered, single-consumer frame stream. Locators are visited in ascending
/// lexicographic order and yielded frames carry consecutive indices from 0.
class FrameSource {
  public:
    FrameSource() = default;
    explicit FrameSource(std::vector<std::filesystem::path> locators);

    /// Parse and return the next frame, or nullopt once exhausted. A file
    /// that fails to parse raises an error naming that file.
    std::optional<Frame> next();

    std::size_t size() const { return locators_.size(); }
    const std::vector<std::filesystem::path>& locators() const { return locators_; }

  private:
    std::vector<std::filesystem::path> locators_;
    std::size_t cursor_ = 0;
};

/// Scan a directory for files whose name matches the glob pattern.
FrameSource open_sequence(const std::filesystem::path& directory,
                          const std::string& pattern = "*");

/// Nearest-neighbor resample to target_h x target_w; the source index per
/// axis is floor(i * src / dst). Channels are preserved.
Tensor to_tensor(const Frame& frame, std::size_t target_h, std::size_t target_w);

}  // namespace sentinel
