#include "sentinel/imaging.hpp"

#include <fnmatch.h>

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "file_util.hpp"

namespace sentinel {

namespace {

bool is_pbm_ws(char c) {
    return c == ' ' || c == '\t' || c == '\r' || c == '\n' || c == '\v' || c == '\f';
}

struct HeaderScanner {
    std::string_view text;
    std::size_t pos = 0;

    // Whitespace runs and "#" comments (to end of line) separate header tokens.
    void skip_separators() {
        while (pos < text.size()) {
            if (is_pbm_ws(text[pos])) {
                ++pos;
            } else if (text[pos] == '#') {
                while (pos < text.size() && text[pos] != '\n') ++pos;
            } else {
                break;
            }
        }
    }

    unsigned read_uint(const char* what) {
        skip_separators();
        if (pos >= text.size() || text[pos] < '0' || text[pos] > '9') {
            throw std::runtime_error(std::string("netpbm: expected ") + what + " in header");
        }
        unsigned value = 0;
        while (pos < text.size() && text[pos] >= '0' && text[pos] <= '9') {
            value = value * 10 + static_cast<unsigned>(text[pos] - '0');
            if (value > 1'000'000'000u) {
                throw std::runtime_error(std::string("netpbm: ") + what + " out of range");
            }
            ++pos;
        }
        return value;
    }
};

}  // namespace

Frame::Frame(std::size_t w, std::size_t h, std::size_t c, std::vector<double> px)
    : width(w), height(h), channels(c), pixels(std::move(px)) {
    if (width == 0 || height == 0) {
        throw std::invalid_argument("Frame: dimensions must be positive");
    }
    if (channels != 1 && channels != 3) {
        throw std::invalid_argument("Frame: channels must be 1 or 3");
    }
    if (pixels.size() != width * height * channels) {
        throw std::invalid_argument("Frame: pixel count does not match dimensions");
    }
    for (double v : pixels) {
        if (!(v >= 0.0 && v <= 1.0)) {
            throw std::invalid_argument("Frame: pixel values must lie in [0,1]");
        }
    }
}

Frame parse_netpbm(std::string_view bytes) {
    if (bytes.size() < 2) {
        throw std::runtime_error("netpbm: input too short for a magic number");
    }
    const std::string_view magic = bytes.substr(0, 2);
    std::size_t channels = 0;
    if (magic == "P5") {
        channels = 1;
    } else if (magic == "P6") {
        channels = 3;
    } else {
        throw std::runtime_error("netpbm: unsupported magic '" + std::string(magic) +
                                 "' (expected binary P5 or P6)");
    }

    HeaderScanner scan{bytes, 2};
    const unsigned width = scan.read_uint("width");
    const unsigned height = scan.read_uint("height");
    const unsigned maxval = scan.read_uint("maxval");
    if (width == 0 || height == 0) {
        throw std::runtime_error("netpbm: image dimensions must be positive");
    }
    if (maxval < 1 || maxval > 255) {
        throw std::runtime_error("netpbm: maxval " + std::to_string(maxval) +
                                 " outside the supported range 1..255");
    }
    // Exactly one whitespace byte separates the maxval token from the payload.
    if (scan.pos >= bytes.size() || !is_pbm_ws(bytes[scan.pos])) {
        throw std::runtime_error("netpbm: missing whitespace after maxval");
    }
    ++scan.pos;

    const std::size_t need = static_cast<std::size_t>(width) * height * channels;
    if (bytes.size() - scan.pos < need) {
        throw std::runtime_error("netpbm: truncated pixel payload (have " +
                                 std::to_string(bytes.size() - scan.pos) + " of " +
                                 std::to_string(need) + " bytes)");
    }

    std::vector<double> pixels(need);
    for (std::size_t i = 0; i < need; ++i) {
        const auto sample = static_cast<unsigned char>(bytes[scan.pos + i]);
        if (sample > maxval) {
            throw std::runtime_error("netpbm: sample value " + std::to_string(sample) +
                                     " exceeds maxval " + std::to_string(maxval));
        }
        pixels[i] = static_cast<double>(sample) / static_cast<double>(maxval);
    }
    return Frame(width, height, channels, std::move(pixels));
}

Frame parse_netpbm(const std::vector<std::uint8_t>& bytes) {
    return parse_netpbm(std::string_view(reinterpret_cast<const char*>(bytes.data()),
                                         bytes.size()));
}

std::vector<std::uint8_t> encode_ppm(const Frame& frame) {
    const std::string header = "P6\n" + std::to_string(frame.width) + " " +
                               std::to_string(frame.height) + "\n255\n";
    std::vector<std::uint8_t> out(header.begin(), header.end());
    out.reserve(out.size() + frame.width * frame.height * 3);

    auto to_byte = [](double v) {
        return static_cast<std::uint8_t>(std::floor(v * 255.0 + 0.5));  // round half-up
    };
    for (std::size_t r = 0; r < frame.height; ++r) {
        for (std::size_t c = 0; c < frame.width; ++c) {
            if (frame.channels == 3) {
                out.push_back(to_byte(frame.at(r, c, 0)));
                out.push_back(to_byte(frame.at(r, c, 1)));
                out.push_back(to_byte(frame.at(r, c, 2)));
            } else {
                const std::uint8_t g = to_byte(frame.at(r, c, 0));
                out.push_back(g);
                out.push_back(g);
                out.push_back(g);
            }
        }
    }
    return out;
}

FrameSource::FrameSource(std::vector<std::filesystem::path> locators)
    : locators_(std::move(locators)) {
    std::sort(locators_.begin(), locators_.end(),
              [](const auto& a, const auto& b) { return a.generic_string() < b.generic_string(); });
}

std::optional<Frame> FrameSource::next() {
    if (cursor_ >= locators_.size()) {
        return std::nullopt;
    }
    const std::filesystem::path& locator = locators_[cursor_];
    Frame frame;
    try {
        frame = parse_netpbm(detail::read_file_bytes(locator));
    } catch (const std::exception& e) {
        throw std::runtime_error(locator.filename().string() + ": " + e.what());
    }
    frame.index = cursor_;
    frame.label = locator.filename().string();
    ++cursor_;
    return frame;
}

FrameSource open_sequence(const std::filesystem::path& directory, const std::string& pattern) {
    std::error_code ec;
    if (!std::filesystem::is_directory(directory, ec)) {
        throw std::runtime_error("open_sequence: not a readable directory: " +
                                 directory.string());
    }
    std::vector<std::filesystem::path> locators;
    for (const auto& entry : std::filesystem::directory_iterator(directory)) {
        if (!entry.is_regular_file()) continue;
        const std::string name = entry.path().filename().string();
        if (fnmatch(pattern.c_str(), name.c_str(), 0) == 0) {
            locators.push_back(entry.path());
        }
    }
    return FrameSource(std::move(locators));
}

Tensor to_tensor(const Frame& frame, std::size_t target_h, std::size_t target_w) {
    if (target_h == 0 || target_w == 0) {
        throw std::invalid_argument("to_tensor: target dimensions must be >= 1");
    }
    std::vector<double> data(target_h * target_w * frame.channels);
    for (std::size_t r = 0; r < target_h; ++r) {
        const std::size_t sr = r * frame.height / target_h;
        for (std::size_t c = 0; c < target_w; ++c) {
            const std::size_t sc = c * frame.width / target_w;
            for (std::size_t ch = 0; ch < frame.channels; ++ch) {
                data[(r * target_w + c) * frame.channels + ch] = frame.at(sr, sc, ch);
            }
        }
    }
    return Tensor(target_h, target_w, frame.channels, std::move(data));
}

}  // namespace sentinel
