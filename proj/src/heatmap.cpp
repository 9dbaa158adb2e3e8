#include "sentinel/heatmap.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <json.hpp>

namespace sentinel {

namespace {

using nlohmann::json;

// Gradient stops at 0, 0.25, 0.5, 0.75, 1: black, blue, green, yellow, red.
constexpr std::array<std::array<double, 3>, 5> kStops{{
    {0.0, 0.0, 0.0},
    {0.0, 0.0, 255.0},
    {0.0, 255.0, 0.0},
    {255.0, 255.0, 0.0},
    {255.0, 0.0, 0.0},
}};

std::uint8_t round_byte(double v) {
    return static_cast<std::uint8_t>(std::floor(v + 0.5));
}

}  // namespace

HeatmapGrid::HeatmapGrid(std::size_t g) : side(g), bins(g * g, 0.0) {
    if (g == 0) {
        throw std::invalid_argument("HeatmapGrid: side must be positive");
    }
}

double HeatmapGrid::total() const {
    double sum = 0.0;
    for (double b : bins) sum += b;
    return sum;
}

void accumulate(HeatmapGrid& grid, const std::vector<Detection>& detections) {
    const auto bin_index = [&grid](double center) {
        const double scaled = center * static_cast<double>(grid.side);
        const auto idx = static_cast<std::size_t>(std::max(0.0, std::floor(scaled)));
        return std::min(idx, grid.side - 1);
    };
    for (const Detection& det : detections) {
        grid.bin(bin_index(det.bbox.center_y()), bin_index(det.bbox.center_x())) += 1.0;
    }
    ++grid.frames_seen;
}

HeatmapGrid merge(const HeatmapGrid& a, const HeatmapGrid& b) {
    if (a.side != b.side) {
        throw std::invalid_argument("merge: grids must share one side length");
    }
    HeatmapGrid out(a.side);
    for (std::size_t i = 0; i < out.bins.size(); ++i) {
        out.bins[i] = a.bins[i] + b.bins[i];
    }
    out.frames_seen = a.frames_seen + b.frames_seen;
    return out;
}

std::vector<double> normalize(const HeatmapGrid& grid) {
    const double peak = *std::max_element(grid.bins.begin(), grid.bins.end());
    std::vector<double> out(grid.bins.size(), 0.0);
    if (peak <= 0.0) {
        return out;
    }
    for (std::size_t i = 0; i < out.size(); ++i) {
        out[i] = grid.bins[i] / peak;
    }
    return out;
}

std::array<std::uint8_t, 3> heat_color(double intensity) {
    if (!std::isfinite(intensity)) {
        throw std::invalid_argument("heat_color: intensity must be finite");
    }
    const double v = std::clamp(intensity, 0.0, 1.0);
    const double pos = v * 4.0;
    const auto lo = std::min(static_cast<std::size_t>(std::floor(pos)), std::size_t{3});
    const double t = pos - static_cast<double>(lo);

    std::array<std::uint8_t, 3> rgb{};
    for (std::size_t ch = 0; ch < 3; ++ch) {
        rgb[ch] = round_byte(kStops[lo][ch] + (kStops[lo + 1][ch] - kStops[lo][ch]) * t);
    }
    return rgb;
}

std::vector<std::uint8_t> render_ppm(const HeatmapGrid& grid, std::size_t cell_px) {
    if (cell_px == 0) {
        throw std::invalid_argument("render_ppm: cell_px must be positive");
    }
    const std::vector<double> level = normalize(grid);
    const std::size_t dim = grid.side * cell_px;

    std::string header = "P6\n" + std::to_string(dim) + " " + std::to_string(dim) + "\n255\n";
    std::vector<std::uint8_t> out(header.begin(), header.end());
    out.reserve(header.size() + dim * dim * 3);

    for (std::size_t py = 0; py < dim; ++py) {
        const std::size_t row = py / cell_px;
        for (std::size_t px = 0; px < dim; ++px) {
            const std::size_t col = px / cell_px;
            const auto rgb = heat_color(level[row * grid.side + col]);
            out.push_back(rgb[0]);
            out.push_back(rgb[1]);
            out.push_back(rgb[2]);
        }
    }
    return out;
}

std::string grid_to_json(const HeatmapGrid& grid) {
    const json doc{{"G", grid.side}, {"frames_seen", grid.frames_seen}, {"bins", grid.bins}};
    return doc.dump();
}

HeatmapGrid grid_from_json(std::string_view json_text) {
    json doc;
    try {
        doc = json::parse(json_text);
    } catch (const json::exception& e) {
        throw std::runtime_error(std::string("heatmap grid: malformed JSON: ") + e.what());
    }
    if (!doc.is_object() || !doc.contains("G") || !doc["G"].is_number_unsigned() ||
        !doc.contains("frames_seen") || !doc["frames_seen"].is_number_unsigned() ||
        !doc.contains("bins") || !doc["bins"].is_array()) {
        throw std::runtime_error("heatmap grid: document must carry G, frames_seen and bins");
    }
    HeatmapGrid grid(doc["G"].get<std::size_t>());
    if (doc["bins"].size() != grid.bins.size()) {
        throw std::runtime_error("heatmap grid: expected " + std::to_string(grid.bins.size()) +
                                 " bins, got " + std::to_string(doc["bins"].size()));
    }
    for (std::size_t i = 0; i < grid.bins.size(); ++i) {
        const auto& v = doc["bins"][i];
        if (!v.is_number() || v.get<double>() < 0.0) {
            throw std::runtime_error("heatmap grid: bins must be non-negative numbers");
        }
        grid.bins[i] = v.get<double>();
    }
    grid.frames_seen = doc["frames_seen"].get<std::size_t>();
    return grid;
}

}  // namespace sentinel
