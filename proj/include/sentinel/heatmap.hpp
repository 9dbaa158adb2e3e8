#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "sentinel/detector.hpp"

namespace sentinel {

/// G x G accumulation of detection activity over the monitored space.
struct HeatmapGrid {
    std::size_t side = 32;
    std::vector<double> bins;  // row-major, side * side, non-negative counts
    std::size_t frames_seen = 0;

    explicit HeatmapGrid(std::size_t g = 32);

    double& bin(std::size_t row, std::size_t col) { return bins[row * side + col]; }
    double bin(std::size_t row, std::size_t col) const { return bins[row * side + col]; }
    double total() const;
};

/// Bin each detection center (index per axis: min(floor(center * G), G-1))
/// and count one frame seen. An empty list still counts the frame.
void accumulate(HeatmapGrid& grid, const std::vector<Detection>& detections);

/// Elementwise sum of two equal-sided grids; associative and commutative.
HeatmapGrid merge(const HeatmapGrid& a, const HeatmapGrid& b);

/// Bins divided by the maximum bin, in [0,1]; an all-zero grid maps to zeros.
std::vector<double> normalize(const HeatmapGrid& grid);

/// 5-stop linear gradient black -> blue -> green -> yellow -> red with stops
/// at 0, 0.25, 0.5, 0.75, 1.0; components rounded half-up.
std::array<std::uint8_t, 3> heat_color(double intensity);

/// Render as binary P6: G*cell_px square, each cell filled with the color of
/// its normalized intensity. A pure function of the grid.
std::vector<std::uint8_t> render_ppm(const HeatmapGrid& grid, std::size_t cell_px);

/// Grid state as JSON {"G":..,"frames_seen":..,"bins":[row-major]}.
std::string grid_to_json(const HeatmapGrid& grid);
HeatmapGrid grid_from_json(std::string_view json_text);

}  // namespace sentinel
