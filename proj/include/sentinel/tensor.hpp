#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

namespace sentinel {

/// Dense H x W x C array of doubles, row-major with the channel as the
/// fastest-varying axis. Every element is finite; validated on construction.
struct Tensor {
    std::size_t height = 0;
    std::size_t width = 0;
    std::size_t channels = 0;
    std::vector<double> data;

    Tensor() = default;
    Tensor(std::size_t h, std::size_t w, std::size_t c);  // zero-filled
    Tensor(std::size_t h, std::size_t w, std::size_t c, std::vector<double> values);

    std::size_t size() const { return data.size(); }

    double& at(std::size_t row, std::size_t col, std::size_t ch) {
        return data[(row * width + col) * channels + ch];
    }
    double at(std::size_t row, std::size_t col, std::size_t ch) const {
        return data[(row * width + col) * channels + ch];
    }
};

/// Convolution weights: kh x kw window mapping in_channels to out_channels.
/// Weight layout is [kernel row][kernel col][in channel][out channel].
struct Kernel {
    std::size_t kh = 0;
    std::size_t kw = 0;
    std::size_t in_channels = 0;
    std::size_t out_channels = 0;
    std::vector<double> weights;
    std::vector<double> bias;

    Kernel() = default;
    Kernel(std::size_t kh, std::size_t kw, std::size_t in_c, std::size_t out_c,
           std::vector<double> weights, std::vector<double> bias);

    double weight(std::size_t kr, std::size_t kc, std::size_t ic, std::size_t oc) const {
        return weights[((kr * kw + kc) * in_channels + ic) * out_channels + oc];
    }
};

/// Row-major rows x cols matrix of doubles.
struct Matrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> values;

    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols, std::vector<double> values);

    double at(std::size_t r, std::size_t c) const { return values[r * cols + c]; }
};

/// Valid-padding cross-correlation (no kernel flip). Output dims are
/// floor((in - k) / stride) + 1 per spatial axis.
Tensor conv2d(const Tensor& input, const Kernel& kernel, std::size_t stride = 1);

/// Max pooling with stride equal to the window; trailing rows/columns that do
/// not fill a full window are dropped.
Tensor maxpool2d(const Tensor& input, std::size_t ph, std::size_t pw);

/// Row-major, channel-minor unrolling of the tensor into a vector.
std::vector<double> flatten(const Tensor& input);

/// output[i] = sum_j weights(i, j) * input[j] + bias[i].
std::vector<double> dense(const std::vector<double>& input, const Matrix& weights,
                          const std::vector<double>& bias);

std::vector<double> relu(std::vector<double> input);

/// Shift-stable softmax: subtracts the max before exponentiation.
std::vector<double> softmax(const std::vector<double>& input);

/// Fully-connected weight count, biases excluded: inputs * outputs.
std::uint64_t dense_weight_count(std::uint64_t inputs, std::uint64_t outputs);

}  // namespace sentinel
