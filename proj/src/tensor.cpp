#include "sentinel/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace sentinel {

namespace {

void require_finite(const std::vector<double>& values, const char* what) {
    for (double v : values) {
        if (!std::isfinite(v)) {
            throw std::invalid_argument(std::string(what) + ": values must be finite");
        }
    }
}

}  // namespace

Tensor::Tensor(std::size_t h, std::size_t w, std::size_t c)
    : height(h), width(w), channels(c), data(h * w * c, 0.0) {}

Tensor::Tensor(std::size_t h, std::size_t w, std::size_t c, std::vector<double> values)
    : height(h), width(w), channels(c), data(std::move(values)) {
    if (data.size() != h * w * c) {
        throw std::invalid_argument("Tensor: data length " + std::to_string(data.size()) +
                                    " does not match " + std::to_string(h) + "x" +
                                    std::to_string(w) + "x" + std::to_string(c));
    }
    require_finite(data, "Tensor");
}

Kernel::Kernel(std::size_t kh_, std::size_t kw_, std::size_t in_c, std::size_t out_c,
               std::vector<double> weights_, std::vector<double> bias_)
    : kh(kh_), kw(kw_), in_channels(in_c), out_channels(out_c),
      weights(std::move(weights_)), bias(std::move(bias_)) {
    if (kh == 0 || kw == 0 || in_channels == 0 || out_channels == 0) {
        throw std::invalid_argument("Kernel: extents and channel counts must be positive");
    }
    if (weights.size() != kh * kw * in_channels * out_channels) {
        throw std::invalid_argument("Kernel: weight count " + std::to_string(weights.size()) +
                                    " does not match " + std::to_string(kh) + "x" +
                                    std::to_string(kw) + "x" + std::to_string(in_channels) +
                                    "x" + std::to_string(out_channels));
    }
    if (bias.size() != out_channels) {
        throw std::invalid_argument("Kernel: bias length must equal out_channels");
    }
    require_finite(weights, "Kernel");
    require_finite(bias, "Kernel");
}

Matrix::Matrix(std::size_t rows_, std::size_t cols_, std::vector<double> values_)
    : rows(rows_), cols(cols_), values(std::move(values_)) {
    if (values.size() != rows * cols) {
        throw std::invalid_argument("Matrix: value count does not match " +
                                    std::to_string(rows) + "x" + std::to_string(cols));
    }
    require_finite(values, "Matrix");
}

Tensor conv2d(const Tensor& input, const Kernel& kernel, std::size_t stride) {
    if (stride < 1) {
        throw std::invalid_argument("conv2d: stride must be >= 1");
    }
    if (kernel.in_channels != input.channels) {
        throw std::invalid_argument("conv2d: kernel expects " +
                                    std::to_string(kernel.in_channels) +
                                    " input channels, tensor has " +
                                    std::to_string(input.channels));
    }
    if (kernel.kh > input.height || kernel.kw > input.width) {
        throw std::invalid_argument("conv2d: kernel " + std::to_string(kernel.kh) + "x" +
                                    std::to_string(kernel.kw) + " exceeds input " +
                                    std::to_string(input.height) + "x" +
                                    std::to_string(input.width));
    }

    const std::size_t out_h = (input.height - kernel.kh) / stride + 1;
    const std::size_t out_w = (input.width - kernel.kw) / stride + 1;
    std::vector<double> out(out_h * out_w * kernel.out_channels);

    for (std::size_t r = 0; r < out_h; ++r) {
        for (std::size_t c = 0; c < out_w; ++c) {
            for (std::size_t oc = 0; oc < kernel.out_channels; ++oc) {
                // Canonical summation order: kernel row, kernel column, channel.
                double acc = 0.0;
                for (std::size_t kr = 0; kr < kernel.kh; ++kr) {
                    for (std::size_t kc = 0; kc < kernel.kw; ++kc) {
                        for (std::size_t ic = 0; ic < kernel.in_channels; ++ic) {
                            acc += input.at(r * stride + kr, c * stride + kc, ic) *
                                   kernel.weight(kr, kc, ic, oc);
                        }
                    }
                }
                out[(r * out_w + c) * kernel.out_channels + oc] = acc + kernel.bias[oc];
            }
        }
    }
    return Tensor(out_h, out_w, kernel.out_channels, std::move(out));
}

Tensor maxpool2d(const Tensor& input, std::size_t ph, std::size_t pw) {
    if (ph == 0 || pw == 0) {
        throw std::invalid_argument("maxpool2d: window extents must be >= 1");
    }
    if (ph > input.height || pw > input.width) {
        throw std::invalid_argument("maxpool2d: window " + std::to_string(ph) + "x" +
                                    std::to_string(pw) + " exceeds input " +
                                    std::to_string(input.height) + "x" +
                                    std::to_string(input.width));
    }

    const std::size_t out_h = input.height / ph;
    const std::size_t out_w = input.width / pw;
    std::vector<double> out(out_h * out_w * input.channels);

    for (std::size_t r = 0; r < out_h; ++r) {
        for (std::size_t c = 0; c < out_w; ++c) {
            for (std::size_t ch = 0; ch < input.channels; ++ch) {
                double best = input.at(r * ph, c * pw, ch);
                for (std::size_t wr = 0; wr < ph; ++wr) {
                    for (std::size_t wc = 0; wc < pw; ++wc) {
                        best = std::max(best, input.at(r * ph + wr, c * pw + wc, ch));
                    }
                }
                out[(r * out_w + c) * input.channels + ch] = best;
            }
        }
    }
    return Tensor(out_h, out_w, input.channels, std::move(out));
}

std::vector<double> flatten(const Tensor& input) {
    return input.data;  // storage is already row-major, channel-minor
}

std::vector<double> dense(const std::vector<double>& input, const Matrix& weights,
                          const std::vector<double>& bias) {
    if (weights.cols != input.size()) {
        throw std::invalid_argument("dense: weight matrix has " + std::to_string(weights.cols) +
                                    " columns, input has " + std::to_string(input.size()) +
                                    " elements");
    }
    if (bias.size() != weights.rows) {
        throw std::invalid_argument("dense: bias length must equal weight row count");
    }

    std::vector<double> out(weights.rows);
    for (std::size_t i = 0; i < weights.rows; ++i) {
        double acc = 0.0;
        for (std::size_t j = 0; j < weights.cols; ++j) {
            acc += weights.at(i, j) * input[j];
        }
        out[i] = acc + bias[i];
    }
    return out;
}

std::vector<double> relu(std::vector<double> input) {
    for (double& v : input) {
        v = std::max(v, 0.0);
    }
    return input;
}

std::vector<double> softmax(const std::vector<double>& input) {
    if (input.empty()) {
        throw std::invalid_argument("softmax: input must be non-empty");
    }
    require_finite(input, "softmax");

    const double shift = *std::max_element(input.begin(), input.end());
    std::vector<double> out(input.size());
    double sum = 0.0;
    for (std::size_t i = 0; i < input.size(); ++i) {
        out[i] = std::exp(input[i] - shift);
        sum += out[i];
    }
    for (double& v : out) {
        v /= sum;
    }
    return out;
}

std::uint64_t dense_weight_count(std::uint64_t inputs, std::uint64_t outputs) {
    return inputs * outputs;
}

}  // namespace sentinel
