#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "apifk/predictor/quantize.hpp"

namespace apifk::predictor {

// features x length, row-major.
struct Matrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> data;

  Matrix() = default;
  Matrix(std::size_t r, std::size_t c, double fill = 0.0) : rows(r), cols(c), data(r * c, fill) {}

  void resize(std::size_t r, std::size_t c) {
    rows = r;
    cols = c;
    data.assign(r * c, 0.0);
  }
  double& operator()(std::size_t r, std::size_t c) { return data[r * cols + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data[r * cols + c]; }
  double* row(std::size_t r) { return data.data() + r * cols; }
  const double* row(std::size_t r) const { return data.data() + r * cols; }
};

// Weights are laid out [out][in][k]; bias is [out].
struct ConvShape {
  std::size_t in_features = 0;
  std::size_t out_features = 0;
  std::size_t kernel = 1;
  std::size_t stride = 1;

  std::size_t weight_count() const { return out_features * in_features * kernel; }
};

// floor((length - kernel) / stride) + 1. Throws ShapeError when
// length < kernel or stride == 0.
std::size_t output_length(std::size_t length, std::size_t kernel, std::size_t stride);

// Temporal convolution with offset c = k - d + 1 (1-based):
//   h_j(y) = b_j + sum_i sum_{x=1..k} f_ij(x) * g_i(y*d - x + c)
// which, 0-based, reads input position y*d + (k-1-x) for kernel tap x.
void conv1d_forward(const Matrix& input, std::span<const double> weights,
                    std::span<const double> bias, const ConvShape& shape, Matrix& out);
Matrix conv1d_forward(const Matrix& input, std::span<const double> weights,
                      std::span<const double> bias, const ConvShape& shape);

// Same computation with a sparse one-hot input.
void conv1d_forward_onehot(const QuantizedInput& input, std::span<const double> weights,
                           std::span<const double> bias, const ConvShape& shape, Matrix& out);

// Accumulates into dweights/dbias; dinput (if given) is overwritten.
void conv1d_backward(const Matrix& input, std::span<const double> weights,
                     const ConvShape& shape, const Matrix& dout, std::span<double> dweights,
                     std::span<double> dbias, Matrix* dinput);

void conv1d_backward_onehot(const QuantizedInput& input, const ConvShape& shape,
                            const Matrix& dout, std::span<double> dweights,
                            std::span<double> dbias);

// h(y) = max_{x=1..k} g(y*d - x + c). argmax receives the input column of
// each output cell (the lowest column on ties).
void maxpool1d(const Matrix& input, std::size_t kernel, std::size_t stride, Matrix& out,
               std::vector<std::uint32_t>& argmax);
Matrix maxpool1d(const Matrix& input, std::size_t kernel, std::size_t stride);

// dinput is resized to (rows, input_cols) and overwritten.
void maxpool1d_backward(const Matrix& dout, const std::vector<std::uint32_t>& argmax,
                        std::size_t input_cols, Matrix& dinput);

inline double relu(double x) { return x > 0.0 ? x : 0.0; }
void relu_inplace(std::span<double> values);
// Zeroes grad where the activated output is not positive.
void relu_backward(std::span<const double> activated, std::span<double> grad);

// out = W x + b with W laid out [out][in].
void dense_forward(std::span<const double> input, std::span<const double> weights,
                   std::span<const double> bias, std::span<double> out);
// Accumulates into dweights/dbias; dinput (if non-empty) is overwritten.
void dense_backward(std::span<const double> input, std::span<const double> weights,
                    std::span<const double> dout, std::span<double> dweights,
                    std::span<double> dbias, std::span<double> dinput);

// Numerically stable normalized exponential.
void softmax(std::span<const double> logits, std::span<double> probabilities);

}  // namespace apifk::predictor
