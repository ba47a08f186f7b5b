#include "apifk/predictor/layers.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include <Eigen/Core>

#include "apifk/errors.hpp"

namespace apifk::predictor {

namespace {

// Four independent accumulators; fixed order keeps results reproducible.
double strided_dot(const double* a, const double* b, std::size_t stride_b, std::size_t n) {
  double s0 = 0.0, s1 = 0.0, s2 = 0.0, s3 = 0.0;
  std::size_t y = 0;
  if (stride_b == 1) {
    for (; y + 4 <= n; y += 4) {
      s0 += a[y] * b[y];
      s1 += a[y + 1] * b[y + 1];
      s2 += a[y + 2] * b[y + 2];
      s3 += a[y + 3] * b[y + 3];
    }
  }
  for (; y < n; ++y) s0 += a[y] * b[y * stride_b];
  return (s0 + s1) + (s2 + s3);
}

using RowMajor = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using ConstMap = Eigen::Map<const RowMajor>;
using MutMap = Eigen::Map<RowMajor>;

// Row (i * k + x) holds tap x of input feature i at every output position,
// i.e. input[i][y * d + k - 1 - x], so the convolution is one matrix
// product with the [out][in][k] weight layout.
void im2col(const Matrix& input, const ConvShape& shape, std::size_t len,
            std::vector<double>& col) {
  const std::size_t k = shape.kernel;
  const std::size_t d = shape.stride;
  col.resize(shape.in_features * k * len);
  for (std::size_t i = 0; i < shape.in_features; ++i) {
    for (std::size_t x = 0; x < k; ++x) {
      const double* src = input.row(i) + (k - 1 - x);
      double* dst = col.data() + (i * k + x) * len;
      for (std::size_t y = 0; y < len; ++y) dst[y] = src[y * d];
    }
  }
}

void check_conv(const ConvShape& shape, std::size_t in_rows, std::size_t weights,
                std::size_t bias) {
  if (in_rows != shape.in_features) {
    throw ShapeError("conv input has " + std::to_string(in_rows) + " features, expected " +
                     std::to_string(shape.in_features));
  }
  if (weights != shape.weight_count() || bias != shape.out_features) {
    throw ShapeError("conv weight/bias size mismatch");
  }
}

}  // namespace

std::size_t output_length(std::size_t length, std::size_t kernel, std::size_t stride) {
  if (stride == 0 || kernel == 0) {
    throw ShapeError("kernel and stride must be positive");
  }
  if (length < kernel) {
    throw ShapeError("input length " + std::to_string(length) + " shorter than kernel " +
                     std::to_string(kernel));
  }
  return (length - kernel) / stride + 1;
}

void conv1d_forward(const Matrix& input, std::span<const double> weights,
                    std::span<const double> bias, const ConvShape& shape, Matrix& out) {
  check_conv(shape, input.rows, weights.size(), bias.size());
  const std::size_t len = output_length(input.cols, shape.kernel, shape.stride);
  thread_local std::vector<double> col;
  im2col(input, shape, len, col);
  out.resize(shape.out_features, len);
  const auto taps = static_cast<Eigen::Index>(shape.in_features * shape.kernel);
  MutMap o(out.data.data(), static_cast<Eigen::Index>(shape.out_features),
           static_cast<Eigen::Index>(len));
  o.noalias() = ConstMap(weights.data(), o.rows(), taps) * ConstMap(col.data(), taps, o.cols());
  for (std::size_t j = 0; j < shape.out_features; ++j) {
    double* row = out.row(j);
    for (std::size_t y = 0; y < len; ++y) row[y] += bias[j];
  }
}

Matrix conv1d_forward(const Matrix& input, std::span<const double> weights,
                      std::span<const double> bias, const ConvShape& shape) {
  Matrix out;
  conv1d_forward(input, weights, bias, shape, out);
  return out;
}

void conv1d_forward_onehot(const QuantizedInput& input, std::span<const double> weights,
                           std::span<const double> bias, const ConvShape& shape, Matrix& out) {
  check_conv(shape, input.alphabet_size, weights.size(), bias.size());
  const std::size_t k = shape.kernel;
  const std::size_t d = shape.stride;
  const std::size_t len = output_length(input.length(), k, d);
  const std::size_t tap_stride = shape.in_features * k;
  out.resize(shape.out_features, len);
  for (std::size_t j = 0; j < shape.out_features; ++j) {
    std::fill(out.row(j), out.row(j) + len, bias[j]);
  }
  for (std::size_t y = 0; y < len; ++y) {
    for (std::size_t x = 0; x < k; ++x) {
      const auto c = input.columns[y * d + (k - 1 - x)];
      if (c < 0) continue;
      const double* w = weights.data() + static_cast<std::size_t>(c) * k + x;
      for (std::size_t j = 0; j < shape.out_features; ++j) {
        out.data[j * len + y] += w[j * tap_stride];
      }
    }
  }
}

void conv1d_backward(const Matrix& input, std::span<const double> weights,
                     const ConvShape& shape, const Matrix& dout, std::span<double> dweights,
                     std::span<double> dbias, Matrix* dinput) {
  check_conv(shape, input.rows, weights.size(), dbias.size());
  const std::size_t k = shape.kernel;
  const std::size_t d = shape.stride;
  const std::size_t len = dout.cols;
  if (dout.rows != shape.out_features || len != output_length(input.cols, k, d) ||
      dweights.size() != weights.size()) {
    throw ShapeError("conv backward shape mismatch");
  }
  for (std::size_t j = 0; j < shape.out_features; ++j) {
    const double* go = dout.row(j);
    double sum = 0.0;
    for (std::size_t y = 0; y < len; ++y) sum += go[y];
    dbias[j] += sum;
  }
  thread_local std::vector<double> col;
  im2col(input, shape, len, col);
  const auto taps = static_cast<Eigen::Index>(shape.in_features * k);
  const auto rows = static_cast<Eigen::Index>(shape.out_features);
  const auto cols = static_cast<Eigen::Index>(len);
  ConstMap go(dout.data.data(), rows, cols);
  MutMap(dweights.data(), rows, taps).noalias() += go * ConstMap(col.data(), taps, cols).transpose();
  if (!dinput) return;

  thread_local std::vector<double> dcol;
  dcol.resize(static_cast<std::size_t>(taps) * len);
  MutMap(dcol.data(), taps, cols).noalias() = ConstMap(weights.data(), rows, taps).transpose() * go;
  dinput->resize(input.rows, input.cols);
  for (std::size_t i = 0; i < shape.in_features; ++i) {
    for (std::size_t x = 0; x < k; ++x) {
      const double* src = dcol.data() + (i * k + x) * len;
      double* dst = dinput->row(i) + (k - 1 - x);
      for (std::size_t y = 0; y < len; ++y) dst[y * d] += src[y];
    }
  }
}

void conv1d_backward_onehot(const QuantizedInput& input, const ConvShape& shape,
                            const Matrix& dout, std::span<double> dweights,
                            std::span<double> dbias) {
  const std::size_t k = shape.kernel;
  const std::size_t d = shape.stride;
  const std::size_t len = dout.cols;
  if (input.alphabet_size != shape.in_features || dout.rows != shape.out_features ||
      len != output_length(input.length(), k, d) || dweights.size() != shape.weight_count() ||
      dbias.size() != shape.out_features) {
    throw ShapeError("one-hot conv backward shape mismatch");
  }
  const std::size_t tap_stride = shape.in_features * k;
  for (std::size_t j = 0; j < shape.out_features; ++j) {
    const double* go = dout.row(j);
    double sum = 0.0;
    for (std::size_t y = 0; y < len; ++y) sum += go[y];
    dbias[j] += sum;
  }
  for (std::size_t y = 0; y < len; ++y) {
    for (std::size_t x = 0; x < k; ++x) {
      const auto c = input.columns[y * d + (k - 1 - x)];
      if (c < 0) continue;
      double* w = dweights.data() + static_cast<std::size_t>(c) * k + x;
      for (std::size_t j = 0; j < shape.out_features; ++j) {
        w[j * tap_stride] += dout.data[j * len + y];
      }
    }
  }
}

void maxpool1d(const Matrix& input, std::size_t kernel, std::size_t stride, Matrix& out,
               std::vector<std::uint32_t>& argmax) {
  const std::size_t len = output_length(input.cols, kernel, stride);
  out.resize(input.rows, len);
  argmax.resize(input.rows * len);
  for (std::size_t r = 0; r < input.rows; ++r) {
    const double* g = input.row(r);
    double* o = out.row(r);
    for (std::size_t y = 0; y < len; ++y) {
      const std::size_t start = y * stride;
      std::size_t best = start;
      for (std::size_t t = 1; t < kernel; ++t) {
        if (g[start + t] > g[best]) best = start + t;
      }
      o[y] = g[best];
      argmax[r * len + y] = static_cast<std::uint32_t>(best);
    }
  }
}

Matrix maxpool1d(const Matrix& input, std::size_t kernel, std::size_t stride) {
  Matrix out;
  std::vector<std::uint32_t> argmax;
  maxpool1d(input, kernel, stride, out, argmax);
  return out;
}

void maxpool1d_backward(const Matrix& dout, const std::vector<std::uint32_t>& argmax,
                        std::size_t input_cols, Matrix& dinput) {
  if (argmax.size() != dout.rows * dout.cols) {
    throw ShapeError("pool backward: argmax size mismatch");
  }
  dinput.resize(dout.rows, input_cols);
  for (std::size_t r = 0; r < dout.rows; ++r) {
    const double* go = dout.row(r);
    double* gi = dinput.row(r);
    const std::uint32_t* idx = argmax.data() + r * dout.cols;
    for (std::size_t y = 0; y < dout.cols; ++y) gi[idx[y]] += go[y];
  }
}

void relu_inplace(std::span<double> values) {
  for (double& v : values) v = relu(v);
}

void relu_backward(std::span<const double> activated, std::span<double> grad) {
  for (std::size_t i = 0; i < grad.size(); ++i) {
    if (!(activated[i] > 0.0)) grad[i] = 0.0;
  }
}

void dense_forward(std::span<const double> input, std::span<const double> weights,
                   std::span<const double> bias, std::span<double> out) {
  const std::size_t n_in = input.size();
  if (weights.size() != out.size() * n_in || bias.size() != out.size()) {
    throw ShapeError("dense layer shape mismatch");
  }
  for (std::size_t o = 0; o < out.size(); ++o) {
    out[o] = bias[o] + strided_dot(weights.data() + o * n_in, input.data(), 1, n_in);
  }
}

void dense_backward(std::span<const double> input, std::span<const double> weights,
                    std::span<const double> dout, std::span<double> dweights,
                    std::span<double> dbias, std::span<double> dinput) {
  const std::size_t n_in = input.size();
  if (weights.size() != dout.size() * n_in || dweights.size() != weights.size() ||
      dbias.size() != dout.size() || (!dinput.empty() && dinput.size() != n_in)) {
    throw ShapeError("dense backward shape mismatch");
  }
  if (!dinput.empty()) std::fill(dinput.begin(), dinput.end(), 0.0);
  for (std::size_t o = 0; o < dout.size(); ++o) {
    const double g = dout[o];
    dbias[o] += g;
    if (g == 0.0) continue;
    double* dw = dweights.data() + o * n_in;
    const double* w = weights.data() + o * n_in;
    for (std::size_t i = 0; i < n_in; ++i) dw[i] += g * input[i];
    if (!dinput.empty()) {
      for (std::size_t i = 0; i < n_in; ++i) dinput[i] += g * w[i];
    }
  }
}

void softmax(std::span<const double> logits, std::span<double> probabilities) {
  if (logits.empty()) return;
  const double peak = *std::max_element(logits.begin(), logits.end());
  double total = 0.0;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    probabilities[i] = std::exp(logits[i] - peak);
    total += probabilities[i];
  }
  for (std::size_t i = 0; i < logits.size(); ++i) probabilities[i] /= total;
}

}  // namespace apifk::predictor
