#include <gtest/gtest.h>

#include <numeric>
#include <random>

#include "apifk/errors.hpp"
#include "apifk/predictor/layers.hpp"
#include "apifk/predictor/model.hpp"
#include "oracles.hpp"

namespace apifk::predictor {
namespace {

std::vector<double> gaussian(std::mt19937_64& rng, std::size_t n) {
  std::normal_distribution<double> d(0.0, 1.0);
  std::vector<double> v(n);
  for (auto& x : v) x = d(rng);
  return v;
}

Matrix matrix(std::size_t rows, std::size_t cols, std::vector<double> data) {
  Matrix m(rows, cols);
  m.data = std::move(data);
  return m;
}

TEST(OutputLength, Formula) {
  EXPECT_EQ(output_length(10, 3, 1), 8u);
  EXPECT_EQ(output_length(10, 3, 3), 3u);
  EXPECT_EQ(output_length(3, 3, 2), 1u);
  EXPECT_THROW(output_length(2, 3, 1), ShapeError);
  EXPECT_THROW(output_length(5, 1, 0), ShapeError);
}

TEST(Conv, IdentityKernel) {
  const auto in = matrix(1, 4, {1, -2, 3, 4});
  const std::vector<double> w = {1.0}, b = {0.0};
  const auto out = conv1d_forward(in, w, b, {1, 1, 1, 1});
  EXPECT_EQ(out.data, in.data);
}

TEST(Conv, SmallExampleMatchesFormula) {
  // g=[1,2,3], f=[1,1], k=2, d=1
  const auto in = matrix(1, 3, {1, 2, 3});
  const std::vector<double> w = {1, 1}, b = {0};
  const auto out = conv1d_forward(in, w, b, {1, 1, 2, 1});
  EXPECT_EQ(out.data, oracle::conv(in.data, 1, 3, w, b, 1, 2, 1));
  EXPECT_EQ(out.data, (std::vector<double>{3, 5}));
  // Asymmetric kernel exposes the tap order.
  const std::vector<double> w2 = {1, 10};
  EXPECT_EQ(conv1d_forward(in, w2, b, {1, 1, 2, 1}).data,
            oracle::conv(in.data, 1, 3, w2, b, 1, 2, 1));
}

TEST(Conv, MatchesOracleOnRandomShapes) {
  std::mt19937_64 rng(31);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t m = 1 + rng() % 4, n = 1 + rng() % 4, k = 1 + rng() % 5,
                      d = 1 + rng() % 3, l = k + rng() % 12;
    const auto in = matrix(m, l, gaussian(rng, m * l));
    const auto w = gaussian(rng, n * m * k);
    const auto b = gaussian(rng, n);
    const auto out = conv1d_forward(in, w, b, {m, n, k, d});
    const auto expected = oracle::conv(in.data, m, l, w, b, n, k, d);
    ASSERT_EQ(out.rows, n);
    ASSERT_EQ(out.cols, (l - k) / d + 1);
    ASSERT_EQ(out.data.size(), expected.size());
    for (std::size_t i = 0; i < expected.size(); ++i) EXPECT_NEAR(out.data[i], expected[i], 1e-12);
  }
}

TEST(Conv, OneHotPathMatchesDense) {
  std::mt19937_64 rng(32);
  const std::size_t m = 6, n = 3, k = 3, l = 15;
  for (int trial = 0; trial < 50; ++trial) {
    QuantizedInput q;
    q.alphabet_size = m;
    for (std::size_t j = 0; j < l; ++j) q.columns.push_back(static_cast<int>(rng() % (m + 1)) - 1);
    const auto w = gaussian(rng, n * m * k);
    const auto b = gaussian(rng, n);
    const ConvShape shape{m, n, k, 1};
    Matrix sparse;
    conv1d_forward_onehot(q, w, b, shape, sparse);
    const auto dense = conv1d_forward(matrix(m, l, q.dense()), w, b, shape);
    ASSERT_EQ(sparse.data.size(), dense.data.size());
    for (std::size_t i = 0; i < dense.data.size(); ++i) EXPECT_NEAR(sparse.data[i], dense.data[i], 1e-12);

    const auto dout = gaussian(rng, dense.data.size());
    std::vector<double> dw1(w.size()), db1(n), dw2(w.size()), db2(n);
    conv1d_backward_onehot(q, shape, matrix(n, dense.cols, dout), dw1, db1);
    conv1d_backward(matrix(m, l, q.dense()), w, shape, matrix(n, dense.cols, dout), dw2, db2,
                    nullptr);
    for (std::size_t i = 0; i < w.size(); ++i) EXPECT_NEAR(dw1[i], dw2[i], 1e-12);
    for (std::size_t i = 0; i < n; ++i) EXPECT_NEAR(db1[i], db2[i], 1e-12);
  }
}

TEST(Conv, BackwardMatchesFiniteDifferences) {
  std::mt19937_64 rng(33);
  const std::size_t m = 3, n = 2, k = 3, d = 2, l = 11;
  auto in = matrix(m, l, gaussian(rng, m * l));
  auto w = gaussian(rng, n * m * k);
  const auto b = gaussian(rng, n);
  const ConvShape shape{m, n, k, d};
  const auto probe = gaussian(rng, n * ((l - k) / d + 1));
  // L = <probe, conv(in)>, so dL/dout = probe.
  const auto loss = [&] {
    const auto out = conv1d_forward(in, w, b, shape);
    return std::inner_product(out.data.begin(), out.data.end(), probe.begin(), 0.0);
  };
  std::vector<double> dw(w.size()), db(n);
  Matrix din;
  conv1d_backward(in, w, shape, matrix(n, probe.size() / n, probe), dw, db, &din);
  const double h = 1e-5;
  for (std::size_t i = 0; i < w.size(); ++i) {
    const double saved = w[i];
    w[i] = saved + h;
    const double up = loss();
    w[i] = saved - h;
    const double down = loss();
    w[i] = saved;
    EXPECT_NEAR(dw[i], (up - down) / (2 * h), 1e-7);
  }
  for (std::size_t i = 0; i < in.data.size(); ++i) {
    const double saved = in.data[i];
    in.data[i] = saved + h;
    const double up = loss();
    in.data[i] = saved - h;
    const double down = loss();
    in.data[i] = saved;
    EXPECT_NEAR(din.data[i], (up - down) / (2 * h), 1e-7);
  }
}

TEST(Conv, ShortInputThrows) {
  const auto in = matrix(1, 2, {1, 2});
  const std::vector<double> w = {1, 1, 1}, b = {0};
  EXPECT_THROW(conv1d_forward(in, w, b, {1, 1, 3, 1}), ShapeError);
}

TEST(MaxPool, Examples) {
  const auto in = matrix(1, 6, {3, 1, 2, 5, 4, 0});
  EXPECT_EQ(maxpool1d(in, 3, 3).data, (std::vector<double>{3, 5}));
  EXPECT_EQ(maxpool1d(in, 1, 1).data, in.data);
  const auto flat = matrix(2, 5, std::vector<double>(10, 1.5));
  for (double v : maxpool1d(flat, 2, 1).data) EXPECT_EQ(v, 1.5);
  EXPECT_THROW(maxpool1d(in, 7, 1), ShapeError);
}

TEST(MaxPool, MatchesOracle) {
  std::mt19937_64 rng(34);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t rows = 1 + rng() % 3, k = 1 + rng() % 4, d = 1 + rng() % 4,
                      l = k + rng() % 10;
    const auto in = matrix(rows, l, gaussian(rng, rows * l));
    EXPECT_EQ(maxpool1d(in, k, d).data, oracle::maxpool(in.data, rows, l, k, d));
  }
}

TEST(MaxPool, TiesRouteGradientToLowestColumn) {
  const auto in = matrix(1, 3, {2, 2, 2});
  Matrix out;
  std::vector<std::uint32_t> argmax;
  maxpool1d(in, 3, 3, out, argmax);
  ASSERT_EQ(argmax.size(), 1u);
  EXPECT_EQ(argmax[0], 0u);
  Matrix din;
  maxpool1d_backward(matrix(1, 1, {1.0}), argmax, 3, din);
  EXPECT_EQ(din.data, (std::vector<double>{1, 0, 0}));
}

TEST(Relu, Values) {
  EXPECT_EQ(relu(0.0), 0.0);
  EXPECT_EQ(relu(-5.0), 0.0);
  EXPECT_EQ(relu(2.5), 2.5);
  std::vector<double> act = {0.0, 1.0, 2.0}, grad = {5.0, 5.0, 5.0};
  relu_backward(act, grad);
  EXPECT_EQ(grad, (std::vector<double>{0.0, 5.0, 5.0}));
}

TEST(Softmax, StableAndNormalized) {
  std::vector<double> p(3);
  softmax(std::vector<double>{1000.0, 1000.0, -1000.0}, p);
  EXPECT_NEAR(p[0], 0.5, 1e-12);
  EXPECT_NEAR(p[2], 0.0, 1e-12);
  std::mt19937_64 rng(35);
  for (int i = 0; i < 100; ++i) {
    const auto logits = gaussian(rng, 5);
    std::vector<double> q(5);
    softmax(logits, q);
    EXPECT_NEAR(std::accumulate(q.begin(), q.end(), 0.0), 1.0, 1e-12);
    for (double v : q) EXPECT_GE(v, 0.0);
  }
}

TEST(Dense, MatchesLoop) {
  std::mt19937_64 rng(36);
  const auto x = gaussian(rng, 4);
  const auto w = gaussian(rng, 12);
  const auto b = gaussian(rng, 3);
  std::vector<double> out(3);
  dense_forward(x, w, b, out);
  for (std::size_t o = 0; o < 3; ++o) {
    double s = b[o];
    for (std::size_t i = 0; i < 4; ++i) s += w[o * 4 + i] * x[i];
    EXPECT_NEAR(out[o], s, 1e-12);
  }
}

TEST(ShapeChain, FrameLengthAfterConvStack) {
  for (auto v : {Variant::Large, Variant::Small}) {
    const auto c = make_config(v, 96, 6);
    EXPECT_EQ(c.conv_output_length(), 34u);
    EXPECT_EQ(c.conv_output_length(), (c.input_length - 96) / 27);
  }
  const auto tiny = make_config(Variant::Tiny, 96, 6);
  EXPECT_EQ(tiny.input_length, 256u);
  EXPECT_EQ(tiny.conv_output_length(), 5u);
  EXPECT_EQ(tiny.flattened_size(), 64u * 5u);
  // Every l0 = 27 t + 96 lands exactly on t.
  for (std::size_t t = 1; t < 40; ++t) {
    EXPECT_EQ(make_config(Variant::Tiny, 96, 2, 27 * t + 96).conv_output_length(), t);
  }
  EXPECT_THROW(make_config(Variant::Tiny, 96, 2, 100).conv_output_length(), ShapeError);
}

}  // namespace
}  // namespace apifk::predictor
