#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <random>

#include "apifk/errors.hpp"
#include "apifk/predictor/model.hpp"
#include "apifk/predictor/quantize.hpp"
#include "apifk/predictor/trainer.hpp"
#include "gradcheck.hpp"
#include "temp_dir.hpp"

namespace apifk::predictor {
namespace {

TEST(Alphabet, DefaultHasNinetySixDistinctEntries) {
  const auto a = Alphabet::default_alphabet();
  EXPECT_EQ(a.size(), 96u);
  for (std::size_t i = 0; i < a.size(); ++i) EXPECT_EQ(a.index_of(a.chars()[i]), static_cast<int>(i));
  EXPECT_EQ(a.index_of(U'a'), 0);
  EXPECT_EQ(a.index_of(U'A'), 26);
  EXPECT_EQ(a.index_of(U'0'), 52);
  EXPECT_EQ(a.index_of(U' '), -1);
  EXPECT_EQ(a.index_of(U'中'), -1);
}

TEST(Alphabet, RejectsDuplicatesAndEmpty) {
  EXPECT_THROW(Alphabet(U"aba"), InvalidConfig);
  EXPECT_THROW(Alphabet(U""), InvalidConfig);
  EXPECT_EQ(Alphabet::from_utf8("ab\n短").size(), 3u);
}

TEST(Alphabet, LoadsFromFile) {
  TempDir dir;
  {
    std::ofstream out(dir.file("alpha.txt"));
    out << "xyz\r\n12";
  }
  EXPECT_EQ(Alphabet::from_file(dir.file("alpha.txt")).chars(), U"xyz12");
  EXPECT_THROW(Alphabet::from_file(dir.file("missing.txt")), IoError);
}

TEST(SerializeRequest, Canonical) {
  ApiCallRecord r;
  r.api = "SendSms";
  r.params = {{"TemplateCode", "SMS_209470795"}, {"PhoneNumbers", "186xxx9602"}, {"SignName", "hanxing"}};
  EXPECT_EQ(serialize_request(r),
            "SendSms|PhoneNumbers=186xxx9602&SignName=hanxing&TemplateCode=SMS_209470795");
  std::reverse(r.params.begin(), r.params.end());
  EXPECT_EQ(serialize_request(r),
            "SendSms|PhoneNumbers=186xxx9602&SignName=hanxing&TemplateCode=SMS_209470795");
  EXPECT_EQ(serialize_request("Api", {}), "Api|");
}

TEST(Quantize, BackwardOrder) {
  const Alphabet a(U"ab");
  const auto q = quantize("ab", a, 4);
  EXPECT_EQ(q.columns, (std::vector<std::int32_t>{1, 0, -1, -1}));
  const auto dense = q.dense();
  EXPECT_EQ(dense, (std::vector<double>{0, 1, 0, 0, 1, 0, 0, 0}));
}

TEST(Quantize, BlanksUnknownsAndTruncation) {
  const Alphabet a(U"abc");
  EXPECT_EQ(quantize("", a, 3).nonzero_columns(), 0u);
  EXPECT_EQ(quantize("a b", a, 3).columns, (std::vector<std::int32_t>{1, -1, 0}));
  EXPECT_EQ(quantize("azc", a, 3).columns, (std::vector<std::int32_t>{2, -1, 0}));
  // Only the last l0 characters survive.
  EXPECT_EQ(quantize("cccab", a, 2).columns, (std::vector<std::int32_t>{1, 0}));
  EXPECT_THROW(quantize("a", a, 0), InvalidConfig);
}

TEST(Quantize, NonzeroCountProperty) {
  const auto a = Alphabet::default_alphabet();
  std::mt19937_64 rng(41);
  const std::u32string pool = U"aZ9 _中\t{é";
  for (int i = 0; i < 500; ++i) {
    std::u32string text;
    for (auto n = rng() % 40; n > 0; --n) text.push_back(pool[rng() % pool.size()]);
    const std::size_t l0 = 1 + rng() % 30;
    std::size_t expected = 0;
    const std::size_t tail = std::min(text.size(), l0);
    for (std::size_t j = 0; j < tail; ++j) {
      const char32_t c = text[text.size() - 1 - j];
      if (!is_blank(c) && a.index_of(c) >= 0) ++expected;
    }
    std::string utf8;
    for (char32_t c : text) {
      if (c < 0x80) {
        utf8.push_back(static_cast<char>(c));
      } else if (c < 0x800) {
        utf8.push_back(static_cast<char>(0xC0 | (c >> 6)));
        utf8.push_back(static_cast<char>(0x80 | (c & 0x3F)));
      } else {
        utf8.push_back(static_cast<char>(0xE0 | (c >> 12)));
        utf8.push_back(static_cast<char>(0x80 | ((c >> 6) & 0x3F)));
        utf8.push_back(static_cast<char>(0x80 | (c & 0x3F)));
      }
    }
    const auto q = quantize(utf8, a, l0);
    EXPECT_EQ(q.length(), l0);
    EXPECT_EQ(q.nonzero_columns(), expected);
  }
}

TEST(Model, RequiresRightLabelAndMatchingOutputs) {
  const auto cfg = make_config(Variant::Tiny, 96, 2);
  EXPECT_THROW(ConvNetModel(cfg, Alphabet::default_alphabet(), {"E1", "E2"}), InvalidConfig);
  EXPECT_THROW(ConvNetModel(cfg, Alphabet::default_alphabet(), {"Right", "Right"}), InvalidConfig);
  EXPECT_THROW(ConvNetModel(cfg, Alphabet::default_alphabet(), {"Right", "E1", "E2"}),
               InvalidConfig);
  ConvNetModel ok(cfg, Alphabet::default_alphabet(), {"Right", "E1"});
  EXPECT_EQ(ok.label_index("E1"), 1u);
  EXPECT_THROW(ok.label_index("E9"), UnknownLabel);
}

TEST(Model, ZeroWeightsGiveUniformProbabilities) {
  const auto cfg = make_config(Variant::Tiny, 96, 4);
  ConvNetModel m(cfg, Alphabet::default_alphabet(), {"Right", "A", "B", "C"});
  const auto out = forward(m, m.encode("SendSms|PhoneNumbers=1"), Mode::Eval);
  for (double p : out.probabilities) EXPECT_NEAR(p, 0.25, 1e-12);
  std::vector<Example> batch = {{m.encode("x"), 2}};
  EXPECT_NEAR(loss_and_backward(m, batch, Mode::Eval).loss, std::log(4.0), 1e-12);
  // Untrained model: ties resolve to the first label.
  EXPECT_EQ(predict(m, "SendSms", {}).label.str(), "Right");
}

TEST(Model, EvalIsDeterministicAndNormalized) {
  const auto m = gradcheck::miniature_model(5);
  const auto q = m.encode("abcabcdd");
  const auto a = forward(m, q, Mode::Eval);
  const auto b = forward(m, q, Mode::Eval, 12345);
  EXPECT_EQ(a.logits, b.logits);
  EXPECT_NEAR(std::accumulate(a.probabilities.begin(), a.probabilities.end(), 0.0), 1.0, 1e-12);
  const auto t1 = forward(m, q, Mode::Train, 7);
  const auto t2 = forward(m, q, Mode::Train, 7);
  EXPECT_EQ(t1.logits, t2.logits);
}

TEST(Model, ShapeMismatchThrows) {
  const auto m = gradcheck::miniature_model(5);
  EXPECT_THROW(forward(m, quantize("ab", m.alphabet(), 25), Mode::Eval), ShapeError);
  EXPECT_THROW(forward(m, quantize("ab", Alphabet(U"abcde"), 24), Mode::Eval), ShapeError);
}

TEST(Model, BatchErrors) {
  const auto m = gradcheck::miniature_model(5);
  EXPECT_THROW(loss_and_backward(m, std::vector<Example>{}), EmptyInput);
  std::vector<Example> bad = {{m.encode("a"), 3}};
  EXPECT_THROW(loss_and_backward(m, bad), UnknownLabel);
}

TEST(GradientCheck, EvalModeMatchesFiniteDifferences) {
  const auto m = gradcheck::miniature_model(1);
  const auto batch = gradcheck::miniature_batch(m, 2);
  const auto r = gradcheck::run(m, batch, Mode::Eval, 300, 1e-5, 1e-4, 3);
  EXPECT_EQ(r.checked, 300u);
  EXPECT_EQ(r.failed, 0u) << "worst relative error " << r.worst_relative_error;
}

TEST(GradientCheck, TrainModeWithFixedDropoutMasks) {
  const auto m = gradcheck::miniature_model(4);
  const auto batch = gradcheck::miniature_batch(m, 5);
  const auto r = gradcheck::run(m, batch, Mode::Train, 200, 1e-5, 1e-4, 6);
  EXPECT_EQ(r.failed, 0u) << "worst relative error " << r.worst_relative_error;
}

TEST(Layout, ParameterCountMatchesSlices) {
  const auto cfg = make_config(Variant::Tiny, 96, 6);
  const auto layout = parameter_layout(cfg);
  ASSERT_EQ(layout.size(), kConvLayers + kFcLayers);
  EXPECT_EQ(layout[0].weight_count, 64u * 96u * 7u);
  EXPECT_EQ(layout[6].weight_count, 128u * 320u);
  EXPECT_EQ(layout.back().bias_count, 6u);
  const auto& last = layout.back();
  EXPECT_EQ(last.bias_offset + last.bias_count, cfg.parameter_count());
}

TEST(Variant, StringsRoundTrip) {
  for (auto v : {Variant::Large, Variant::Small, Variant::Tiny}) {
    EXPECT_EQ(variant_from_string(to_string(v)), v);
  }
  EXPECT_THROW(variant_from_string("huge"), InvalidConfig);
  EXPECT_EQ(default_init_std(Variant::Large), 0.02);
  EXPECT_EQ(default_init_std(Variant::Small), 0.05);
}

}  // namespace
}  // namespace apifk::predictor
