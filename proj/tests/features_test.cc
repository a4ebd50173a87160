#include "bseg/features.h"

#include <gtest/gtest.h>

#include <sstream>

#include "bseg/random.h"
#include "oracles.h"

namespace bseg {
namespace {

FeatureTensor make_tensor(std::string name, int c, int h, int w, std::vector<float> data) {
  FeatureTensor t;
  t.name = std::move(name);
  t.channels = c;
  t.height = h;
  t.width = w;
  t.data = std::move(data);
  return t;
}

TEST(UpsampleTest, ConstantField) {
  const FeatureTensor up = upsample_bilinear(make_tensor("x", 1, 1, 1, {3.5f}), 4, 4);
  ASSERT_EQ(up.data.size(), 16u);
  for (float v : up.data) EXPECT_EQ(v, 3.5f);
}

TEST(UpsampleTest, HalfPixelCentres) {
  const FeatureTensor up = upsample_bilinear(make_tensor("x", 1, 2, 2, {0, 1, 0, 1}), 2, 4);
  const std::vector<float> row{0.0f, 0.25f, 0.75f, 1.0f};
  for (int r = 0; r < 2; ++r)
    for (int c = 0; c < 4; ++c) EXPECT_FLOAT_EQ(up.at(0, r, c), row[c]);
}

TEST(UpsampleTest, IdentityIsBitExact) {
  Rng rng(1);
  std::vector<float> data(2 * 3 * 5);
  for (auto& v : data) v = static_cast<float>(rng.normal());
  const FeatureTensor t = make_tensor("x", 2, 3, 5, data);
  EXPECT_EQ(upsample_bilinear(t, 3, 5).data, t.data);
}

TEST(UpsampleTest, RejectsDownsampling) {
  EXPECT_THROW(upsample_bilinear(make_tensor("x", 1, 2, 2, {0, 0, 0, 0}), 1, 4), DataError);
}

TEST(AssembleTest, IntensityOnly) {
  Rng rng(2);
  const RgbFrame f = testing::random_frame(4, 5, rng);
  const FeatureMatrix fm = assemble(f, LabelMap(4, 5, 3), {}, {"I"});
  ASSERT_EQ(fm.num_features(), 3);
  ASSERT_EQ(fm.num_nodes(), 20);
  for (size_t i = 0; i < f.size(); ++i) {
    EXPECT_EQ(fm.data(i, 0), f.r[i] / 255.0);
    EXPECT_EQ(fm.data(i, 1), f.g[i] / 255.0);
    EXPECT_EQ(fm.data(i, 2), f.b[i] / 255.0);
  }
}

TEST(AssembleTest, BasePlusIntensityHasFourChannelsInRequestedOrder) {
  LabelMap base(2, 2, 11);
  base.labels = {0, 5, 10, 1};
  const FeatureMatrix fm = assemble(RgbFrame(2, 2, 51.0), base, {}, {"base", "I"});
  ASSERT_EQ(fm.num_features(), 4);
  EXPECT_DOUBLE_EQ(fm.data(1, 0), 0.5);
  EXPECT_DOUBLE_EQ(fm.data(2, 0), 1.0);
  EXPECT_DOUBLE_EQ(fm.data(0, 1), 0.2);
  ASSERT_EQ(fm.manifest.size(), 2u);
  EXPECT_EQ(fm.manifest[0].name, "base");
  EXPECT_EQ(fm.manifest[0].offset, 0);
  EXPECT_EQ(fm.manifest[1].name, "I");
  EXPECT_EQ(fm.manifest[1].offset, 1);
  EXPECT_EQ(fm.manifest[1].channels, 3);
}

TEST(AssembleTest, ManifestPartitionsColumnsInRequestedOrder) {
  Rng rng(3);
  std::vector<FeatureTensor> extras;
  for (int e = 0; e < 3; ++e) {
    std::vector<float> d(static_cast<size_t>(e + 1) * 2 * 3);
    for (auto& v : d) v = static_cast<float>(rng.normal());
    extras.push_back(make_tensor("m" + std::to_string(e), e + 1, 2, 3, d));
  }
  const std::vector<std::string> spec{"m2", "I", "m0", "base", "m1"};
  const FeatureMatrix fm = assemble(testing::random_frame(4, 6, rng), LabelMap(4, 6, 2), extras, spec);
  int expect_offset = 0;
  ASSERT_EQ(fm.manifest.size(), spec.size());
  for (size_t s = 0; s < spec.size(); ++s) {
    EXPECT_EQ(fm.manifest[s].name, spec[s]);
    EXPECT_EQ(fm.manifest[s].offset, expect_offset);
    expect_offset += fm.manifest[s].channels;
  }
  EXPECT_EQ(expect_offset, fm.num_features());
  EXPECT_EQ(fm.num_features(), 3 + 3 + 1 + 1 + 2);
}

TEST(AssembleTest, ExtrasAreStandardized) {
  Rng rng(4);
  std::vector<float> d(2 * 5 * 5);
  for (auto& v : d) v = static_cast<float>(10.0 + 3.0 * rng.normal());
  for (int i = 0; i < 25; ++i) d[25 + i] = 7.0f;  // constant second channel
  const FeatureTensor t = make_tensor("feat", 2, 5, 5, d);
  const FeatureMatrix fm = assemble(RgbFrame(10, 10), LabelMap(10, 10, 2), {t}, {"feat"});
  ASSERT_EQ(fm.num_features(), 2);
  const double mean = fm.data.col(0).mean();
  const double var = (fm.data.col(0).array() - mean).square().mean();
  EXPECT_NEAR(mean, 0.0, 1e-6);
  EXPECT_NEAR(var, 1.0, 1e-4);
  EXPECT_EQ(fm.data.col(1).cwiseAbs().maxCoeff(), 0.0);
}

TEST(AssembleTest, Errors) {
  const RgbFrame f(3, 3);
  EXPECT_THROW(assemble(f, LabelMap(3, 3, 2), {}, {"nope"}), ConfigError);
  EXPECT_THROW(assemble(f, LabelMap(3, 4, 2), {}, {"I"}), DataError);
  FeatureTensor bad = make_tensor("bad", 1, 1, 1, {std::numeric_limits<float>::quiet_NaN()});
  EXPECT_THROW(assemble(f, LabelMap(3, 3, 2), {bad}, {"bad"}), DataError);
  RgbFrame hot(3, 3, 300.0);
  EXPECT_THROW(assemble(hot, LabelMap(3, 3, 2), {}, {"I"}), DataError);
}

TEST(AssembleTest, Deterministic) {
  Rng rng(5);
  std::vector<float> d(3 * 4 * 4);
  for (auto& v : d) v = static_cast<float>(rng.normal());
  const std::vector<FeatureTensor> extras{make_tensor("x", 3, 4, 4, d)};
  const RgbFrame f = testing::random_frame(8, 8, rng);
  const LabelMap base = testing::random_label_map(8, 8, 3, rng);
  const FeatureMatrix a = assemble(f, base, extras, {"base", "I", "x"});
  const FeatureMatrix b = assemble(f, base, extras, {"base", "I", "x"});
  EXPECT_TRUE(a.data.cwiseEqual(b.data).all());
}

TEST(TensorFormatTest, RoundTripIsExact) {
  Rng rng(6);
  std::vector<float> d(2 * 3 * 4);
  for (auto& v : d) v = static_cast<float>(rng.normal());
  const FeatureTensor t = make_tensor("x", 2, 3, 4, d);
  std::stringstream buf;
  write_tensor(buf, t);
  EXPECT_EQ(buf.str().size(), 4 + 4 + 12 + 4 * d.size());
  const FeatureTensor back = read_tensor(buf, "x");
  EXPECT_EQ(back.channels, 2);
  EXPECT_EQ(back.height, 3);
  EXPECT_EQ(back.width, 4);
  EXPECT_EQ(back.data, t.data);
}

TEST(TensorFormatTest, ParseFeatureSpec) {
  EXPECT_EQ(parse_feature_spec("base, I,d5"), (std::vector<std::string>{"base", "I", "d5"}));
  EXPECT_THROW(parse_feature_spec(" , "), ConfigError);
}

}  // namespace
}  // namespace bseg
