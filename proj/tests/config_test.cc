#include "bseg/config.h"

#include <gtest/gtest.h>

#include <sstream>

namespace bseg {
namespace {

Settings parse(const std::string& text) {
  Settings s;
  std::istringstream in(text);
  parse_settings(s, in);
  return s;
}

TEST(ConfigTest, DefaultsMatchTheReferenceSetup) {
  const Settings s;
  EXPECT_EQ(s.pipeline.thickness, 2);
  EXPECT_EQ(s.pipeline.k, 8);
  EXPECT_EQ(s.pipeline.features, (std::vector<std::string>{"base", "I"}));
  EXPECT_EQ(s.pipeline.gcn.hidden_channels, (std::vector<int>{64, 128, 64}));
  EXPECT_EQ(s.pipeline.gcn.learning_rate, 1e-3);
  EXPECT_EQ(s.synth_train_frames, 20);
  EXPECT_EQ(s.synth_val_frames, 5);
  EXPECT_EQ(s.synth_test_frames, 10);
}

TEST(ConfigTest, ParsesSectionsAndComments) {
  const Settings s = parse(R"(
# leading comment
[graph]
thickness = 3   # trailing comment
k=16
[features]
spec = base, I
[gcn]
hidden = 32,16
dropout = 0.5
l2 = 1e-8
seed = 12
[train]
epochs = 7
shuffle = true
[data]
num_classes = 5
void_label = 255
[synth]
corruption = dilate
flip_probability = 0.25
[ablate]
feature_grid = I; base,I; base
)");
  EXPECT_EQ(s.pipeline.thickness, 3);
  EXPECT_EQ(s.pipeline.k, 16);
  EXPECT_EQ(s.pipeline.features, (std::vector<std::string>{"base", "I"}));
  EXPECT_EQ(s.pipeline.gcn.hidden_channels, (std::vector<int>{32, 16}));
  EXPECT_EQ(s.pipeline.gcn.dropout_rate, 0.5);
  EXPECT_EQ(s.pipeline.gcn.l2_coeff, 1e-8);
  EXPECT_EQ(s.pipeline.gcn.seed, 12u);
  EXPECT_EQ(s.pipeline.epochs, 7);
  EXPECT_TRUE(s.pipeline.shuffle);
  EXPECT_EQ(s.pipeline.gcn.num_classes, 5);
  EXPECT_EQ(s.synth.num_classes, 5);
  EXPECT_EQ(s.pipeline.void_label, 255);
  EXPECT_EQ(s.synth.corruption, Corruption::kDilate);
  EXPECT_EQ(s.synth.flip_probability, 0.25);
  ASSERT_EQ(s.feature_grid.size(), 3u);
  EXPECT_EQ(s.feature_grid[2], (std::vector<std::string>{"base"}));
}

TEST(ConfigTest, OverridesUseDottedKeys) {
  Settings s;
  apply_override(s, "graph.k=4");
  apply_override(s, "data.void_label=none");
  EXPECT_EQ(s.pipeline.k, 4);
  EXPECT_FALSE(s.pipeline.void_label.has_value());
}

TEST(ConfigTest, RejectsBadInput) {
  EXPECT_THROW(parse("[graph]\nthickness = two\n"), ConfigError);
  EXPECT_THROW(parse("[graph]\nradius = 2\n"), ConfigError);
  EXPECT_THROW(parse("[graph\nk = 2\n"), ConfigError);
  EXPECT_THROW(parse("k 2\n"), ConfigError);
  EXPECT_THROW(parse("[train]\nshuffle = maybe\n"), ConfigError);
  EXPECT_THROW(parse("[graph]\nk = 3x\n"), ConfigError);
  Settings s;
  EXPECT_THROW(apply_override(s, "graph.k"), ConfigError);
  EXPECT_THROW(load_settings("/nonexistent/bseg.cfg"), ConfigError);
}

TEST(ConfigTest, ErrorsNameTheLine) {
  try {
    parse("[graph]\n\nk = x\n");
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find(":3:"), std::string::npos) << e.what();
  }
}

TEST(ConfigTest, PipelineSettingsRoundTrip) {
  Settings s;
  apply_override(s, "gcn.l2=1e-11");
  apply_override(s, "gcn.dropout=0.1");
  apply_override(s, "gcn.hidden=3,4,5");
  apply_override(s, "features.spec=I,base");
  apply_override(s, "data.void_label=9");
  apply_override(s, "train.val_every=3");
  std::stringstream buf;
  write_pipeline_settings(buf, s);
  Settings back;
  parse_settings(back, buf);
  const PipelineConfig& a = s.pipeline;
  const PipelineConfig& b = back.pipeline;
  EXPECT_EQ(a.thickness, b.thickness);
  EXPECT_EQ(a.k, b.k);
  EXPECT_EQ(a.features, b.features);
  EXPECT_EQ(a.gcn.hidden_channels, b.gcn.hidden_channels);
  EXPECT_EQ(a.gcn.l2_coeff, b.gcn.l2_coeff);
  EXPECT_EQ(a.gcn.dropout_rate, b.gcn.dropout_rate);
  EXPECT_EQ(a.gcn.learning_rate, b.gcn.learning_rate);
  EXPECT_EQ(a.gcn.seed, b.gcn.seed);
  EXPECT_EQ(a.epochs, b.epochs);
  EXPECT_EQ(a.val_every, b.val_every);
  EXPECT_EQ(a.void_label, b.void_label);
}

TEST(ConfigTest, EveryKnownKeyIsAccepted) {
  const std::vector<std::string> keys = known_setting_keys();
  EXPECT_GE(keys.size(), 30u);
  for (const auto& key : keys) {
    Settings s;
    EXPECT_THROW(apply_setting(s, key, ""), ConfigError) << key;
  }
}

}  // namespace
}  // namespace bseg
