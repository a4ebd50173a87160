#pragma once

#include <istream>
#include <ostream>
#include <string>
#include <vector>

#include "bseg/pipeline.h"
#include "bseg/synth.h"

namespace bseg {

/// Everything the command line tool can be configured with.
///
/// Config files are plain text:
///
///   # comment
///   [graph]
///   thickness = 2
///   k = 8
///
/// A key inside section `graph` is addressed as `graph.k` on the command
/// line. Unknown sections or keys are rejected.
struct Settings {
  SynthConfig synth;
  // Class count follows the synthetic default so that `synth` output can be
  // trained on without further flags.
  PipelineConfig pipeline = [this] {
    PipelineConfig p;
    p.gcn.num_classes = synth.num_classes;
    return p;
  }();
  int synth_train_frames = 20;
  int synth_val_frames = 5;
  int synth_test_frames = 10;
  std::vector<std::vector<std::string>> feature_grid{{"I"}, {"base", "I"}};
};

// Sets `section.key` from its textual value. Throws ConfigError.
void apply_setting(Settings& s, const std::string& key, const std::string& value);

// Applies a "section.key=value" override.
void apply_override(Settings& s, const std::string& assignment);

void parse_settings(Settings& s, std::istream& in, const std::string& origin = "<config>");
Settings load_settings(const std::string& path);

// Writes the pipeline sections ([data] [graph] [features] [gcn] [train]) in
// the config file syntax; reading them back reproduces `s.pipeline`.
void write_pipeline_settings(std::ostream& out, const Settings& s);

// Every key accepted by apply_setting, "section.key".
std::vector<std::string> known_setting_keys();

}  // namespace bseg
