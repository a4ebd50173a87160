#pragma once

#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "bseg/config.h"
#include "bseg/pipeline.h"

namespace bseg {

enum class AblationAxis { kConnections, kThickness, kFeatures, kDropout, kL2 };

// "connections" | "thickness" | "features" | "dropout" | "l2"
AblationAxis parse_axis(const std::string& name);
std::string axis_name(AblationAxis axis);

// Values swept by default, as text:
//   connections  2 4 8 16
//   thickness    1 .. 6
//   dropout      0 1e-4 1e-3 0.1 0.5 0.9
//   l2           1e-1 1e-4 1e-8 1e-11 1e-13
//   features     settings.feature_grid
std::vector<std::string> default_grid(AblationAxis axis, const Settings& settings);

// Copy of `cfg` with the axis set to `value`.
PipelineConfig with_axis_value(PipelineConfig cfg, AblationAxis axis, const std::string& value);

struct AblationPoint {
  std::string axis;
  std::string value;
  double miou = 0.0;
  std::optional<double> border_miou;
  double base_miou = 0.0;
};

// For each value: train on `train_frames` (model selection on `val_frames`),
// pass the model through its checkpoint encoding, then evaluate on
// `test_frames`. The same steps as `train` followed by `predict`/`eval`.
AblationPoint run_ablation_point(const std::vector<Frame>& train_frames,
                                 const std::vector<Frame>& val_frames,
                                 const std::vector<Frame>& test_frames,
                                 const PipelineConfig& cfg, AblationAxis axis,
                                 const std::string& value);

std::vector<AblationPoint> run_ablation(const std::vector<Frame>& train_frames,
                                        const std::vector<Frame>& val_frames,
                                        const std::vector<Frame>& test_frames,
                                        const PipelineConfig& cfg, AblationAxis axis,
                                        const std::vector<std::string>& values);

void write_ablation_csv(std::ostream& out, const std::vector<AblationPoint>& points);

}  // namespace bseg
