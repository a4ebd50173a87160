#pragma once

#include <functional>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "bseg/features.h"
#include "bseg/gcn.h"
#include "bseg/grid_graph.h"
#include "bseg/image.h"
#include "bseg/metrics.h"

namespace bseg {

/// One line of a dataset manifest: "id rgb base gt [extras]". Relative
/// paths are resolved against the manifest's directory when read.
struct FrameRecord {
  std::string id;
  std::string rgb_path;
  std::string base_path;
  std::string gt_path;
  std::optional<std::string> extras_manifest;
};

std::vector<FrameRecord> read_dataset_manifest(const std::string& path);
// Paths are written relative to the manifest's directory.
void write_dataset_manifest(const std::string& path, const std::vector<FrameRecord>& records);

struct PipelineConfig {
  int thickness = 2;
  int k = 8;
  std::vector<std::string> features{"base", "I"};
  GcnConfig gcn;
  int epochs = 100;
  int val_every = 1;  // epochs between validation passes
  bool shuffle = false;
  std::optional<int> void_label;

  void validate() const;
};

/// A frame held in memory.
struct Frame {
  std::string id;
  RgbFrame rgb;
  LabelMap base;
  LabelMap gt;
  std::vector<FeatureTensor> extras;
};

Frame load_frame(const FrameRecord& record, int num_classes, std::optional<int> void_label);
std::vector<Frame> load_frames(const std::vector<FrameRecord>& records, const PipelineConfig& cfg);

/// Everything the network consumes for one frame. The mask always comes from
/// the base prediction.
struct PreparedFrame {
  std::string id;
  BorderMask mask;
  NormalizedAdjacency adjacency;
  FeatureMatrix features;
  TrainMask train_mask;  // border pixels with non-void ground truth
  size_t edge_count = 0;
  const Frame* source = nullptr;
};

PreparedFrame prepare_frame(const Frame& frame, const PipelineConfig& cfg);

struct TrainLogRow {
  int epoch = 0;
  std::string frame_id;
  double loss = 0.0;
  std::optional<double> val_miou;
};

struct TrainResult {
  GcnModel model;  // best validation checkpoint, or the last one without validation
  std::vector<TrainLogRow> log;
  std::optional<double> best_val_miou;
  int best_epoch = 0;
  size_t skipped_frames = 0;
};

// Called after every optimizer step with the log row just written.
using TrainObserver = std::function<void(const TrainLogRow&)>;

TrainResult train(const std::vector<Frame>& train_frames, const std::vector<Frame>& val_frames,
                  const PipelineConfig& cfg, const TrainObserver& observer = {});

void write_train_log(std::ostream& out, const std::vector<TrainLogRow>& log);

// GCN argmax on selected pixels, base label elsewhere.
LabelMap merge_predictions(const LabelMap& base, const BorderMask& mask,
                           const std::vector<int>& gcn_labels);

LabelMap predict_merge(const GcnModel& model, const PreparedFrame& frame);
LabelMap predict_merge(const GcnModel& model, const Frame& frame, const PipelineConfig& cfg);

/// Dataset-level scores, each from one confusion matrix over all frames.
/// Border variants are restricted to the base-prediction border mask and are
/// absent when no frame has a border pixel.
struct EvaluationReport {
  IoUReport base;
  IoUReport merged;
  IoUReport theoretical_max;
  std::optional<IoUReport> base_border;
  std::optional<IoUReport> merged_border;
};

// `predictions[i]` is the refined label map of `frames[i]`.
EvaluationReport evaluate_predictions(const std::vector<Frame>& frames,
                                      const std::vector<LabelMap>& predictions,
                                      const PipelineConfig& cfg);
EvaluationReport evaluate(const GcnModel& model, const std::vector<Frame>& frames,
                          const PipelineConfig& cfg);

std::string evaluation_json(const EvaluationReport& report);

}  // namespace bseg
