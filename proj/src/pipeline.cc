#include "bseg/pipeline.h"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numeric>
#include <sstream>

#include <json.hpp>

#include "bseg/errors.h"
#include "bseg/png_io.h"

namespace bseg {
namespace {

std::string resolve(const std::filesystem::path& dir, const std::string& p) {
  const std::filesystem::path path(p);
  return path.is_absolute() ? p : (dir / path).string();
}

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::vector<PreparedFrame> prepare_all(const std::vector<Frame>& frames,
                                       const PipelineConfig& cfg) {
  std::vector<PreparedFrame> out;
  out.reserve(frames.size());
  for (const Frame& f : frames) out.push_back(prepare_frame(f, cfg));
  return out;
}

double merged_miou(const GcnModel& model, const std::vector<PreparedFrame>& frames, int classes) {
  ConfusionMatrix cm(classes);
  for (const PreparedFrame& p : frames) accumulate(cm, predict_merge(model, p), p.source->gt);
  return miou(cm).miou;
}

}  // namespace

std::vector<FrameRecord> read_dataset_manifest(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open dataset manifest '" + path + "'");
  const auto dir = std::filesystem::path(path).parent_path();
  std::vector<FrameRecord> out;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos || line[0] == '#') continue;
    std::istringstream ls(line);
    std::vector<std::string> fields;
    for (std::string f; ls >> f;) fields.push_back(f);
    if (fields.size() != 4 && fields.size() != 5) {
      throw DataError(path + ":" + std::to_string(lineno) +
                      ": expected 'id rgb base gt [extras]'");
    }
    FrameRecord r{fields[0], resolve(dir, fields[1]), resolve(dir, fields[2]),
                  resolve(dir, fields[3]), std::nullopt};
    if (fields.size() == 5) r.extras_manifest = resolve(dir, fields[4]);
    out.push_back(std::move(r));
  }
  return out;
}

void write_dataset_manifest(const std::string& path, const std::vector<FrameRecord>& records) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot open '" + path + "' for writing");
  const auto dir = std::filesystem::absolute(path).parent_path();
  auto rel = [&](const std::string& p) {
    return std::filesystem::absolute(p).lexically_normal().lexically_relative(dir).string();
  };
  for (const FrameRecord& r : records) {
    out << r.id << ' ' << rel(r.rgb_path) << ' ' << rel(r.base_path) << ' ' << rel(r.gt_path);
    if (r.extras_manifest) out << ' ' << rel(*r.extras_manifest);
    out << '\n';
  }
}

void PipelineConfig::validate() const {
  if (thickness < 1) throw ConfigError("thickness must be >= 1");
  if (k < 1) throw ConfigError("k must be >= 1");
  if (epochs < 1) throw ConfigError("epochs must be >= 1");
  if (val_every < 1) throw ConfigError("val_every must be >= 1");
  if (features.empty()) throw ConfigError("feature spec is empty");
  gcn.validate();
}

Frame load_frame(const FrameRecord& record, int num_classes, std::optional<int> void_label) {
  Frame f;
  f.id = record.id;
  f.rgb = read_rgb_png(record.rgb_path);
  f.base = read_label_png(record.base_path, num_classes, void_label);
  f.gt = read_label_png(record.gt_path, num_classes, void_label);
  if (record.extras_manifest) f.extras = load_extras(*record.extras_manifest);
  if (f.rgb.height != f.base.height || f.rgb.width != f.base.width ||
      f.gt.height != f.base.height || f.gt.width != f.base.width) {
    throw DataError("frame '" + record.id + "' has mismatched dimensions");
  }
  return f;
}

std::vector<Frame> load_frames(const std::vector<FrameRecord>& records,
                               const PipelineConfig& cfg) {
  std::vector<Frame> out;
  out.reserve(records.size());
  for (const auto& r : records) out.push_back(load_frame(r, cfg.gcn.num_classes, cfg.void_label));
  return out;
}

PreparedFrame prepare_frame(const Frame& frame, const PipelineConfig& cfg) {
  if (frame.base.num_classes != cfg.gcn.num_classes || frame.gt.num_classes != cfg.gcn.num_classes) {
    throw DataError("frame '" + frame.id + "' class count differs from the model's");
  }
  if (frame.gt.height != frame.base.height || frame.gt.width != frame.base.width) {
    throw DataError("frame '" + frame.id + "' ground truth and base prediction differ in size");
  }
  PreparedFrame p;
  p.id = frame.id;
  p.source = &frame;
  p.mask = compute_border_mask(frame.base, cfg.thickness);
  const PixelGraph graph = build_graph(p.mask, frame.rgb, cfg.k);
  p.edge_count = graph.edges.nnz();
  p.adjacency = renormalize(graph);
  p.features = assemble(frame.rgb, frame.base, frame.extras, cfg.features);
  p.train_mask = TrainMask::from_border(p.mask, frame.gt);
  return p;
}

TrainResult train(const std::vector<Frame>& train_frames, const std::vector<Frame>& val_frames,
                  const PipelineConfig& cfg, const TrainObserver& observer) {
  cfg.validate();
  if (train_frames.empty()) throw DataError("training set is empty");

  const std::vector<PreparedFrame> prepared = prepare_all(train_frames, cfg);
  const std::vector<PreparedFrame> prepared_val = prepare_all(val_frames, cfg);
  const int input_dim = static_cast<int>(prepared.front().features.num_features());
  for (const auto& p : prepared) {
    if (p.features.num_features() != input_dim) throw DataError("feature width differs between frames");
  }

  TrainResult result;
  result.model = GcnModel(input_dim, cfg.gcn);
  GcnModel best;
  Rng dropout_rng(static_cast<uint64_t>(cfg.gcn.seed) ^ 0x9E3779B97F4A7C15ULL);
  Rng shuffle_rng(static_cast<uint64_t>(cfg.gcn.seed) + 1);
  std::vector<size_t> order(prepared.size());
  std::iota(order.begin(), order.end(), size_t{0});

  for (const auto& p : prepared) {
    if (p.train_mask.count == 0) {
      std::cerr << "warning: frame '" << p.id << "' has no border pixels, skipped\n";
      ++result.skipped_frames;
    }
  }

  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    if (cfg.shuffle) {
      for (size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[shuffle_rng.below(i)]);
    }
    for (size_t idx : order) {
      const PreparedFrame& p = prepared[idx];
      if (p.train_mask.count == 0) continue;
      LossAndGradients lg = compute_gradients(result.model, p.adjacency, p.features,
                                              p.source->gt, p.train_mask, dropout_rng);
      adam_step(result.model, lg.gradients);
      result.log.push_back({epoch, p.id, lg.loss, std::nullopt});
      if (observer) observer(result.log.back());
    }
    const bool validate_now =
        !prepared_val.empty() && (epoch % cfg.val_every == 0 || epoch == cfg.epochs);
    if (validate_now) {
      const double score = merged_miou(result.model, prepared_val, cfg.gcn.num_classes);
      if (!result.log.empty()) result.log.back().val_miou = score;
      if (!result.best_val_miou || score > *result.best_val_miou) {
        result.best_val_miou = score;
        result.best_epoch = epoch;
        best = result.model;
      }
    }
  }
  if (result.best_val_miou) {
    result.model = std::move(best);
  } else {
    result.best_epoch = cfg.epochs;
  }
  return result;
}

void write_train_log(std::ostream& out, const std::vector<TrainLogRow>& log) {
  out << "epoch,frame_id,loss,val_miou\n";
  for (const auto& row : log) {
    out << row.epoch << ',' << row.frame_id << ',' << format_double(row.loss) << ',';
    if (row.val_miou) out << format_double(*row.val_miou);
    out << '\n';
  }
}

LabelMap merge_predictions(const LabelMap& base, const BorderMask& mask,
                           const std::vector<int>& gcn_labels) {
  if (mask.size() != base.size() || gcn_labels.size() != base.size()) {
    throw DataError("merge inputs differ in size");
  }
  LabelMap out = base;
  for (size_t i = 0; i < out.size(); ++i) {
    if (mask.selected[i]) out.labels[i] = gcn_labels[i];
  }
  return out;
}

LabelMap predict_merge(const GcnModel& model, const PreparedFrame& frame) {
  Rng unused(0);
  const Matrix probs = forward(model, frame.adjacency, frame.features, false, unused);
  return merge_predictions(frame.source->base, frame.mask, argmax_rows(probs));
}

LabelMap predict_merge(const GcnModel& model, const Frame& frame, const PipelineConfig& cfg) {
  return predict_merge(model, prepare_frame(frame, cfg));
}

EvaluationReport evaluate_predictions(const std::vector<Frame>& frames,
                                      const std::vector<LabelMap>& predictions,
                                      const PipelineConfig& cfg) {
  if (frames.size() != predictions.size()) throw DataError("one prediction per frame required");
  if (frames.empty()) throw DataError("evaluation set is empty");
  const int c = cfg.gcn.num_classes;
  ConfusionMatrix base(c), merged(c), tmax(c), base_border(c), merged_border(c);
  for (size_t i = 0; i < frames.size(); ++i) {
    const Frame& f = frames[i];
    const BorderMask mask = compute_border_mask(f.base, cfg.thickness);
    accumulate(base, f.base, f.gt);
    accumulate(merged, predictions[i], f.gt);
    accumulate(tmax, theoretical_max_prediction(f.base, f.gt, mask), f.gt);
    accumulate(base_border, f.base, f.gt, &mask);
    accumulate(merged_border, predictions[i], f.gt, &mask);
  }
  EvaluationReport r{miou(base), miou(merged), miou(tmax), std::nullopt, std::nullopt};
  if (base_border.total() > 0) {
    r.base_border = miou(base_border);
    r.merged_border = miou(merged_border);
  }
  return r;
}

EvaluationReport evaluate(const GcnModel& model, const std::vector<Frame>& frames,
                          const PipelineConfig& cfg) {
  std::vector<LabelMap> preds;
  preds.reserve(frames.size());
  for (const Frame& f : frames) preds.push_back(predict_merge(model, f, cfg));
  return evaluate_predictions(frames, preds, cfg);
}

std::string evaluation_json(const EvaluationReport& report) {
  auto to_json = [](const std::optional<IoUReport>& r) {
    return r ? nlohmann::json::parse(report_json(*r, -1)) : nlohmann::json();
  };
  nlohmann::json j;
  j["base"] = to_json(report.base);
  j["merged"] = to_json(report.merged);
  j["theoretical_max"] = to_json(report.theoretical_max);
  j["base_border"] = to_json(report.base_border);
  j["merged_border"] = to_json(report.merged_border);
  j["miou"] = report.merged.miou;
  return j.dump(2);
}

}  // namespace bseg
