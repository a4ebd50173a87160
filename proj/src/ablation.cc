#include "bseg/ablation.h"

#include <cstdio>
#include <sstream>

#include "bseg/checkpoint.h"
#include "bseg/errors.h"

namespace bseg {
namespace {

std::string join(const std::vector<std::string>& items, char sep) {
  std::string out;
  for (size_t i = 0; i < items.size(); ++i) {
    if (i) out += sep;
    out += items[i];
  }
  return out;
}

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

AblationAxis parse_axis(const std::string& name) {
  if (name == "connections" || name == "k") return AblationAxis::kConnections;
  if (name == "thickness") return AblationAxis::kThickness;
  if (name == "features") return AblationAxis::kFeatures;
  if (name == "dropout") return AblationAxis::kDropout;
  if (name == "l2" || name == "regularization") return AblationAxis::kL2;
  throw ConfigError("unknown ablation axis '" + name + "'");
}

std::string axis_name(AblationAxis axis) {
  switch (axis) {
    case AblationAxis::kConnections: return "connections";
    case AblationAxis::kThickness: return "thickness";
    case AblationAxis::kFeatures: return "features";
    case AblationAxis::kDropout: return "dropout";
    case AblationAxis::kL2: return "l2";
  }
  return {};
}

std::vector<std::string> default_grid(AblationAxis axis, const Settings& settings) {
  switch (axis) {
    case AblationAxis::kConnections: return {"2", "4", "8", "16"};
    case AblationAxis::kThickness: return {"1", "2", "3", "4", "5", "6"};
    case AblationAxis::kDropout: return {"0", "1e-4", "1e-3", "0.1", "0.5", "0.9"};
    case AblationAxis::kL2: return {"1e-1", "1e-4", "1e-8", "1e-11", "1e-13"};
    case AblationAxis::kFeatures: {
      std::vector<std::string> out;
      for (const auto& spec : settings.feature_grid) out.push_back(join(spec, ','));
      return out;
    }
  }
  return {};
}

PipelineConfig with_axis_value(PipelineConfig cfg, AblationAxis axis, const std::string& value) {
  Settings s;
  s.pipeline = std::move(cfg);
  switch (axis) {
    case AblationAxis::kConnections: apply_setting(s, "graph.k", value); break;
    case AblationAxis::kThickness: apply_setting(s, "graph.thickness", value); break;
    case AblationAxis::kFeatures: apply_setting(s, "features.spec", value); break;
    case AblationAxis::kDropout: apply_setting(s, "gcn.dropout", value); break;
    case AblationAxis::kL2: apply_setting(s, "gcn.l2", value); break;
  }
  return s.pipeline;
}

AblationPoint run_ablation_point(const std::vector<Frame>& train_frames,
                                 const std::vector<Frame>& val_frames,
                                 const std::vector<Frame>& test_frames,
                                 const PipelineConfig& base_cfg, AblationAxis axis,
                                 const std::string& value) {
  const PipelineConfig cfg = with_axis_value(base_cfg, axis, value);
  const TrainResult trained = train(train_frames, val_frames, cfg);
  const EvaluationReport report = evaluate(round_trip(trained.model), test_frames, cfg);
  AblationPoint p;
  p.axis = axis_name(axis);
  p.value = value;
  p.miou = report.merged.miou;
  if (report.merged_border) p.border_miou = report.merged_border->miou;
  p.base_miou = report.base.miou;
  return p;
}

std::vector<AblationPoint> run_ablation(const std::vector<Frame>& train_frames,
                                        const std::vector<Frame>& val_frames,
                                        const std::vector<Frame>& test_frames,
                                        const PipelineConfig& cfg, AblationAxis axis,
                                        const std::vector<std::string>& values) {
  std::vector<AblationPoint> out;
  for (const auto& v : values) {
    out.push_back(run_ablation_point(train_frames, val_frames, test_frames, cfg, axis, v));
  }
  return out;
}

void write_ablation_csv(std::ostream& out, const std::vector<AblationPoint>& points) {
  out << "axis,value,miou,border_miou,base_miou\n";
  for (const auto& p : points) {
    // Feature specs contain commas.
    const bool quote = p.value.find(',') != std::string::npos;
    out << p.axis << ',' << (quote ? "\"" + p.value + "\"" : p.value) << ','
        << format_double(p.miou) << ',';
    if (p.border_miou) out << format_double(*p.border_miou);
    out << ',' << format_double(p.base_miou) << '\n';
  }
}

}  // namespace bseg
