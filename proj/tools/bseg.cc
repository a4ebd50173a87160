// bseg: command line front end for border refinement.
//
//   bseg synth    --out-dir DIR
//   bseg mask     --labels base.png --out-dir DIR
//   bseg graph    --labels base.png --rgb frame.png --out-dir DIR
//   bseg features --labels base.png --rgb frame.png [--extras M] --out-dir DIR
//   bseg train    --train train.txt [--val val.txt] --out-dir DIR
//   bseg predict  --manifest test.txt --model model.bgm --out-dir DIR
//   bseg eval     --manifest test.txt --pred-dir DIR --out-dir DIR
//   bseg eval     --pred p.png --gt g.png [--base b.png] --out-dir DIR
//   bseg ablate   --axis connections --data-dir DIR --out-dir DIR
//
// Every subcommand accepts --config FILE and trailing section.key=value
// overrides. Failures print one "bseg: error ..." line on stderr, remove the
// files written so far and exit with 2 (config), 3 (data) or 4 (divergence).

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "bseg/ablation.h"
#include "bseg/checkpoint.h"
#include "bseg/config.h"
#include "bseg/errors.h"
#include "bseg/features.h"
#include "bseg/grid_graph.h"
#include "bseg/metrics.h"
#include "bseg/pipeline.h"
#include "bseg/png_io.h"
#include "bseg/synth.h"

namespace fs = std::filesystem;
using namespace bseg;

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitData = 3;
constexpr int kExitDivergence = 4;

// Files written by the current invocation, removed again on failure.
class Outputs {
 public:
  void set_dir(const std::string& dir) {
    dir_ = dir.empty() ? "." : dir;
    if (!fs::exists(dir_)) {
      fs::create_directories(dir_);
      created_dir_ = true;
    }
  }

  std::string path(const std::string& name) {
    const std::string p = (fs::path(dir_) / name).string();
    written_.push_back(p);
    return p;
  }

  const std::string& dir() const { return dir_; }

  void rollback() {
    std::error_code ec;
    for (const auto& p : written_) fs::remove(p, ec);
    if (created_dir_ && fs::is_empty(dir_, ec)) fs::remove(dir_, ec);
  }

 private:
  std::string dir_ = ".";
  bool created_dir_ = false;
  std::vector<std::string> written_;
};

struct Common {
  std::string config;
  std::optional<uint32_t> seed;
  std::optional<int> thickness;
  std::optional<int> k;
  std::optional<std::string> features;
  std::optional<double> dropout;
  std::optional<double> l2;
  std::optional<int> epochs;
  std::string out_dir = ".";
  std::vector<std::string> overrides;
};

void add_common(CLI::App* sub, Common& c) {
  sub->add_option("--config", c.config, "Config file (section/key = value)");
  sub->add_option("--seed", c.seed, "Seed for model init, dropout and synthesis");
  sub->add_option("--thickness", c.thickness, "Border thickness in pixels");
  sub->add_option("--k", c.k, "Neighbours per border node");
  sub->add_option("--features", c.features, "Feature spec, e.g. base,I");
  sub->add_option("--dropout", c.dropout, "Dropout rate");
  sub->add_option("--l2", c.l2, "L2 coefficient");
  sub->add_option("--epochs", c.epochs, "Training epochs");
  sub->add_option("--out-dir", c.out_dir, "Output directory");
  sub->add_option("overrides", c.overrides, "section.key=value overrides");
}

Settings resolve_settings(const Common& c) {
  Settings s = c.config.empty() ? Settings{} : load_settings(c.config);
  if (c.seed) {
    s.pipeline.gcn.seed = *c.seed;
    s.synth.seed = *c.seed;
  }
  if (c.thickness) s.pipeline.thickness = *c.thickness;
  if (c.k) s.pipeline.k = *c.k;
  if (c.features) s.pipeline.features = parse_feature_spec(*c.features);
  if (c.dropout) s.pipeline.gcn.dropout_rate = *c.dropout;
  if (c.l2) s.pipeline.gcn.l2_coeff = *c.l2;
  if (c.epochs) s.pipeline.epochs = *c.epochs;
  for (const auto& o : c.overrides) apply_override(s, o);
  s.pipeline.validate();
  s.synth.validate();
  return s;
}

std::string write_text(Outputs& out, const std::string& name, const std::string& text) {
  const std::string p = out.path(name);
  std::ofstream f(p);
  f << text;
  if (!f) throw DataError("cannot write '" + p + "'");
  return p;
}

// Labels read only for their structure (mask / graph) need no class range.
LabelMap read_any_labels(const std::string& path) { return read_label_png(path, 256); }

std::vector<Frame> load_manifest(const std::string& path, const PipelineConfig& cfg) {
  return load_frames(read_dataset_manifest(path), cfg);
}

int run_synth(const Settings& s, Outputs& out) {
  SynthConfig cfg = s.synth;
  const int total = s.synth_train_frames + s.synth_val_frames + s.synth_test_frames;
  cfg.frame_count = total;
  for (int i = 0; i < total; ++i) {
    // Register every file before writing so a failure removes all of them.
    const std::string id = cfg.id_prefix + "_" + std::to_string(i);
    for (const char* suffix : {"_rgb.png", "_base.png", "_gt.png"}) out.path(id + suffix);
    if (cfg.extras_channels > 0) {
      out.path(id + "_extras.txt");
      out.path(id + "_smooth.btf");
    }
  }
  const std::vector<FrameRecord> records = generate(cfg, out.dir());
  auto slice = [&](int from, int count) {
    return std::vector<FrameRecord>(records.begin() + from, records.begin() + from + count);
  };
  write_dataset_manifest(out.path("train.txt"), slice(0, s.synth_train_frames));
  write_dataset_manifest(out.path("val.txt"), slice(s.synth_train_frames, s.synth_val_frames));
  write_dataset_manifest(out.path("test.txt"),
                         slice(s.synth_train_frames + s.synth_val_frames, s.synth_test_frames));
  std::cout << "frames " << total << " train " << s.synth_train_frames << " val "
            << s.synth_val_frames << " test " << s.synth_test_frames << "\n";
  return 0;
}

int run_mask(const Settings& s, Outputs& out, const std::string& labels_path) {
  const BorderMask mask = compute_border_mask(read_any_labels(labels_path), s.pipeline.thickness);
  write_mask_png(out.path("mask.png"), mask);
  std::cout << "selected " << mask.count() << " of " << mask.size() << "\n";
  return 0;
}

int run_graph(const Settings& s, Outputs& out, const std::string& labels_path,
              const std::string& rgb_path) {
  const BorderMask mask = compute_border_mask(read_any_labels(labels_path), s.pipeline.thickness);
  const PixelGraph graph = build_graph(mask, read_rgb_png(rgb_path), s.pipeline.k);
  write_graph(out.path("graph.bgg"), graph);
  std::ostringstream stats;
  stats << "{\"nodes\": " << graph.num_nodes() << ", \"selected\": " << mask.count()
        << ", \"k\": " << graph.k << ", \"edges\": " << graph.edges.nnz() << "}\n";
  write_text(out, "graph_stats.json", stats.str());
  std::cout << stats.str();
  return 0;
}

int run_features(const Settings& s, Outputs& out, const std::string& labels_path,
                 const std::string& rgb_path, const std::string& extras_path) {
  const LabelMap base =
      read_label_png(labels_path, s.pipeline.gcn.num_classes, s.pipeline.void_label);
  const RgbFrame rgb = read_rgb_png(rgb_path);
  const std::vector<FeatureTensor> extras =
      extras_path.empty() ? std::vector<FeatureTensor>{} : load_extras(extras_path);
  const FeatureMatrix fm = assemble(rgb, base, extras, s.pipeline.features);
  const FeatureTensor t = to_tensor(fm, rgb.height, rgb.width);
  write_tensor(out.path("features.btf"), t);
  write_tensor_manifest(out.path("features.txt"),
                        {{t.name, t.channels, t.height, t.width, "features.btf"}});
  std::ostringstream spans;
  for (const auto& span : fm.manifest) {
    spans << span.name << ' ' << span.offset << ' ' << span.channels << '\n';
  }
  write_text(out, "feature_spans.txt", spans.str());
  std::cout << "nodes " << fm.num_nodes() << " features " << fm.num_features() << "\n";
  return 0;
}

int run_train(const Settings& s, Outputs& out, const std::string& train_path,
              const std::string& val_path) {
  const PipelineConfig& cfg = s.pipeline;
  cfg.validate();
  const std::vector<Frame> train_frames = load_manifest(train_path, cfg);
  const std::vector<Frame> val_frames =
      val_path.empty() ? std::vector<Frame>{} : load_manifest(val_path, cfg);
  const TrainResult result = train(train_frames, val_frames, cfg);
  save_model(out.path("model.bgm"), result.model);
  std::ostringstream log;
  write_train_log(log, result.log);
  write_text(out, "train_log.csv", log.str());
  std::ostringstream settings;
  write_pipeline_settings(settings, s);
  write_text(out, "pipeline.cfg", settings.str());
  std::cout << "steps " << result.log.size() << " skipped_frames " << result.skipped_frames
            << " best_epoch " << result.best_epoch;
  if (result.best_val_miou) std::cout << " best_val_miou " << *result.best_val_miou;
  std::cout << "\n";
  return 0;
}

int run_predict(const Settings& s, Outputs& out, const std::string& manifest_path,
                const std::string& model_path) {
  const GcnModel model = load_model(model_path);
  PipelineConfig cfg = s.pipeline;
  cfg.gcn.num_classes = model.config.num_classes;
  const std::vector<Frame> frames = load_manifest(manifest_path, cfg);
  for (const Frame& f : frames) {
    write_label_png(out.path(f.id + "_pred.png"), predict_merge(model, f, cfg));
  }
  std::cout << "predicted " << frames.size() << " frames\n";
  return 0;
}

int run_eval(const Settings& s, Outputs& out, const std::string& manifest_path,
             const std::string& pred_dir, const std::string& pred_path,
             const std::string& gt_path, const std::string& base_path) {
  const PipelineConfig& cfg = s.pipeline;
  const int classes = cfg.gcn.num_classes;
  std::vector<Frame> frames;
  std::vector<LabelMap> preds;
  if (!manifest_path.empty()) {
    if (pred_dir.empty()) throw ConfigError("eval with --manifest needs --pred-dir");
    frames = load_manifest(manifest_path, cfg);
    for (const Frame& f : frames) {
      preds.push_back(read_label_png((fs::path(pred_dir) / (f.id + "_pred.png")).string(),
                                     classes, cfg.void_label));
    }
  } else {
    if (pred_path.empty() || gt_path.empty()) {
      throw ConfigError("eval needs --manifest/--pred-dir or --pred/--gt");
    }
    Frame f;
    f.id = "single";
    f.gt = read_label_png(gt_path, classes, cfg.void_label);
    preds.push_back(read_label_png(pred_path, classes, cfg.void_label));
    f.base = base_path.empty() ? preds.back() : read_label_png(base_path, classes, cfg.void_label);
    frames.push_back(std::move(f));
  }
  const EvaluationReport report = evaluate_predictions(frames, preds, cfg);
  write_text(out, "report.json", evaluation_json(report) + "\n");
  std::ostringstream csv;
  write_report_csv(csv, report.merged);
  write_text(out, "report.csv", csv.str());
  std::cout << "miou " << report.merged.miou << " base_miou " << report.base.miou;
  if (report.merged_border) {
    std::cout << " border_miou " << report.merged_border->miou << " base_border_miou "
              << report.base_border->miou;
  }
  std::cout << " theoretical_max_miou " << report.theoretical_max.miou << "\n";
  return 0;
}

int run_ablate(const Settings& s, Outputs& out, const std::string& axis_text,
               const std::string& data_dir, std::string train_path, std::string val_path,
               std::string test_path, const std::string& values_text) {
  const AblationAxis axis = parse_axis(axis_text);
  if (!data_dir.empty()) {
    train_path = (fs::path(data_dir) / "train.txt").string();
    val_path = (fs::path(data_dir) / "val.txt").string();
    test_path = (fs::path(data_dir) / "test.txt").string();
  }
  if (train_path.empty() || test_path.empty()) {
    throw ConfigError("ablate needs --data-dir or --train/--test manifests");
  }
  const PipelineConfig& cfg = s.pipeline;
  cfg.validate();
  const std::vector<Frame> train_frames = load_manifest(train_path, cfg);
  const std::vector<Frame> val_frames =
      val_path.empty() ? std::vector<Frame>{} : load_manifest(val_path, cfg);
  const std::vector<Frame> test_frames = load_manifest(test_path, cfg);

  std::vector<std::string> values = default_grid(axis, s);
  if (!values_text.empty()) {
    values.clear();
    std::stringstream ss(values_text);
    for (std::string v; std::getline(ss, v, axis == AblationAxis::kFeatures ? ';' : ',');) {
      if (!v.empty()) values.push_back(v);
    }
  }
  const std::string csv_path = out.path("ablation_" + axis_name(axis) + ".csv");
  std::vector<AblationPoint> points;
  for (const auto& v : values) {
    points.push_back(run_ablation_point(train_frames, val_frames, test_frames, cfg, axis, v));
    std::cout << axis_name(axis) << "=" << v << " miou " << points.back().miou << std::endl;
  }
  std::ofstream csv(csv_path);
  write_ablation_csv(csv, points);
  if (!csv) throw DataError("cannot write '" + csv_path + "'");
  return 0;
}

std::string one_line(std::string msg) {
  for (char& c : msg) {
    if (c == '\n' || c == '\r') c = ' ';
    if (c == '"') c = '\'';
  }
  return msg;
}

int fail(Outputs& out, int code, const char* kind, const std::string& msg) {
  out.rollback();
  std::cerr << "bseg: error code=" << code << " kind=" << kind << " message=\"" << one_line(msg)
            << "\"\n";
  return code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Border refinement of semantic segmentation with a graph convolutional network"};
  app.require_subcommand(1, 1);

  Common common;
  std::string labels, rgb, extras, train_manifest, val_manifest, test_manifest, manifest, model,
      pred_dir, pred, gt, base, axis, data_dir, values;

  auto* synth = app.add_subcommand("synth", "Generate a synthetic dataset");
  auto* mask = app.add_subcommand("mask", "Border mask of a label map");
  auto* graph = app.add_subcommand("graph", "k-NN pixel graph (BGG1 dump)");
  auto* features = app.add_subcommand("features", "Assembled feature matrix (BTF1)");
  auto* trainc = app.add_subcommand("train", "Train the GCN on a dataset manifest");
  auto* predict = app.add_subcommand("predict", "Merged predictions for a dataset manifest");
  auto* eval = app.add_subcommand("eval", "mIoU report (overall, border, theoretical max)");
  auto* ablate = app.add_subcommand("ablate", "Sweep one hyper-parameter axis");
  for (auto* sub : {synth, mask, graph, features, trainc, predict, eval, ablate}) {
    add_common(sub, common);
  }

  mask->add_option("--labels", labels, "Base prediction PNG")->required();
  graph->add_option("--labels", labels, "Base prediction PNG")->required();
  graph->add_option("--rgb", rgb, "RGB frame PNG")->required();
  features->add_option("--labels", labels, "Base prediction PNG")->required();
  features->add_option("--rgb", rgb, "RGB frame PNG")->required();
  features->add_option("--extras", extras, "Extras tensor manifest");
  trainc->add_option("--train", train_manifest, "Training dataset manifest")->required();
  trainc->add_option("--val", val_manifest, "Validation dataset manifest");
  predict->add_option("--manifest", manifest, "Dataset manifest")->required();
  predict->add_option("--model", model, "BGM1 checkpoint")->required();
  eval->add_option("--manifest", manifest, "Dataset manifest");
  eval->add_option("--pred-dir", pred_dir, "Directory with <id>_pred.png files");
  eval->add_option("--pred", pred, "Single predicted label PNG");
  eval->add_option("--gt", gt, "Single ground-truth label PNG");
  eval->add_option("--base", base, "Single base prediction PNG");
  ablate->add_option("--axis", axis, "connections | thickness | features | dropout | l2")
      ->required();
  ablate->add_option("--data-dir", data_dir, "Directory with train/val/test manifests");
  ablate->add_option("--train", train_manifest, "Training dataset manifest");
  ablate->add_option("--val", val_manifest, "Validation dataset manifest");
  ablate->add_option("--test", test_manifest, "Test dataset manifest");
  ablate->add_option("--values", values, "Comma separated values (';' for features)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "bseg: error code=" << kExitConfig << " kind=config message=\""
              << one_line(e.what()) << "\"\n";
    return kExitConfig;
  }

  Outputs out;
  try {
    const Settings s = resolve_settings(common);
    out.set_dir(common.out_dir);
    if (synth->parsed()) return run_synth(s, out);
    if (mask->parsed()) return run_mask(s, out, labels);
    if (graph->parsed()) return run_graph(s, out, labels, rgb);
    if (features->parsed()) return run_features(s, out, labels, rgb, extras);
    if (trainc->parsed()) return run_train(s, out, train_manifest, val_manifest);
    if (predict->parsed()) return run_predict(s, out, manifest, model);
    if (eval->parsed()) return run_eval(s, out, manifest, pred_dir, pred, gt, base);
    if (ablate->parsed()) {
      return run_ablate(s, out, axis, data_dir, train_manifest, val_manifest, test_manifest,
                        values);
    }
  } catch (const ConfigError& e) {
    return fail(out, kExitConfig, "config", e.what());
  } catch (const DivergenceError& e) {
    return fail(out, kExitDivergence, "divergence", e.what());
  } catch (const DataError& e) {
    return fail(out, kExitData, "data", e.what());
  } catch (const std::exception& e) {
    return fail(out, kExitData, "data", e.what());
  }
  return 0;
}
