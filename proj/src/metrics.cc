#include "bseg/metrics.h"

#include <iomanip>
#include <numeric>

#include <json.hpp>

#include "bseg/errors.h"

namespace bseg {

uint64_t ConfusionMatrix::total() const {
  return std::accumulate(counts.begin(), counts.end(), uint64_t{0});
}

ConfusionMatrix& ConfusionMatrix::operator+=(const ConfusionMatrix& other) {
  if (other.num_classes != num_classes) throw DataError("confusion matrix class count mismatch");
  for (size_t i = 0; i < counts.size(); ++i) counts[i] += other.counts[i];
  return *this;
}

void accumulate(ConfusionMatrix& cm, const LabelMap& pred, const LabelMap& gt,
                const BorderMask* restrict) {
  if (pred.height != gt.height || pred.width != gt.width || pred.size() != gt.size()) {
    throw DataError("prediction and ground truth dimensions differ");
  }
  if (restrict && (restrict->height != gt.height || restrict->width != gt.width)) {
    throw DataError("evaluation mask dimensions differ");
  }
  for (size_t i = 0; i < gt.size(); ++i) {
    if (restrict && !restrict->selected[i]) continue;
    const int g = gt.labels[i];
    if (gt.is_void(g)) continue;
    const int p = pred.labels[i];
    if (g < 0 || g >= cm.num_classes || p < 0 || p >= cm.num_classes) {
      throw DataError("label outside [0, " + std::to_string(cm.num_classes) + ")");
    }
    ++cm.at(g, p);
  }
}

IoUReport miou(const ConfusionMatrix& cm) {
  IoUReport r;
  r.pixel_count = cm.total();
  if (r.pixel_count == 0) throw DataError("confusion matrix is empty");
  const int c = cm.num_classes;
  r.per_class.assign(c, std::nullopt);
  double sum = 0.0;
  int defined = 0;
  for (int k = 0; k < c; ++k) {
    uint64_t row = 0, col = 0;
    for (int j = 0; j < c; ++j) {
      row += cm.at(k, j);
      col += cm.at(j, k);
    }
    const uint64_t tp = cm.at(k, k);
    const uint64_t denom = row + col - tp;  // TP + FN + FP
    if (denom == 0) continue;
    r.per_class[k] = static_cast<double>(tp) / static_cast<double>(denom);
    sum += *r.per_class[k];
    ++defined;
  }
  r.miou = sum / defined;
  return r;
}

LabelMap theoretical_max_prediction(const LabelMap& base_pred, const LabelMap& gt,
                                    const BorderMask& mask) {
  if (base_pred.size() != gt.size() || mask.size() != gt.size() ||
      base_pred.height != gt.height || mask.height != gt.height) {
    throw DataError("theoretical max inputs differ in size");
  }
  LabelMap out = base_pred;
  for (size_t i = 0; i < out.size(); ++i) {
    if (mask.selected[i] && !gt.is_void(gt.labels[i])) out.labels[i] = gt.labels[i];
  }
  return out;
}

IoUReport theoretical_max(const LabelMap& base_pred, const LabelMap& gt,
                          const BorderMask& mask) {
  ConfusionMatrix cm(gt.num_classes);
  accumulate(cm, theoretical_max_prediction(base_pred, gt, mask), gt);
  return miou(cm);
}

std::string report_json(const IoUReport& r, int indent) {
  nlohmann::json j;
  j["miou"] = r.miou;
  j["pixel_count"] = r.pixel_count;
  nlohmann::json per = nlohmann::json::array();
  for (const auto& v : r.per_class) per.push_back(v ? nlohmann::json(*v) : nlohmann::json());
  j["per_class_iou"] = per;
  return j.dump(indent);
}

void write_report_csv(std::ostream& out, const IoUReport& r) {
  out << "class,iou\n";
  out << std::setprecision(17);
  for (size_t k = 0; k < r.per_class.size(); ++k) {
    out << k << ',';
    if (r.per_class[k]) out << *r.per_class[k];
    out << '\n';
  }
}

}  // namespace bseg
