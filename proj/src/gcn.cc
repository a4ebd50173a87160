#include "bseg/gcn.h"

#include <algorithm>
#include <cmath>
#include <string>

#include "bseg/errors.h"

namespace bseg {
namespace {

constexpr double kLogClamp = 1e-12;

// A (H W), multiplying by the sparse matrix on the narrower side.
Matrix propagate(const NormalizedAdjacency& adj, const Matrix& h, const Matrix& w) {
  if (h.cols() < w.cols()) return multiply(adj.matrix, h) * w;
  return multiply(adj.matrix, h * w);
}

void softmax_rows(Matrix& z) {
  for (Eigen::Index i = 0; i < z.rows(); ++i) {
    auto row = z.row(i);
    const double mx = row.maxCoeff();
    row = (row.array() - mx).exp();
    row /= row.sum();
  }
}

void check_labels(const LabelMap& labels, const TrainMask& mask, Eigen::Index n, int classes) {
  if (static_cast<Eigen::Index>(labels.size()) != n ||
      static_cast<Eigen::Index>(mask.active.size()) != n) {
    throw DataError("labels, mask and predictions disagree on node count");
  }
  if (mask.count == 0) throw DataError("training mask selects no nodes");
  for (size_t i = 0; i < mask.active.size(); ++i) {
    if (mask.active[i] && (labels.labels[i] < 0 || labels.labels[i] >= classes)) {
      throw DataError("masked node " + std::to_string(i) + " has label outside [0, C)");
    }
  }
}

}  // namespace

void GcnConfig::validate() const {
  if (hidden_channels.empty()) throw ConfigError("hidden_channels must not be empty");
  for (int h : hidden_channels) {
    if (h <= 0) throw ConfigError("hidden channel counts must be positive");
  }
  if (num_classes < 2) throw ConfigError("num_classes must be >= 2");
  if (!(dropout_rate >= 0.0 && dropout_rate < 1.0)) {
    throw ConfigError("dropout rate must lie in [0, 1)");
  }
  if (!(l2_coeff >= 0.0)) throw ConfigError("l2 coefficient must be >= 0");
  if (!(learning_rate > 0.0)) throw ConfigError("learning rate must be > 0");
  if (!(adam_beta1 >= 0.0 && adam_beta1 < 1.0) || !(adam_beta2 >= 0.0 && adam_beta2 < 1.0)) {
    throw ConfigError("Adam betas must lie in [0, 1)");
  }
  if (!(adam_epsilon > 0.0)) throw ConfigError("Adam epsilon must be > 0");
}

GcnModel::GcnModel(int input, const GcnConfig& cfg) : config(cfg), input_dim(input) {
  config.validate();
  if (input <= 0) throw ConfigError("input dimension must be positive");
  std::vector<int> dims{input};
  dims.insert(dims.end(), cfg.hidden_channels.begin(), cfg.hidden_channels.end());
  dims.push_back(cfg.num_classes);

  Rng rng(cfg.seed);
  for (size_t l = 0; l + 1 < dims.size(); ++l) {
    const int in = dims[l], out = dims[l + 1];
    const double limit = std::sqrt(6.0 / (in + out));
    GraphConvLayer layer{Matrix(in, out), RowVector::Zero(out)};
    for (Eigen::Index i = 0; i < layer.weight.size(); ++i) {
      layer.weight.data()[i] = rng.uniform(-limit, limit);
    }
    layers.push_back(std::move(layer));
    moments.push_back({Matrix::Zero(in, out), Matrix::Zero(in, out), RowVector::Zero(out),
                       RowVector::Zero(out)});
  }
}

void GcnModel::check_finite() const {
  for (const auto& l : layers) {
    if (!l.weight.allFinite() || !l.bias.allFinite()) {
      throw DivergenceError("model parameters are not finite");
    }
  }
}

double Gradients::max_abs() const {
  double m = 0.0;
  for (const auto& w : weight) m = std::max(m, w.cwiseAbs().maxCoeff());
  for (const auto& b : bias) m = std::max(m, b.cwiseAbs().maxCoeff());
  return m;
}

TrainMask TrainMask::from_border(const BorderMask& mask) {
  TrainMask t;
  t.active = mask.selected;
  t.count = mask.count();
  return t;
}

TrainMask TrainMask::from_border(const BorderMask& mask, const LabelMap& labels) {
  if (labels.size() != mask.size()) throw DataError("mask and labels differ in size");
  TrainMask t;
  t.active.assign(mask.size(), 0);
  for (size_t i = 0; i < mask.size(); ++i) {
    if (mask.selected[i] && !labels.is_void(labels.labels[i])) {
      t.active[i] = 1;
      ++t.count;
    }
  }
  return t;
}

TrainMask TrainMask::all(size_t n) {
  TrainMask t;
  t.active.assign(n, 1);
  t.count = n;
  return t;
}

ForwardTrace forward_trace(const GcnModel& model, const NormalizedAdjacency& adj,
                           const Matrix& x, bool training, Rng& rng) {
  if (x.rows() != static_cast<Eigen::Index>(adj.num_nodes())) {
    throw DataError("feature rows do not match adjacency size");
  }
  if (x.cols() != model.input_dim) {
    throw DataError("feature width " + std::to_string(x.cols()) +
                    " does not match model input " + std::to_string(model.input_dim));
  }
  const double p = model.config.dropout_rate;
  const bool drop = training && p > 0.0;
  const size_t num_layers = model.layers.size();

  ForwardTrace t;
  t.inputs.reserve(num_layers);
  t.inputs.push_back(x);
  for (size_t l = 0; l < num_layers; ++l) {
    const GraphConvLayer& layer = model.layers[l];
    Matrix z = propagate(adj, t.inputs[l], layer.weight);
    z.rowwise() += layer.bias;
    if (!z.allFinite()) throw DivergenceError("non-finite activations in layer " + std::to_string(l));
    if (l + 1 == num_layers) {
      t.probs = z;
      softmax_rows(t.probs);
      t.preactivations.push_back(std::move(z));
      break;
    }
    Matrix h = z.cwiseMax(0.0);
    Matrix scale;
    if (drop) {
      scale.resize(h.rows(), h.cols());
      const double keep = 1.0 / (1.0 - p);
      for (Eigen::Index i = 0; i < scale.size(); ++i) {
        scale.data()[i] = rng.uniform() < p ? 0.0 : keep;
      }
      h = h.cwiseProduct(scale);
    }
    t.preactivations.push_back(std::move(z));
    t.dropout_scale.push_back(std::move(scale));
    t.inputs.push_back(std::move(h));
  }
  if (!t.probs.allFinite()) throw DivergenceError("non-finite class probabilities");
  return t;
}

Matrix forward(const GcnModel& model, const NormalizedAdjacency& adj, const FeatureMatrix& x,
               bool training, Rng& rng) {
  return forward_trace(model, adj, x.data, training, rng).probs;
}

double masked_loss(const Matrix& probs, const LabelMap& labels, const TrainMask& mask,
                   const GcnModel& model, double l2_coeff) {
  check_labels(labels, mask, probs.rows(), static_cast<int>(probs.cols()));
  double sum = 0.0;
  for (size_t i = 0; i < mask.active.size(); ++i) {
    if (!mask.active[i]) continue;
    sum -= std::log(std::max(probs(static_cast<Eigen::Index>(i), labels.labels[i]), kLogClamp));
  }
  double loss = sum / static_cast<double>(mask.count);
  if (l2_coeff != 0.0) {
    double sq = 0.0;
    for (const auto& l : model.layers) sq += l.weight.squaredNorm();
    loss += l2_coeff * sq;
  }
  return loss;
}

Gradients backward(const GcnModel& model, const NormalizedAdjacency& adj,
                   const ForwardTrace& trace, const LabelMap& labels, const TrainMask& mask,
                   double l2_coeff) {
  const Matrix& probs = trace.probs;
  check_labels(labels, mask, probs.rows(), static_cast<int>(probs.cols()));
  const size_t num_layers = model.layers.size();

  // d loss / d logits = (softmax - onehot) / count on active rows.
  Matrix dz = Matrix::Zero(probs.rows(), probs.cols());
  const double inv_count = 1.0 / static_cast<double>(mask.count);
  for (size_t i = 0; i < mask.active.size(); ++i) {
    if (!mask.active[i]) continue;
    const auto row = static_cast<Eigen::Index>(i);
    dz.row(row) = probs.row(row) * inv_count;
    dz(row, labels.labels[i]) -= inv_count;
  }

  Gradients g;
  g.weight.resize(num_layers);
  g.bias.resize(num_layers);
  for (size_t l = num_layers; l-- > 0;) {
    const GraphConvLayer& layer = model.layers[l];
    g.bias[l] = dz.colwise().sum();
    const Matrix spread = multiply(adj.matrix, dz);
    g.weight[l] = trace.inputs[l].transpose() * spread;
    if (l2_coeff != 0.0) g.weight[l] += 2.0 * l2_coeff * layer.weight;
    if (l == 0) break;

    Matrix dh = spread * layer.weight.transpose();
    if (trace.dropout_scale[l - 1].size() != 0) dh = dh.cwiseProduct(trace.dropout_scale[l - 1]);
    const Matrix& z_prev = trace.preactivations[l - 1];
    dz = (z_prev.array() > 0.0).select(dh, 0.0);
  }
  return g;
}

LossAndGradients compute_gradients(const GcnModel& model, const NormalizedAdjacency& adj,
                                   const FeatureMatrix& x, const LabelMap& labels,
                                   const TrainMask& mask, Rng& rng) {
  ForwardTrace trace = forward_trace(model, adj, x.data, true, rng);
  LossAndGradients out;
  out.loss = masked_loss(trace.probs, labels, mask, model, model.config.l2_coeff);
  if (!std::isfinite(out.loss)) throw DivergenceError("loss is not finite");
  out.gradients = backward(model, adj, trace, labels, mask, model.config.l2_coeff);
  out.probs = std::move(trace.probs);
  return out;
}

void adam_step(GcnModel& model, const Gradients& grads) {
  if (grads.weight.size() != model.layers.size() || grads.bias.size() != model.layers.size()) {
    throw DataError("gradient layer count does not match model");
  }
  for (size_t l = 0; l < grads.weight.size(); ++l) {
    if (!grads.weight[l].allFinite() || !grads.bias[l].allFinite()) {
      throw DivergenceError("non-finite gradients");
    }
  }
  const GcnConfig& c = model.config;
  ++model.step;
  const double t = static_cast<double>(model.step);
  const double corr1 = 1.0 - std::pow(c.adam_beta1, t);
  const double corr2 = 1.0 - std::pow(c.adam_beta2, t);

  auto update = [&](auto& param, auto& m, auto& v, const auto& g) {
    m = c.adam_beta1 * m + (1.0 - c.adam_beta1) * g;
    v = c.adam_beta2 * v + (1.0 - c.adam_beta2) * g.cwiseProduct(g);
    param.array() -= c.learning_rate * (m.array() / corr1) /
                     ((v.array() / corr2).sqrt() + c.adam_epsilon);
  };
  for (size_t l = 0; l < model.layers.size(); ++l) {
    GraphConvLayer& layer = model.layers[l];
    AdamMoments& mom = model.moments[l];
    update(layer.weight, mom.weight_m, mom.weight_v, grads.weight[l]);
    update(layer.bias, mom.bias_m, mom.bias_v, grads.bias[l]);
  }
  model.check_finite();
}

std::vector<int> argmax_rows(const Matrix& probs) {
  std::vector<int> out(static_cast<size_t>(probs.rows()));
  for (Eigen::Index i = 0; i < probs.rows(); ++i) {
    int best = 0;
    for (Eigen::Index c = 1; c < probs.cols(); ++c) {
      if (probs(i, c) > probs(i, best)) best = static_cast<int>(c);
    }
    out[static_cast<size_t>(i)] = best;
  }
  return out;
}

double masked_accuracy(const Matrix& probs, const LabelMap& labels, const TrainMask& mask) {
  check_labels(labels, mask, probs.rows(), static_cast<int>(probs.cols()));
  const std::vector<int> pred = argmax_rows(probs);
  size_t hit = 0;
  for (size_t i = 0; i < mask.active.size(); ++i) {
    if (mask.active[i] && pred[i] == labels.labels[i]) ++hit;
  }
  return static_cast<double>(hit) / static_cast<double>(mask.count);
}

}  // namespace bseg
