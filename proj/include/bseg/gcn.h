#pragma once

#include <cstdint>
#include <vector>

#include "bseg/features.h"
#include "bseg/grid_graph.h"
#include "bseg/image.h"
#include "bseg/linalg.h"
#include "bseg/random.h"

namespace bseg {

struct GcnConfig {
  std::vector<int> hidden_channels{64, 128, 64};
  int num_classes = 2;
  double dropout_rate = 0.0;
  double l2_coeff = 0.0;
  double learning_rate = 1e-3;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_epsilon = 1e-8;
  uint32_t seed = 0;

  void validate() const;
};

/// One graph convolution, Z = A (H W) + b.
struct GraphConvLayer {
  Matrix weight;  // in x out
  RowVector bias;  // out
};

struct AdamMoments {
  Matrix weight_m, weight_v;
  RowVector bias_m, bias_v;
};

/// Hidden graph convolutions with ReLU and dropout followed by a graph
/// convolution onto the class scores and a row-wise softmax:
///   F -> hidden[0] -> ... -> hidden[n-1] -> C
struct GcnModel {
  GcnConfig config;
  int input_dim = 0;
  std::vector<GraphConvLayer> layers;
  std::vector<AdamMoments> moments;
  uint64_t step = 0;

  GcnModel() = default;
  // Glorot-uniform weights from config.seed, zero biases.
  GcnModel(int input_dim, const GcnConfig& config);

  void check_finite() const;
};

struct Gradients {
  std::vector<Matrix> weight;
  std::vector<RowVector> bias;

  double max_abs() const;
};

/// Nodes whose loss terms count.
struct TrainMask {
  std::vector<uint8_t> active;
  size_t count = 0;

  static TrainMask from_border(const BorderMask& mask);
  // Border nodes whose ground truth is not void.
  static TrainMask from_border(const BorderMask& mask, const LabelMap& labels);
  static TrainMask all(size_t n);
};

/// Intermediate values of one forward pass, kept for backpropagation.
struct ForwardTrace {
  std::vector<Matrix> inputs;          // H_l, input of layer l (after dropout)
  std::vector<Matrix> preactivations;  // Z_l
  std::vector<Matrix> dropout_scale;   // per hidden layer; empty when inactive
  Matrix probs;
};

// The adjacency must be symmetric (renormalize() guarantees this); the
// backward pass uses it in place of its transpose.
ForwardTrace forward_trace(const GcnModel& model, const NormalizedAdjacency& adj,
                           const Matrix& x, bool training, Rng& rng);

// N x C class probabilities.
Matrix forward(const GcnModel& model, const NormalizedAdjacency& adj,
               const FeatureMatrix& x, bool training, Rng& rng);

// Mean cross-entropy over active nodes plus l2 * sum of squared weights.
double masked_loss(const Matrix& probs, const LabelMap& labels, const TrainMask& mask,
                   const GcnModel& model, double l2_coeff);

// Gradients of masked_loss for a recorded forward pass.
Gradients backward(const GcnModel& model, const NormalizedAdjacency& adj,
                   const ForwardTrace& trace, const LabelMap& labels,
                   const TrainMask& mask, double l2_coeff);

struct LossAndGradients {
  double loss = 0.0;
  Gradients gradients;
  Matrix probs;
};

// Training-mode forward pass (dropout drawn from rng) followed by backward.
LossAndGradients compute_gradients(const GcnModel& model, const NormalizedAdjacency& adj,
                                   const FeatureMatrix& x, const LabelMap& labels,
                                   const TrainMask& mask, Rng& rng);

// Bias-corrected Adam update of every parameter; increments model.step.
void adam_step(GcnModel& model, const Gradients& grads);

// Fraction of active nodes whose argmax equals the label.
double masked_accuracy(const Matrix& probs, const LabelMap& labels, const TrainMask& mask);

// Row argmax, ties to the lowest class index.
std::vector<int> argmax_rows(const Matrix& probs);

}  // namespace bseg
