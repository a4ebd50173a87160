#pragma once

// Independent reference computations for the tests. Nothing here calls into
// the code paths it is used to check.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <tuple>
#include <vector>

#include "bseg/gcn.h"
#include "bseg/grid_graph.h"
#include "bseg/image.h"
#include "bseg/linalg.h"
#include "bseg/random.h"

namespace bseg::testing {

// Pixel selected iff a differing label exists within Chebyshev distance t.
inline std::vector<uint8_t> brute_force_mask(const LabelMap& m, int t) {
  std::vector<uint8_t> out(m.size(), 0);
  for (int r = 0; r < m.height; ++r) {
    for (int c = 0; c < m.width; ++c) {
      for (int dr = -t; dr <= t; ++dr) {
        for (int dc = -t; dc <= t; ++dc) {
          const int rr = r + dr, cc = c + dc;
          if (rr < 0 || cc < 0 || rr >= m.height || cc >= m.width) continue;
          if (m.at(rr, cc) != m.at(r, c)) out[static_cast<size_t>(r) * m.width + c] = 1;
        }
      }
    }
  }
  return out;
}

// k nearest pixels of (row, col) by sorting every other pixel on
// (squared distance, row-major index).
inline std::vector<uint32_t> brute_force_knn(int row, int col, int height, int width, int k) {
  std::vector<std::pair<long, uint32_t>> all;
  for (int r = 0; r < height; ++r) {
    for (int c = 0; c < width; ++c) {
      if (r == row && c == col) continue;
      const long d2 = static_cast<long>(r - row) * (r - row) + static_cast<long>(c - col) * (c - col);
      all.emplace_back(d2, static_cast<uint32_t>(r * width + c));
    }
  }
  std::sort(all.begin(), all.end());
  std::vector<uint32_t> out;
  for (int i = 0; i < k && i < static_cast<int>(all.size()); ++i) out.push_back(all[i].second);
  return out;
}

// Edge weight evaluated directly from its definition.
inline double reference_weight(int r1, int c1, int r2, int c2, const RgbFrame& f) {
  const size_t i = static_cast<size_t>(r1) * f.width + c1;
  const size_t j = static_cast<size_t>(r2) * f.width + c2;
  const double diff = std::sqrt(std::pow(f.r[i] - f.r[j], 2) + std::pow(f.g[i] - f.g[j], 2) +
                                std::pow(f.b[i] - f.b[j], 2));
  const double dist = std::hypot(r1 - r2, c1 - c2);
  return (1.0 / dist) * std::exp(-diff / (255.0 * std::sqrt(3.0)));
}

// D^-1/2 (max(A, A^T) + I) D^-1/2 with dense matrices.
inline Eigen::MatrixXd dense_renormalized(const CsrMatrix& a) {
  const int n = static_cast<int>(a.num_nodes);
  Eigen::MatrixXd dense = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    for (uint64_t e = a.offsets[i]; e < a.offsets[i + 1]; ++e) dense(i, a.indices[e]) = a.values[e];
  }
  Eigen::MatrixXd sym = dense.cwiseMax(dense.transpose());
  sym += Eigen::MatrixXd::Identity(n, n);
  const Eigen::VectorXd d = sym.rowwise().sum();
  const Eigen::VectorXd inv = d.array().rsqrt();
  return inv.asDiagonal() * sym * inv.asDiagonal();
}

// Random directed graph with weights in (0, 1], no self edges.
inline CsrMatrix random_graph(int n, double density, Rng& rng) {
  CsrMatrix g;
  g.num_nodes = static_cast<uint32_t>(n);
  g.offsets.assign(static_cast<size_t>(n) + 1, 0);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      if (i != j && rng.bernoulli(density)) {
        g.indices.push_back(static_cast<uint32_t>(j));
        g.values.push_back(1.0 - rng.uniform());
      }
    }
    g.offsets[i + 1] = g.indices.size();
  }
  return g;
}

// Label map made of random rectangular patches so that borders are sparse
// enough to be interesting.
inline LabelMap random_label_map(int h, int w, int classes, Rng& rng) {
  LabelMap m(h, w, classes, rng.range(0, classes - 1));
  const int patches = rng.range(0, 6);
  for (int p = 0; p < patches; ++p) {
    const int r0 = rng.range(0, h - 1), c0 = rng.range(0, w - 1);
    const int r1 = rng.range(r0, h - 1), c1 = rng.range(c0, w - 1);
    const int cls = rng.range(0, classes - 1);
    for (int r = r0; r <= r1; ++r)
      for (int c = c0; c <= c1; ++c) m.at(r, c) = cls;
  }
  // A sprinkle of isolated pixels.
  const int specks = rng.range(0, 4);
  for (int s = 0; s < specks; ++s) m.at(rng.range(0, h - 1), rng.range(0, w - 1)) = rng.range(0, classes - 1);
  return m;
}

inline RgbFrame random_frame(int h, int w, Rng& rng) {
  RgbFrame f(h, w);
  for (size_t i = 0; i < f.size(); ++i) {
    f.r[i] = std::floor(rng.uniform(0, 256));
    f.g[i] = std::floor(rng.uniform(0, 256));
    f.b[i] = std::floor(rng.uniform(0, 256));
  }
  return f;
}

// Central differences of `loss` with respect to every model parameter.
inline Gradients finite_difference_gradients(GcnModel model,
                                             const std::function<double(const GcnModel&)>& loss,
                                             double h) {
  Gradients g;
  for (size_t l = 0; l < model.layers.size(); ++l) {
    Matrix& w = model.layers[l].weight;
    Matrix gw(w.rows(), w.cols());
    for (Eigen::Index i = 0; i < w.size(); ++i) {
      const double saved = w.data()[i];
      w.data()[i] = saved + h;
      const double up = loss(model);
      w.data()[i] = saved - h;
      const double down = loss(model);
      w.data()[i] = saved;
      gw.data()[i] = (up - down) / (2 * h);
    }
    RowVector& b = model.layers[l].bias;
    RowVector gb(b.size());
    for (Eigen::Index i = 0; i < b.size(); ++i) {
      const double saved = b[i];
      b[i] = saved + h;
      const double up = loss(model);
      b[i] = saved - h;
      const double down = loss(model);
      b[i] = saved;
      gb[i] = (up - down) / (2 * h);
    }
    g.weight.push_back(std::move(gw));
    g.bias.push_back(std::move(gb));
  }
  return g;
}

// |a - n| / max(|a|, |n|), treating pairs below `floor` in magnitude as
// exact (both sides are then indistinguishable from zero).
inline double relative_error(double analytic, double numeric, double floor = 1e-7) {
  const double scale = std::max(std::abs(analytic), std::abs(numeric));
  if (scale < floor) return 0.0;
  return std::abs(analytic - numeric) / scale;
}

inline double max_relative_error(const Gradients& a, const Gradients& n) {
  double worst = 0.0;
  for (size_t l = 0; l < a.weight.size(); ++l) {
    for (Eigen::Index i = 0; i < a.weight[l].size(); ++i) {
      worst = std::max(worst, relative_error(a.weight[l].data()[i], n.weight[l].data()[i]));
    }
    for (Eigen::Index i = 0; i < a.bias[l].size(); ++i) {
      worst = std::max(worst, relative_error(a.bias[l][i], n.bias[l][i]));
    }
  }
  return worst;
}

}  // namespace bseg::testing
