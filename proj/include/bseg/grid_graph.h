#pragma once

#include <cmath>
#include <cstdint>
#include <iosfwd>
#include <string>

#include "bseg/image.h"
#include "bseg/linalg.h"

namespace bseg {

/// ‖I_255‖, the norm of the all-white RGB vector, normalizes intensity
/// differences in the edge weight.
struct EdgeWeightParams {
  double max_intensity_norm = 255.0 * std::sqrt(3.0);
};

/// Directed k-nearest-neighbour graph over all H x W pixels. Row i of `edges`
/// holds the in-edges of node i; only border nodes have any.
struct PixelGraph {
  int height = 0;
  int width = 0;
  uint32_t k = 0;
  CsrMatrix edges;

  uint32_t num_nodes() const { return edges.num_nodes; }
};

/// D^-1/2 (A_sym + I) D^-1/2 over the max-symmetrized graph.
struct NormalizedAdjacency {
  CsrMatrix matrix;

  uint32_t num_nodes() const { return matrix.num_nodes; }
};

// A pixel is selected iff some pixel within Chebyshev distance `thickness`
// carries a different label. Pixels outside the frame are ignored.
BorderMask compute_border_mask(const LabelMap& pred, int thickness);

// (1 / |p1 - p2|) * exp(-|I(p1) - I(p2)| / |I_255|)
double edge_weight(Pixel p1, Pixel p2, const RgbFrame& frame,
                   const EdgeWeightParams& params = {});

// Each selected node receives in-edges from its k nearest pixels (Euclidean
// grid distance, ties by ascending row-major index). Candidates are all
// pixels, border or not.
PixelGraph build_graph(const BorderMask& mask, const RgbFrame& frame, int k,
                       const EdgeWeightParams& params = {});

NormalizedAdjacency renormalize(const PixelGraph& graph);

// BGG1 binary dump. Weights are stored as f32.
void write_graph(std::ostream& out, const PixelGraph& graph);
void write_graph(const std::string& path, const PixelGraph& graph);
PixelGraph read_graph(std::istream& in);
PixelGraph read_graph(const std::string& path);

}  // namespace bseg
