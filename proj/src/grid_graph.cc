#include "bseg/grid_graph.h"

#include <algorithm>
#include <fstream>
#include <limits>
#include <numbers>
#include <tuple>

#include "bseg/binary_io.h"

namespace bseg {
namespace {

struct Offset {
  int64_t dist2;
  int dy;
  int dx;
};

// All non-zero offsets with dy^2 + dx^2 <= radius^2, ordered by squared
// distance and then by (dy, dx). For a fixed centre pixel the (dy, dx) order
// equals row-major index order, which is the documented tie-break.
std::vector<Offset> sorted_offsets(int radius) {
  std::vector<Offset> out;
  const int64_t r2 = static_cast<int64_t>(radius) * radius;
  for (int dy = -radius; dy <= radius; ++dy) {
    for (int dx = -radius; dx <= radius; ++dx) {
      const int64_t d2 = static_cast<int64_t>(dy) * dy + static_cast<int64_t>(dx) * dx;
      if (d2 == 0 || d2 > r2) continue;
      out.push_back({d2, dy, dx});
    }
  }
  std::sort(out.begin(), out.end(), [](const Offset& a, const Offset& b) {
    return std::tie(a.dist2, a.dy, a.dx) < std::tie(b.dist2, b.dy, b.dx);
  });
  return out;
}

// Exhaustive fallback for pixels whose in-bounds disk is too small (thin
// frames, corners with large k).
void exhaustive_neighbors(int row, int col, int height, int width, int k,
                          std::vector<uint32_t>& out) {
  std::vector<std::pair<int64_t, uint32_t>> cand;
  cand.reserve(static_cast<size_t>(height) * width);
  for (int r = 0; r < height; ++r) {
    for (int c = 0; c < width; ++c) {
      if (r == row && c == col) continue;
      const int64_t dy = r - row, dx = c - col;
      cand.emplace_back(dy * dy + dx * dx, static_cast<uint32_t>(r * width + c));
    }
  }
  std::partial_sort(cand.begin(), cand.begin() + k, cand.end());
  out.clear();
  for (int i = 0; i < k; ++i) out.push_back(cand[i].second);
}

}  // namespace

BorderMask compute_border_mask(const LabelMap& pred, int thickness) {
  if (thickness < 1) throw ConfigError("border thickness must be >= 1");
  if (pred.height <= 0 || pred.width <= 0 || pred.labels.empty()) {
    throw DataError("cannot compute a border mask of an empty label map");
  }
  if (pred.labels.size() != static_cast<size_t>(pred.height) * pred.width) {
    throw DataError("label map size does not match height x width");
  }
  const int h = pred.height, w = pred.width, t = thickness;

  // Separable sliding min / max over the clipped (2t+1)^2 window. A pixel has
  // a differing label in its window iff the window min or max differs from it.
  std::vector<int> row_min(pred.size()), row_max(pred.size());
  for (int r = 0; r < h; ++r) {
    for (int c = 0; c < w; ++c) {
      int lo = std::numeric_limits<int>::max(), hi = std::numeric_limits<int>::min();
      for (int cc = std::max(0, c - t); cc <= std::min(w - 1, c + t); ++cc) {
        lo = std::min(lo, pred.at(r, cc));
        hi = std::max(hi, pred.at(r, cc));
      }
      row_min[static_cast<size_t>(r) * w + c] = lo;
      row_max[static_cast<size_t>(r) * w + c] = hi;
    }
  }

  BorderMask mask;
  mask.height = h;
  mask.width = w;
  mask.thickness = t;
  mask.selected.assign(pred.size(), 0);
  for (int r = 0; r < h; ++r) {
    for (int c = 0; c < w; ++c) {
      int lo = std::numeric_limits<int>::max(), hi = std::numeric_limits<int>::min();
      for (int rr = std::max(0, r - t); rr <= std::min(h - 1, r + t); ++rr) {
        lo = std::min(lo, row_min[static_cast<size_t>(rr) * w + c]);
        hi = std::max(hi, row_max[static_cast<size_t>(rr) * w + c]);
      }
      const int own = pred.at(r, c);
      mask.selected[static_cast<size_t>(r) * w + c] = (lo != own || hi != own) ? 1 : 0;
    }
  }
  return mask;
}

double edge_weight(Pixel p1, Pixel p2, const RgbFrame& frame,
                   const EdgeWeightParams& params) {
  if (p1 == p2) throw DataError("edge weight needs two distinct pixels");
  auto in_bounds = [&](Pixel p) {
    return p.row >= 0 && p.col >= 0 && p.row < frame.height && p.col < frame.width;
  };
  if (!in_bounds(p1) || !in_bounds(p2)) throw DataError("pixel outside frame");
  if (!(params.max_intensity_norm > 0.0)) {
    throw ConfigError("max intensity norm must be positive");
  }

  const size_t i = static_cast<size_t>(p1.row) * frame.width + p1.col;
  const size_t j = static_cast<size_t>(p2.row) * frame.width + p2.col;
  const double dr = frame.r[i] - frame.r[j];
  const double dg = frame.g[i] - frame.g[j];
  const double db = frame.b[i] - frame.b[j];
  const double intensity = std::sqrt(dr * dr + dg * dg + db * db);

  const double dy = p1.row - p2.row;
  const double dx = p1.col - p2.col;
  const double distance = std::sqrt(dy * dy + dx * dx);
  return std::exp(-intensity / params.max_intensity_norm) / distance;
}

PixelGraph build_graph(const BorderMask& mask, const RgbFrame& frame, int k,
                       const EdgeWeightParams& params) {
  if (k < 1) throw ConfigError("k must be >= 1");
  if (mask.height != frame.height || mask.width != frame.width ||
      mask.selected.size() != frame.size()) {
    throw DataError("mask and frame dimensions differ");
  }
  const int h = frame.height, w = frame.width;
  const uint64_t n = static_cast<uint64_t>(h) * w;
  if (n > std::numeric_limits<uint32_t>::max()) throw DataError("frame too large");
  if (static_cast<uint64_t>(k) >= n) {
    throw ConfigError("k must be smaller than the number of pixels");
  }

  // A quarter disk of this radius holds more than k pixels, so corner pixels
  // of a large enough frame never need the fallback.
  const int radius = std::min(
      std::max(h, w),
      static_cast<int>(std::ceil(std::sqrt(4.0 * (k + 1) / std::numbers::pi))) + 1);
  const std::vector<Offset> offsets = sorted_offsets(radius);

  PixelGraph g;
  g.height = h;
  g.width = w;
  g.k = static_cast<uint32_t>(k);
  g.edges.num_nodes = static_cast<uint32_t>(n);
  g.edges.offsets.assign(n + 1, 0);

  std::vector<uint32_t> nbrs;
  nbrs.reserve(k);
  for (int r = 0; r < h; ++r) {
    for (int c = 0; c < w; ++c) {
      const size_t node = static_cast<size_t>(r) * w + c;
      if (mask.selected[node]) {
        nbrs.clear();
        for (const Offset& o : offsets) {
          const int rr = r + o.dy, cc = c + o.dx;
          if (rr < 0 || cc < 0 || rr >= h || cc >= w) continue;
          nbrs.push_back(static_cast<uint32_t>(rr * w + cc));
          if (nbrs.size() == static_cast<size_t>(k)) break;
        }
        if (nbrs.size() < static_cast<size_t>(k)) exhaustive_neighbors(r, c, h, w, k, nbrs);
        for (uint32_t j : nbrs) {
          g.edges.indices.push_back(j);
          g.edges.values.push_back(edge_weight(
              {r, c}, {static_cast<int>(j) / w, static_cast<int>(j) % w}, frame, params));
        }
      }
      g.edges.offsets[node + 1] = g.edges.indices.size();
    }
  }
  return g;
}

NormalizedAdjacency renormalize(const PixelGraph& graph) {
  const CsrMatrix& a = graph.edges;
  const uint32_t n = a.num_nodes;
  if (a.offsets.size() != static_cast<size_t>(n) + 1 ||
      a.indices.size() != a.values.size() || a.offsets.back() != a.indices.size()) {
    throw DataError("malformed graph storage");
  }

  struct Entry {
    uint32_t row, col;
    double w;
  };
  std::vector<Entry> entries;
  entries.reserve(2 * a.nnz() + n);
  for (uint32_t i = 0; i < n; ++i) {
    for (uint64_t e = a.offsets[i]; e < a.offsets[i + 1]; ++e) {
      const uint32_t j = a.indices[e];
      if (j >= n || j == i) throw DataError("malformed graph edge");
      entries.push_back({i, j, a.values[e]});
      entries.push_back({j, i, a.values[e]});
    }
  }
  std::sort(entries.begin(), entries.end(), [](const Entry& x, const Entry& y) {
    return std::tie(x.row, x.col) < std::tie(y.row, y.col);
  });

  // Merge duplicates with max(), which yields A_sym.
  std::vector<Entry> sym;
  sym.reserve(entries.size());
  for (const Entry& e : entries) {
    if (!sym.empty() && sym.back().row == e.row && sym.back().col == e.col) {
      sym.back().w = std::max(sym.back().w, e.w);
    } else {
      sym.push_back(e);
    }
  }

  std::vector<double> degree(n, 1.0);
  for (const Entry& e : sym) degree[e.row] += e.w;
  std::vector<double> inv_sqrt(n);
  for (uint32_t i = 0; i < n; ++i) inv_sqrt[i] = 1.0 / std::sqrt(degree[i]);

  NormalizedAdjacency out;
  CsrMatrix& m = out.matrix;
  m.num_nodes = n;
  m.offsets.assign(static_cast<size_t>(n) + 1, 0);
  m.indices.reserve(sym.size() + n);
  m.values.reserve(sym.size() + n);
  size_t pos = 0;
  for (uint32_t i = 0; i < n; ++i) {
    bool diag_done = false;
    auto put_diag = [&] {
      m.indices.push_back(i);
      m.values.push_back(1.0 / degree[i]);
      diag_done = true;
    };
    for (; pos < sym.size() && sym[pos].row == i; ++pos) {
      if (!diag_done && sym[pos].col > i) put_diag();
      m.indices.push_back(sym[pos].col);
      m.values.push_back(sym[pos].w * inv_sqrt[i] * inv_sqrt[sym[pos].col]);
    }
    if (!diag_done) put_diag();
    m.offsets[i + 1] = m.indices.size();
  }
  return out;
}

void write_graph(std::ostream& out, const PixelGraph& graph) {
  const CsrMatrix& e = graph.edges;
  if (e.nnz() > std::numeric_limits<uint32_t>::max()) {
    throw DataError("graph has too many edges for BGG1");
  }
  binio::put_magic(out, "BGG1");
  binio::put_uint<uint32_t>(out, e.num_nodes);
  binio::put_uint<uint32_t>(out, graph.k);
  binio::put_uint<uint32_t>(out, static_cast<uint32_t>(e.nnz()));
  for (uint64_t off : e.offsets) binio::put_uint<uint64_t>(out, off);
  for (uint32_t j : e.indices) binio::put_uint<uint32_t>(out, j);
  for (double v : e.values) binio::put_f32(out, static_cast<float>(v));
  if (!out) throw DataError("failed writing graph");
}

void write_graph(const std::string& path, const PixelGraph& graph) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot open '" + path + "' for writing");
  write_graph(out, graph);
}

PixelGraph read_graph(std::istream& in) {
  binio::expect_magic(in, "BGG1");
  PixelGraph g;
  g.edges.num_nodes = binio::get_uint<uint32_t>(in);
  g.k = binio::get_uint<uint32_t>(in);
  const uint32_t nnz = binio::get_uint<uint32_t>(in);
  // Grid dimensions are not part of the format.
  g.height = 0;
  g.width = 0;
  g.edges.offsets.resize(static_cast<size_t>(g.edges.num_nodes) + 1);
  for (auto& off : g.edges.offsets) off = binio::get_uint<uint64_t>(in);
  g.edges.indices.resize(nnz);
  for (auto& j : g.edges.indices) j = binio::get_uint<uint32_t>(in);
  g.edges.values.resize(nnz);
  for (auto& v : g.edges.values) v = binio::get_f32(in);
  if (g.edges.offsets.front() != 0 || g.edges.offsets.back() != nnz ||
      !std::is_sorted(g.edges.offsets.begin(), g.edges.offsets.end())) {
    throw DataError("inconsistent BGG1 offsets");
  }
  return g;
}

PixelGraph read_graph(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open '" + path + "'");
  return read_graph(in);
}

}  // namespace bseg
