#include "bseg/grid_graph.h"

#include <gtest/gtest.h>

#include <set>
#include <sstream>

#include "oracles.h"

namespace bseg {
namespace {

LabelMap left_column_map() {
  LabelMap m(3, 3, 2, 1);
  for (int r = 0; r < 3; ++r) m.at(r, 0) = 0;
  return m;
}

TEST(BorderMaskTest, UniformMapHasNoBorder) {
  const BorderMask mask = compute_border_mask(LabelMap(3, 3, 1, 0), 1);
  EXPECT_EQ(mask.count(), 0u);
  EXPECT_EQ(mask.height, 3);
  EXPECT_EQ(mask.width, 3);
}

TEST(BorderMaskTest, LeftColumnThicknessOne) {
  const BorderMask mask = compute_border_mask(left_column_map(), 1);
  for (int r = 0; r < 3; ++r) {
    EXPECT_TRUE(mask.at(r, 0));
    EXPECT_TRUE(mask.at(r, 1));
    EXPECT_FALSE(mask.at(r, 2));
  }
  EXPECT_EQ(mask.count(), 6u);
}

TEST(BorderMaskTest, LeftColumnThicknessTwoSelectsAll) {
  EXPECT_EQ(compute_border_mask(left_column_map(), 2).count(), 9u);
}

TEST(BorderMaskTest, RejectsZeroThicknessAndEmptyMaps) {
  EXPECT_THROW(compute_border_mask(left_column_map(), 0), ConfigError);
  EXPECT_THROW(compute_border_mask(LabelMap{}, 1), DataError);
}

TEST(BorderMaskTest, MatchesBruteForceOnRandomMaps) {
  Rng rng(17);
  for (int trial = 0; trial < 200; ++trial) {
    const int h = rng.range(1, 32), w = rng.range(1, 48);
    const LabelMap m = testing::random_label_map(h, w, rng.range(1, 5), rng);
    const int t = rng.range(1, 6);
    ASSERT_EQ(compute_border_mask(m, t).selected, testing::brute_force_mask(m, t))
        << "trial " << trial << " " << h << "x" << w << " t=" << t;
  }
}

TEST(BorderMaskTest, ThickerBorderIsSuperset) {
  Rng rng(3);
  for (int trial = 0; trial < 50; ++trial) {
    const LabelMap m = testing::random_label_map(20, 30, 4, rng);
    const BorderMask thin = compute_border_mask(m, 1);
    const BorderMask thick = compute_border_mask(m, 3);
    for (size_t i = 0; i < m.size(); ++i) {
      if (thin.selected[i]) ASSERT_TRUE(thick.selected[i]);
    }
  }
}

TEST(EdgeWeightTest, HandValues) {
  RgbFrame f(2, 2, 100.0);
  EXPECT_DOUBLE_EQ(edge_weight({0, 0}, {0, 1}, f), 1.0);
  EXPECT_NEAR(edge_weight({0, 0}, {1, 1}, f), 0.70711, 1e-5);
  EXPECT_NEAR(edge_weight({0, 0}, {1, 1}, f), 1.0 / std::sqrt(2.0), 1e-12);

  RgbFrame bw(1, 2, 0.0);
  bw.set(0, 1, 255, 255, 255);
  EXPECT_NEAR(edge_weight({0, 0}, {0, 1}, bw), std::exp(-1.0), 1e-12);
  EXPECT_NEAR(edge_weight({0, 0}, {0, 1}, bw), 0.36788, 1e-5);
}

TEST(EdgeWeightTest, RejectsIdenticalOrOutOfBoundsPixels) {
  RgbFrame f(2, 2);
  EXPECT_THROW(edge_weight({1, 1}, {1, 1}, f), DataError);
  EXPECT_THROW(edge_weight({0, 0}, {2, 0}, f), DataError);
}

TEST(EdgeWeightTest, BoundedOnRandomPairs) {
  Rng rng(5);
  const RgbFrame f = testing::random_frame(40, 40, rng);
  for (int i = 0; i < 10000; ++i) {
    Pixel a{rng.range(0, 39), rng.range(0, 39)};
    Pixel b{rng.range(0, 39), rng.range(0, 39)};
    if (a == b) continue;
    const double w = edge_weight(a, b, f);
    ASSERT_GT(w, 0.0);
    ASSERT_LE(w, 1.0);
    ASSERT_NEAR(w, testing::reference_weight(a.row, a.col, b.row, b.col, f), 1e-12);
  }
}

TEST(EdgeWeightTest, Monotonicity) {
  RgbFrame f(1, 10, 0.0);
  double prev = 2.0;
  for (int v = 0; v <= 255; v += 15) {
    f.set(0, 1, v, v / 2.0, 0);
    const double w = edge_weight({0, 0}, {0, 1}, f);
    EXPECT_LE(w, prev);
    prev = w;
  }
  RgbFrame flat(1, 10, 42.0);
  prev = 2.0;
  for (int c = 1; c < 10; ++c) {
    const double w = edge_weight({0, 0}, {0, c}, flat);
    EXPECT_LT(w, prev);
    prev = w;
  }
}

TEST(BuildGraphTest, EmptyMaskHasNoEdges) {
  BorderMask mask{4, 4, 1, std::vector<uint8_t>(16, 0)};
  const PixelGraph g = build_graph(mask, RgbFrame(4, 4, 255.0), 3);
  EXPECT_EQ(g.edges.nnz(), 0u);
  EXPECT_EQ(g.num_nodes(), 16u);
}

TEST(BuildGraphTest, SinglePixelFourAxisNeighbours) {
  BorderMask mask{4, 4, 1, std::vector<uint8_t>(16, 0)};
  mask.selected[1 * 4 + 1] = 1;
  const PixelGraph g = build_graph(mask, RgbFrame(4, 4, 255.0), 4);
  ASSERT_EQ(g.edges.nnz(), 4u);
  const uint64_t b = g.edges.offsets[5], e = g.edges.offsets[6];
  std::set<uint32_t> got(g.edges.indices.begin() + b, g.edges.indices.begin() + e);
  EXPECT_EQ(got, (std::set<uint32_t>{1, 4, 6, 9}));
  for (uint64_t i = b; i < e; ++i) EXPECT_DOUBLE_EQ(g.edges.values[i], 1.0);
}

TEST(BuildGraphTest, CornerPixelPrefersAxisNeighbours) {
  BorderMask mask{5, 5, 1, std::vector<uint8_t>(25, 0)};
  mask.selected[0] = 1;
  Rng rng(9);
  const RgbFrame f = testing::random_frame(5, 5, rng);
  const PixelGraph g = build_graph(mask, f, 2);
  ASSERT_EQ(g.edges.nnz(), 2u);
  EXPECT_EQ(g.edges.indices[0], 1u);  // (0,1)
  EXPECT_EQ(g.edges.indices[1], 5u);  // (1,0)
  EXPECT_DOUBLE_EQ(g.edges.values[0], testing::reference_weight(0, 0, 0, 1, f));
  EXPECT_DOUBLE_EQ(g.edges.values[1], testing::reference_weight(0, 0, 1, 0, f));
}

TEST(BuildGraphTest, RejectsBadArguments) {
  BorderMask mask{3, 3, 1, std::vector<uint8_t>(9, 1)};
  EXPECT_THROW(build_graph(mask, RgbFrame(3, 4), 2), DataError);
  EXPECT_THROW(build_graph(mask, RgbFrame(3, 3), 9), ConfigError);
  EXPECT_THROW(build_graph(mask, RgbFrame(3, 3), 0), ConfigError);
  EXPECT_NO_THROW(build_graph(mask, RgbFrame(3, 3), 8));
}

TEST(BuildGraphTest, MatchesExhaustiveKnn) {
  Rng rng(23);
  const int ks[] = {2, 4, 8, 16};
  for (int trial = 0; trial < 120; ++trial) {
    const int h = rng.range(1, 16), w = rng.range(1, 16);
    const int k = ks[rng.below(4)];
    if (k >= h * w) continue;
    BorderMask mask{h, w, 1, std::vector<uint8_t>(static_cast<size_t>(h) * w)};
    for (auto& s : mask.selected) s = rng.bernoulli(0.3);
    const RgbFrame f = testing::random_frame(h, w, rng);
    const PixelGraph g = build_graph(mask, f, k);
    for (int r = 0; r < h; ++r) {
      for (int c = 0; c < w; ++c) {
        const size_t node = static_cast<size_t>(r) * w + c;
        std::vector<uint32_t> got(g.edges.indices.begin() + g.edges.offsets[node],
                                  g.edges.indices.begin() + g.edges.offsets[node + 1]);
        if (!mask.selected[node]) {
          ASSERT_TRUE(got.empty());
          continue;
        }
        ASSERT_EQ(got, testing::brute_force_knn(r, c, h, w, k))
            << "trial " << trial << " node " << node;
        for (uint64_t e = g.edges.offsets[node]; e < g.edges.offsets[node + 1]; ++e) {
          const int j = static_cast<int>(g.edges.indices[e]);
          ASSERT_NE(static_cast<size_t>(j), node);
          ASSERT_GT(g.edges.values[e], 0.0);
          ASSERT_LE(g.edges.values[e], 1.0);
        }
      }
    }
  }
}

TEST(BuildGraphTest, DeterministicCsr) {
  Rng rng(31);
  const LabelMap m = testing::random_label_map(30, 40, 4, rng);
  const RgbFrame f = testing::random_frame(30, 40, rng);
  const BorderMask mask = compute_border_mask(m, 2);
  const PixelGraph a = build_graph(mask, f, 8);
  const PixelGraph b = build_graph(mask, f, 8);
  EXPECT_EQ(a.edges.offsets, b.edges.offsets);
  EXPECT_EQ(a.edges.indices, b.edges.indices);
  EXPECT_EQ(a.edges.values, b.edges.values);
}

TEST(RenormalizeTest, EmptyGraphIsIdentity) {
  PixelGraph g;
  g.edges.num_nodes = 5;
  g.edges.offsets.assign(6, 0);
  const Matrix d = renormalize(g).matrix.to_dense();
  EXPECT_TRUE(d.isIdentity(0.0));
}

TEST(RenormalizeTest, TwoNodesSingleEdge) {
  PixelGraph g;
  g.edges.num_nodes = 2;
  g.edges.offsets = {0, 1, 1};
  g.edges.indices = {1};
  g.edges.values = {1.0};
  const Matrix d = renormalize(g).matrix.to_dense();
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) EXPECT_NEAR(d(i, j), 0.5, 1e-9);
}

TEST(RenormalizeTest, MatchesDenseOracle) {
  Rng rng(41);
  for (int trial = 0; trial < 20; ++trial) {
    const int n = trial == 0 ? 20 : rng.range(1, 120);
    PixelGraph g;
    g.edges = testing::random_graph(n, rng.uniform(0.0, 0.3), rng);
    const NormalizedAdjacency a = renormalize(g);
    const Matrix got = a.matrix.to_dense();
    const Eigen::MatrixXd want = testing::dense_renormalized(g.edges);
    ASSERT_LE((got - want).cwiseAbs().maxCoeff(), 1e-9);
    ASSERT_LE((got - got.transpose()).cwiseAbs().maxCoeff(), 1e-9);
    ASSERT_GT(got.diagonal().minCoeff(), 0.0);
    ASSERT_GE(got.minCoeff(), 0.0);
  }
}

TEST(RenormalizeTest, IsolatedNodesKeepUnitDiagonal) {
  BorderMask mask{6, 6, 1, std::vector<uint8_t>(36, 0)};
  mask.selected[0] = 1;
  const NormalizedAdjacency a = renormalize(build_graph(mask, RgbFrame(6, 6, 10.0), 2));
  EXPECT_EQ(a.matrix.coeff(35, 35), 1.0);
  EXPECT_LT(a.matrix.coeff(0, 0), 1.0);
}

TEST(GraphFormatTest, Bgg1RoundTrip) {
  Rng rng(43);
  const LabelMap m = testing::random_label_map(12, 9, 3, rng);
  const PixelGraph g = build_graph(compute_border_mask(m, 1), testing::random_frame(12, 9, rng), 4);
  std::stringstream buf;
  write_graph(buf, g);
  const std::string bytes = buf.str();
  ASSERT_EQ(bytes.substr(0, 4), "BGG1");
  EXPECT_EQ(bytes.size(), 4 + 12 + 8 * (g.num_nodes() + 1) + 8 * g.edges.nnz());
  // num_nodes little-endian
  EXPECT_EQ(static_cast<unsigned char>(bytes[4]), 108u);

  const PixelGraph back = read_graph(buf);
  EXPECT_EQ(back.num_nodes(), g.num_nodes());
  EXPECT_EQ(back.k, 4u);
  EXPECT_EQ(back.edges.offsets, g.edges.offsets);
  EXPECT_EQ(back.edges.indices, g.edges.indices);
  for (size_t i = 0; i < g.edges.nnz(); ++i) {
    EXPECT_EQ(back.edges.values[i], static_cast<double>(static_cast<float>(g.edges.values[i])));
  }
}

TEST(GraphFormatTest, RejectsBadMagic) {
  std::stringstream buf("BGGX....");
  EXPECT_THROW(read_graph(buf), DataError);
}

}  // namespace
}  // namespace bseg
