#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Core>

namespace bseg {

// Row-major so that one node's feature vector is contiguous.
using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;
using RowVector = Eigen::RowVectorXd;

/// Compressed sparse rows over a square node set. Row i lists the nodes that
/// node i aggregates from.
struct CsrMatrix {
  uint32_t num_nodes = 0;
  std::vector<uint64_t> offsets{0};  // num_nodes + 1 entries
  std::vector<uint32_t> indices;
  std::vector<double> values;

  size_t nnz() const { return indices.size(); }

  // Entry (i, j), or 0 when not stored. Linear scan of row i.
  double coeff(uint32_t i, uint32_t j) const;

  Matrix to_dense() const;
};

// out = a * h. Each row of the result is accumulated in stored column order,
// so the result does not depend on scheduling.
Matrix multiply(const CsrMatrix& a, const Matrix& h);

}  // namespace bseg
