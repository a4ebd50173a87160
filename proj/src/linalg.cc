#include "bseg/linalg.h"

#include <cassert>

namespace bseg {

double CsrMatrix::coeff(uint32_t i, uint32_t j) const {
  for (uint64_t e = offsets[i]; e < offsets[i + 1]; ++e) {
    if (indices[e] == j) return values[e];
  }
  return 0.0;
}

Matrix CsrMatrix::to_dense() const {
  Matrix d = Matrix::Zero(num_nodes, num_nodes);
  for (uint32_t i = 0; i < num_nodes; ++i) {
    for (uint64_t e = offsets[i]; e < offsets[i + 1]; ++e) {
      d(i, indices[e]) += values[e];
    }
  }
  return d;
}

Matrix multiply(const CsrMatrix& a, const Matrix& h) {
  assert(h.rows() == static_cast<Eigen::Index>(a.num_nodes));
  const Eigen::Index cols = h.cols();
  Matrix out = Matrix::Zero(h.rows(), cols);
  for (uint32_t i = 0; i < a.num_nodes; ++i) {
    double* dst = out.data() + static_cast<Eigen::Index>(i) * cols;
    for (uint64_t e = a.offsets[i]; e < a.offsets[i + 1]; ++e) {
      const double w = a.values[e];
      const double* src = h.data() + static_cast<Eigen::Index>(a.indices[e]) * cols;
      for (Eigen::Index c = 0; c < cols; ++c) dst[c] += w * src[c];
    }
  }
  return out;
}

}  // namespace bseg
