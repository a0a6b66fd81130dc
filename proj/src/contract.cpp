#include "contract.hpp"

#include <limits>

namespace lrrap::detail {

RowMatrix op_left_layout(const Core4& h) {
  const Index R = h.left_rank(), n = h.mode_size(), Rr = h.right_rank();
  RowMatrix out(R * n, n * Rr);
  for (Index b = 0; b < R; ++b)
    for (Index i = 0; i < n; ++i)
      for (Index j = 0; j < n; ++j)
        for (Index c = 0; c < Rr; ++c) out(b * n + j, i * Rr + c) = h(b, i, j, c);
  return out;
}

RowMatrix op_right_layout(const Core4& h) {
  const Index R = h.left_rank(), n = h.mode_size(), Rr = h.right_rank();
  RowMatrix out(n * Rr, R * n);
  for (Index b = 0; b < R; ++b)
    for (Index i = 0; i < n; ++i)
      for (Index j = 0; j < n; ++j)
        for (Index c = 0; c < Rr; ++c) out(j * Rr + c, b * n + i) = h(b, i, j, c);
  return out;
}

RowMatrix env3_left_partial(const RowMatrix& L, const RowMatrix& h_left, const Core3& y,
                            Index rx, Index R) {
  const Index n = y.mode_size(), ry2 = y.right_rank();
  const Index R2 = h_left.cols() / n;
  // [a][b][j][c']
  RowMatrix t1 = L * y.right_unfolding();
  RowMatrix t2(rx * n, R2 * ry2);
  for (Index a = 0; a < rx; ++a) {
    ConstRowMap blk(t1.data() + a * R * n * ry2, R * n, ry2);
    RowMap out(t2.data() + a * n * R2 * ry2, n * R2, ry2);
    out.noalias() = h_left.transpose() * blk;
  }
  return t2;
}

RowMatrix env3_left_step(const RowMatrix& L, const Core3& x, const RowMatrix& h_left,
                         const Core3& y, Index R) {
  const Index rx = x.left_rank(), rx2 = x.right_rank(), n = x.mode_size();
  const Index R2 = h_left.cols() / n, ry2 = y.right_rank();
  RowMatrix t2 = env3_left_partial(L, h_left, y, rx, R);
  RowMatrix out(rx2 * R2, ry2);
  RowMap(out.data(), rx2, R2 * ry2).noalias() = x.left_unfolding().transpose() * t2;
  return out;
}

RowMatrix env3_right_step(const RowMatrix& Rt, const Core3& x, const RowMatrix& h_right,
                          const Core3& y, Index Rright) {
  const Index ry = y.left_rank(), ry2 = y.right_rank(), n = y.mode_size();
  const Index rx = x.left_rank(), rx2 = x.right_rank();
  const Index R = h_right.cols() / n;
  // [c][j][b'][a']
  RowMatrix t1 = y.left_unfolding() * ConstRowMap(Rt.data(), ry2, Rright * rx2);
  RowMatrix t2(ry * R, n * rx2);
  for (Index c = 0; c < ry; ++c) {
    ConstRowMap blk(t1.data() + c * n * Rright * rx2, n * Rright, rx2);
    RowMap out(t2.data() + c * R * n * rx2, R * n, rx2);
    out.noalias() = h_right.transpose() * blk;
  }
  RowMatrix res(ry * R, rx);
  res.noalias() = t2 * x.right_unfolding().transpose();
  return res;
}

RowMatrix env2_left_step(const RowMatrix& L, const Core3& x, const Core3& z) {
  const Index n = z.mode_size();
  RowMatrix t = L * z.right_unfolding();
  ConstRowMap tl(t.data(), L.rows() * n, z.right_rank());
  RowMatrix out = x.left_unfolding().transpose() * tl;
  return out;
}

RowMatrix env2_right_step(const RowMatrix& R, const Core3& x, const Core3& z) {
  const Index n = z.mode_size();
  RowMatrix t = z.left_unfolding() * R;
  ConstRowMap tr(t.data(), z.left_rank(), n * R.cols());
  RowMatrix out = tr * x.right_unfolding().transpose();
  return out;
}

void thin_qr(const RowMatrix& m, RowMatrix& q, RowMatrix& r) {
  const Index rows = m.rows(), cols = m.cols(), k = std::min(rows, cols);
  Eigen::HouseholderQR<Matrix> qr(m);
  q = qr.householderQ() * Matrix::Identity(rows, k);
  r = qr.matrixQR().topRows(k).triangularView<Eigen::Upper>();
  // Fix signs so that diag(R) >= 0; keeps the factorization unique.
  for (Index i = 0; i < k; ++i) {
    if (r(i, i) < 0) {
      r.row(i) *= -1.0;
      q.col(i) *= -1.0;
    }
  }
}

Svd thin_svd(const Matrix& m) {
  {
    Eigen::BDCSVD<Matrix> svd(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
    Svd out{svd.matrixU(), svd.singularValues(), svd.matrixV()};
    const double err = (m - out.u * out.s.asDiagonal() * out.v.transpose()).norm();
    if (err <= 1e-12 * std::max(m.norm(), std::numeric_limits<double>::min())) return out;
  }
  Eigen::JacobiSVD<Matrix> svd(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
  return {svd.matrixU(), svd.singularValues(), svd.matrixV()};
}

}  // namespace lrrap::detail
