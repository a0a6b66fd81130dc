// Internal contraction kernels shared by tt.cpp and tangent.cpp.
//
// Three-leg environments carry (x-rank, op-rank, y-rank) legs. Left ones are
// stored as (r_x R) x r_y row-major buffers laid out [a][beta][c], right ones
// as (r_y R) x r_x buffers laid out [c][beta][a]. With these layouts every
// step is a short chain of GEMMs without transposing the big intermediates.
#pragma once

#include "lrrap/tt.hpp"

namespace lrrap::detail {

// H(b, i, j, b') rearranged to [b][j][i][b'] as (R n) x (n R').
RowMatrix op_left_layout(const Core4& h);
// H(b, i, j, b') rearranged to [j][b'][b][i] as (n R') x (R n).
RowMatrix op_right_layout(const Core4& h);

// Contract L with Y_k and H_k; result laid out [a][i][b'][c'] as
// (r_x n) x (R' r_y').
RowMatrix env3_left_partial(const RowMatrix& L, const RowMatrix& h_left, const Core3& y,
                            Index rx, Index R);

RowMatrix env3_left_step(const RowMatrix& L, const Core3& x, const RowMatrix& h_left,
                         const Core3& y, Index R);

RowMatrix env3_right_step(const RowMatrix& Rt, const Core3& x, const RowMatrix& h_right,
                          const Core3& y, Index Rright);

// Two-leg environments for plain projections: left (r_x x r_z), right (r_z x r_x).
RowMatrix env2_left_step(const RowMatrix& L, const Core3& x, const Core3& z);
RowMatrix env2_right_step(const RowMatrix& R, const Core3& x, const Core3& z);

// Thin QR of a tall-or-wide matrix: m = Q R with Q having min(rows, cols)
// orthonormal columns.
void thin_qr(const RowMatrix& m, RowMatrix& q, RowMatrix& r);

struct Svd {
  Matrix u;
  Vector s;
  Matrix v;
};
// Thin SVD. Divide and conquer first; Eigen 3.4's BDCSVD occasionally returns
// singular vectors that do not reproduce m (seen on rank-deficient 16x16
// unfoldings), so the reconstruction is checked and Jacobi is used instead.
Svd thin_svd(const Matrix& m);

}  // namespace lrrap::detail
