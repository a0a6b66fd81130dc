// Dense brute-force reference used by the tests. Deliberately independent of
// Eigen's eigensolvers so it does not share code with the solver under test.
#pragma once

#include "lrrap/tt.hpp"

namespace lrrap {

struct DenseEigs {
  Vector values;   // ascending
  Matrix vectors;  // columns match values
};

struct OracleCaps {
  Index max_dim = 4096;
  double symmetry_tol = 1e-10;
};

// Householder tridiagonalization followed by implicit QL; returns the b
// smallest eigenpairs (all of them when b <= 0).
DenseEigs dense_eigs(const Matrix& A, Index b = 0, const OracleCaps& caps = {});

double mae(const Vector& computed, const Vector& reference);

// Orthogonal projector onto the span of the TT map's Jacobian at x.
Matrix dense_tangent_projector(const TTVector& x, Index cap = 256);

// Dimension of the fixed-rank manifold with ranks r (r_0 = r_d = 1).
Index tangent_dimension(const std::vector<Index>& dims, const std::vector<Index>& ranks);

}  // namespace lrrap
