// Reference implementations for the tests. None of this calls into the
// library's contraction code: dense tensors are expanded entry by entry,
// Hamiltonians are built from explicit Kronecker products and eigenvalues
// come from a cyclic Jacobi sweep.
#pragma once

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "lrrap/tt.hpp"

namespace support {

using lrrap::Index;
using lrrap::Matrix;
using lrrap::Vector;

inline Index prod(const std::vector<Index>& dims) {
  Index n = 1;
  for (Index d : dims) n *= d;
  return n;
}

// Mixed-radix digits of a linear index, first mode most significant.
inline std::vector<Index> digits(Index lin, const std::vector<Index>& dims) {
  std::vector<Index> idx(dims.size());
  for (int k = int(dims.size()) - 1; k >= 0; --k) {
    idx[k] = lin % dims[k];
    lin /= dims[k];
  }
  return idx;
}

// x(i_1..i_d) = G_1[i_1] ... G_d[i_d], one entry at a time.
inline Vector naive_dense(const lrrap::TTVector& x) {
  const auto dims = x.dims();
  Vector out(prod(dims));
  for (Index lin = 0; lin < out.size(); ++lin) {
    const auto idx = digits(lin, dims);
    Matrix row = Matrix::Ones(1, 1);
    for (int k = 0; k < x.order(); ++k) {
      const auto& g = x.core(k);
      Matrix s(g.left_rank(), g.right_rank());
      for (Index a = 0; a < g.left_rank(); ++a)
        for (Index c = 0; c < g.right_rank(); ++c) s(a, c) = g(a, idx[k], c);
      row = row * s;
    }
    out(lin) = row(0, 0);
  }
  return out;
}

inline Matrix naive_dense(const lrrap::TTOperator& H) {
  const auto dims = H.dims();
  const Index n = prod(dims);
  Matrix out(n, n);
  for (Index li = 0; li < n; ++li) {
    const auto ii = digits(li, dims);
    for (Index lj = 0; lj < n; ++lj) {
      const auto jj = digits(lj, dims);
      Matrix row = Matrix::Ones(1, 1);
      for (int k = 0; k < H.order(); ++k) {
        const auto& g = H.core(k);
        Matrix s(g.left_rank(), g.right_rank());
        for (Index a = 0; a < g.left_rank(); ++a)
          for (Index c = 0; c < g.right_rank(); ++c) s(a, c) = g(a, ii[k], jj[k], c);
        row = row * s;
      }
      out(li, lj) = row(0, 0);
    }
  }
  return out;
}

inline Matrix kron(const Matrix& a, const Matrix& b) {
  Matrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Index i = 0; i < a.rows(); ++i)
    for (Index j = 0; j < a.cols(); ++j) out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

// Operator acting as op on site k of a d-site chain of qubits.
inline Matrix site_op(const Matrix& op, int k, int d) {
  Matrix out = Matrix::Ones(1, 1);
  for (int s = 0; s < d; ++s) out = kron(out, s == k ? op : Matrix(Matrix::Identity(2, 2)));
  return out;
}

// Spin-1/2 Heisenberg chain in the usual basis. S^y S^y is real even though
// S^y is not: it equals -(J (x) J)/4 with J = [[0,-1],[1,0]].
inline Matrix heisenberg_dense(int d) {
  Matrix sx(2, 2), sz(2, 2), j(2, 2);
  sx << 0, 0.5, 0.5, 0;
  sz << 0.5, 0, 0, -0.5;
  j << 0, -1, 1, 0;
  const Index n = Index(1) << d;
  Matrix H = Matrix::Zero(n, n);
  for (int i = 0; i + 1 < d; ++i) {
    H += site_op(sx, i, d) * site_op(sx, i + 1, d);
    H += site_op(sz, i, d) * site_op(sz, i + 1, d);
    H -= 0.25 * site_op(j, i, d) * site_op(j, i + 1, d);
  }
  return H;
}

// Cyclic Jacobi rotations until the off-diagonal mass is negligible.
inline Vector jacobi_eigenvalues(Matrix a) {
  const Index n = a.rows();
  for (int sweep = 0; sweep < 100; ++sweep) {
    double off = 0.0;
    for (Index p = 0; p < n; ++p)
      for (Index q = p + 1; q < n; ++q) off += a(p, q) * a(p, q);
    if (off < 1e-30 * std::max(1.0, a.squaredNorm())) break;
    for (Index p = 0; p < n; ++p)
      for (Index q = p + 1; q < n; ++q) {
        if (std::abs(a(p, q)) < 1e-300) continue;
        const double theta = (a(q, q) - a(p, p)) / (2.0 * a(p, q));
        const double t = (theta >= 0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0), s = t * c;
        for (Index k = 0; k < n; ++k) {
          const double akp = a(k, p), akq = a(k, q);
          a(k, p) = c * akp - s * akq;
          a(k, q) = s * akp + c * akq;
        }
        for (Index k = 0; k < n; ++k) {
          const double apk = a(p, k), aqk = a(q, k);
          a(p, k) = c * apk - s * aqk;
          a(q, k) = s * apk + c * aqk;
        }
      }
  }
  Vector ev = a.diagonal();
  std::sort(ev.data(), ev.data() + n);
  return ev;
}

inline lrrap::TTVector random_tt(const std::vector<Index>& dims, const std::vector<Index>& ranks, std::mt19937_64& rng) {
  std::normal_distribution<double> nd;
  std::vector<lrrap::Core3> cores;
  for (size_t k = 0; k < dims.size(); ++k) {
    lrrap::Core3 g(ranks[k], dims[k], ranks[k + 1]);
    for (Index i = 0; i < g.size(); ++i) g.data()[i] = nd(rng);
    cores.push_back(std::move(g));
  }
  return lrrap::TTVector(std::move(cores));
}

inline lrrap::TTOperator random_op(const std::vector<Index>& dims, const std::vector<Index>& ranks, std::mt19937_64& rng) {
  std::normal_distribution<double> nd;
  std::vector<lrrap::Core4> cores;
  for (size_t k = 0; k < dims.size(); ++k) {
    lrrap::Core4 g(ranks[k], dims[k], ranks[k + 1]);
    for (Index i = 0; i < g.size(); ++i) g.data()[i] = nd(rng);
    cores.push_back(std::move(g));
  }
  return lrrap::TTOperator(std::move(cores));
}

// Ranks bounded by r and by the unfolding sizes on either side.
inline std::vector<Index> feasible_ranks(const std::vector<Index>& dims, Index r) {
  std::vector<Index> ranks(dims.size() + 1, 1);
  Index left = 1;
  for (size_t k = 1; k < dims.size(); ++k) {
    left *= dims[k - 1];
    Index right = 1;
    for (size_t j = k; j < dims.size(); ++j) right *= dims[j];
    ranks[k] = std::min({r, left, right});
  }
  return ranks;
}

// Rank of a matrix by singular values above tol * sigma_max.
inline Index numerical_rank(const Matrix& m, double tol = 1e-10) {
  Eigen::JacobiSVD<Matrix> svd(m);
  const auto& s = svd.singularValues();
  if (s.size() == 0 || s(0) == 0.0) return 0;
  Index k = 0;
  while (k < s.size() && s(k) > tol * s(0)) ++k;
  return k;
}

// Unfolding of a dense tensor after the first k modes.
inline Matrix unfolding(const Vector& v, const std::vector<Index>& dims, int k) {
  Index rows = 1;
  for (int j = 0; j < k; ++j) rows *= dims[j];
  Matrix m(rows, v.size() / rows);
  for (Index i = 0; i < rows; ++i)
    for (Index j = 0; j < m.cols(); ++j) m(i, j) = v(i * m.cols() + j);
  return m;
}

}  // namespace support
