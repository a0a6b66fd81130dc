#include "lrrap/oracle.hpp"

#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

namespace lrrap {

namespace {

// Householder reduction to tridiagonal form; V accumulates the transform.
void tridiagonalize(Matrix& V, std::vector<double>& d, std::vector<double>& e) {
  const Index n = V.rows();
  for (Index j = 0; j < n; ++j) d[j] = V(n - 1, j);
  for (Index i = n - 1; i > 0; --i) {
    double scale = 0.0, h = 0.0;
    for (Index k = 0; k < i; ++k) scale += std::abs(d[k]);
    if (scale == 0.0) {
      e[i] = d[i - 1];
      for (Index j = 0; j < i; ++j) {
        d[j] = V(i - 1, j);
        V(i, j) = 0.0;
        V(j, i) = 0.0;
      }
    } else {
      for (Index k = 0; k < i; ++k) {
        d[k] /= scale;
        h += d[k] * d[k];
      }
      double f = d[i - 1];
      double g = std::sqrt(h);
      if (f > 0) g = -g;
      e[i] = scale * g;
      h -= f * g;
      d[i - 1] = f - g;
      for (Index j = 0; j < i; ++j) e[j] = 0.0;
      for (Index j = 0; j < i; ++j) {
        f = d[j];
        V(j, i) = f;
        g = e[j] + V(j, j) * f;
        for (Index k = j + 1; k <= i - 1; ++k) {
          g += V(k, j) * d[k];
          e[k] += V(k, j) * f;
        }
        e[j] = g;
      }
      f = 0.0;
      for (Index j = 0; j < i; ++j) {
        e[j] /= h;
        f += e[j] * d[j];
      }
      const double hh = f / (h + h);
      for (Index j = 0; j < i; ++j) e[j] -= hh * d[j];
      for (Index j = 0; j < i; ++j) {
        f = d[j];
        g = e[j];
        for (Index k = j; k <= i - 1; ++k) V(k, j) -= (f * e[k] + g * d[k]);
        d[j] = V(i - 1, j);
        V(i, j) = 0.0;
      }
    }
    d[i] = h;
  }
  for (Index i = 0; i < n - 1; ++i) {
    V(n - 1, i) = V(i, i);
    V(i, i) = 1.0;
    const double h = d[i + 1];
    if (h != 0.0) {
      for (Index k = 0; k <= i; ++k) d[k] = V(k, i + 1) / h;
      for (Index j = 0; j <= i; ++j) {
        double g = 0.0;
        for (Index k = 0; k <= i; ++k) g += V(k, i + 1) * V(k, j);
        for (Index k = 0; k <= i; ++k) V(k, j) -= g * d[k];
      }
    }
    for (Index k = 0; k <= i; ++k) V(k, i + 1) = 0.0;
  }
  for (Index j = 0; j < n; ++j) {
    d[j] = V(n - 1, j);
    V(n - 1, j) = 0.0;
  }
  V(n - 1, n - 1) = 1.0;
  e[0] = 0.0;
}

// Implicit QL iterations on the tridiagonal matrix (d, e).
void tridiagonal_ql(Matrix& V, std::vector<double>& d, std::vector<double>& e) {
  const Index n = V.rows();
  for (Index i = 1; i < n; ++i) e[i - 1] = e[i];
  e[n - 1] = 0.0;
  double f = 0.0, tst1 = 0.0;
  const double eps = std::ldexp(1.0, -52);
  for (Index l = 0; l < n; ++l) {
    tst1 = std::max(tst1, std::abs(d[l]) + std::abs(e[l]));
    Index m = l;
    while (m < n) {
      if (std::abs(e[m]) <= eps * tst1) break;
      ++m;
    }
    if (m > l) {
      int iter = 0;
      do {
        if (++iter > 100) throw std::runtime_error("dense_eigs: QL iteration did not converge");
        double g = d[l];
        double p = (d[l + 1] - g) / (2.0 * e[l]);
        double r = std::hypot(p, 1.0);
        if (p < 0) r = -r;
        d[l] = e[l] / (p + r);
        d[l + 1] = e[l] * (p + r);
        const double dl1 = d[l + 1];
        double h = g - d[l];
        for (Index i = l + 2; i < n; ++i) d[i] -= h;
        f += h;
        p = d[m];
        double c = 1.0, c2 = c, c3 = c;
        const double el1 = e[l + 1];
        double s = 0.0, s2 = 0.0;
        for (Index i = m - 1; i >= l; --i) {
          c3 = c2;
          c2 = c;
          s2 = s;
          g = c * e[i];
          h = c * p;
          r = std::hypot(p, e[i]);
          e[i + 1] = s * r;
          s = e[i] / r;
          c = p / r;
          p = c * d[i] - s * g;
          d[i + 1] = h + s * (c * g + s * d[i]);
          for (Index k = 0; k < n; ++k) {
            h = V(k, i + 1);
            V(k, i + 1) = s * V(k, i) + c * h;
            V(k, i) = c * V(k, i) - s * h;
          }
        }
        p = -s * s2 * c3 * el1 * e[l] / dl1;
        e[l] = s * p;
        d[l] = c * p;
      } while (std::abs(e[l]) > eps * tst1);
    }
    d[l] += f;
    e[l] = 0.0;
  }
}

}  // namespace

DenseEigs dense_eigs(const Matrix& A, Index b, const OracleCaps& caps) {
  const Index n = A.rows();
  if (A.cols() != n) throw std::invalid_argument("dense_eigs: matrix is not square");
  if (n > caps.max_dim)
    throw std::length_error("dense_eigs: dimension " + std::to_string(n) + " exceeds the oracle cap of " +
                            std::to_string(caps.max_dim));
  if (n == 0) return {};
  const double scale = std::max(1.0, A.cwiseAbs().maxCoeff());
  if ((A - A.transpose()).cwiseAbs().maxCoeff() > caps.symmetry_tol * scale)
    throw std::invalid_argument("dense_eigs: matrix is not symmetric");
  Matrix V = 0.5 * (A + A.transpose());
  std::vector<double> d(n), e(n);
  if (n == 1) {
    d[0] = V(0, 0);
    V(0, 0) = 1.0;
  } else {
    tridiagonalize(V, d, e);
    tridiagonal_ql(V, d, e);
  }
  std::vector<Index> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](Index p, Index q) { return d[p] < d[q]; });
  const Index keep = (b <= 0 || b > n) ? n : b;
  DenseEigs out{Vector(keep), Matrix(n, keep)};
  for (Index j = 0; j < keep; ++j) {
    out.values(j) = d[order[j]];
    out.vectors.col(j) = V.col(order[j]);
  }
  return out;
}

double mae(const Vector& computed, const Vector& reference) {
  if (computed.size() != reference.size()) throw std::invalid_argument("mae: length mismatch");
  if (computed.size() == 0) return 0.0;
  return (computed - reference).cwiseAbs().mean();
}

Matrix dense_tangent_projector(const TTVector& x, Index cap) {
  Index total = 1;
  for (Index n : x.dims()) total *= n;
  if (total > cap)
    throw std::length_error("dense_tangent_projector: n^d exceeds the cap of " + std::to_string(cap));
  std::vector<Vector> cols;
  for (int k = 0; k < x.order(); ++k) {
    const Core3& c = x.core(k);
    for (Index p = 0; p < c.size(); ++p) {
      std::vector<Core3> cores = x.cores();
      Core3 unit(c.left_rank(), c.mode_size(), c.right_rank());
      unit.data()[p] = 1.0;
      cores[k] = unit;
      cols.push_back(tt_to_dense(TTVector(std::move(cores))));
    }
  }
  Matrix J(total, static_cast<Index>(cols.size()));
  for (size_t j = 0; j < cols.size(); ++j) J.col(j) = cols[j];
  Eigen::JacobiSVD<Matrix> svd(J, Eigen::ComputeThinU);
  const Vector& s = svd.singularValues();
  Index rank = 0;
  while (rank < s.size() && s(rank) > 1e-10 * s(0)) ++rank;
  Matrix U = svd.matrixU().leftCols(rank);
  return U * U.transpose();
}

Index tangent_dimension(const std::vector<Index>& dims, const std::vector<Index>& ranks) {
  const size_t d = dims.size();
  Index dim = 0;
  for (size_t k = 0; k < d; ++k) dim += ranks[k] * dims[k] * ranks[k + 1];
  for (size_t k = 1; k < d; ++k) dim -= ranks[k] * ranks[k];
  return dim;
}

}  // namespace lrrap
