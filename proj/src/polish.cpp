// Newton refinement of the coefficient problem.
//
// The column-by-column sweep ends feasible but generally not stationary for
// the joint problem: each column update only sees its own multipliers, so the
// mixed directions between columns are never optimized. This pass works in
// whitened coordinates u_a (s_a = T_a u_a, T_a^T G_aa T_a = I) and takes
// reduced Newton steps on the constraint manifold:
//   - multipliers by least squares on the constraint Jacobian,
//   - Lagrangian Hessian restricted to the null space of the Jacobian,
//     shifted to be positive definite,
//   - backtracking on the objective after pulling the trial point back onto
//     the constraints with Gauss-Newton minimum-norm corrections.
#include <cmath>
#include <limits>

#include "lrrap/coeff.hpp"

namespace lrrap::detail {

namespace {

struct Whitened {
  Index b = 0, n = 0, nc = 0;
  std::vector<Matrix> T, At;
  std::vector<std::vector<Matrix>> Gt;  // Gt[p][q] = T_p^T G_pq T_q
  std::vector<Index> off;
  std::vector<std::pair<Index, Index>> pairs;

  auto blk(const Vector& u, Index a) const { return u.segment(off[a], off[a + 1] - off[a]); }

  double f(const Vector& u) const {
    double t = 0.0;
    for (Index a = 0; a < b; ++a) t += blk(u, a).dot(At[a] * blk(u, a));
    return t;
  }

  Vector cons(const Vector& u) const {
    Vector c(nc);
    for (Index j = 0; j < nc; ++j) {
      auto [p, q] = pairs[j];
      c(j) = blk(u, p).dot(Gt[p][q] * blk(u, q)) - (p == q ? 1.0 : 0.0);
    }
    return c;
  }

  Matrix jac(const Vector& u) const {
    Matrix J = Matrix::Zero(nc, n);
    for (Index j = 0; j < nc; ++j) {
      auto [p, q] = pairs[j];
      J.block(j, off[p], 1, off[p + 1] - off[p]) += (Gt[p][q] * blk(u, q)).transpose();
      J.block(j, off[q], 1, off[q + 1] - off[q]) += (Gt[q][p] * blk(u, p)).transpose();
    }
    return J;
  }

  Vector grad(const Vector& u) const {
    Vector g(n);
    for (Index a = 0; a < b; ++a) g.segment(off[a], off[a + 1] - off[a]) = 2.0 * At[a] * blk(u, a);
    return g;
  }

  Vector restore(Vector u) const {
    for (int it = 0; it < 30; ++it) {
      Vector c = cons(u);
      if (c.norm() < 1e-15) break;
      Matrix J = jac(u);
      Matrix JJ = J * J.transpose();
      u -= J.transpose() * JJ.ldlt().solve(c);
    }
    return u;
  }
};

Matrix whiten(const Matrix& G, double tol) {
  Eigen::SelfAdjointEigenSolver<Matrix> eg(0.5 * (G + G.transpose()));
  const Vector& w = eg.eigenvalues();
  const double wmax = w.maxCoeff();
  std::vector<Index> keep;
  for (Index i = 0; i < w.size(); ++i)
    if (wmax > 0 && w(i) > tol * wmax) keep.push_back(i);
  Matrix T(G.rows(), static_cast<Index>(keep.size()));
  for (size_t j = 0; j < keep.size(); ++j) T.col(j) = eg.eigenvectors().col(keep[j]) / std::sqrt(w(keep[j]));
  return T;
}

}  // namespace

int polish_kkt(const CoeffProblem& p, std::vector<Vector>& s, int max_iters, double whiten_tol, double* flops) {
  Whitened w;
  w.b = p.b;
  w.off.push_back(0);
  for (Index a = 0; a < p.b; ++a) {
    w.T.push_back(whiten(p.Gab(a, a), whiten_tol));
    w.At.push_back(w.T[a].transpose() * p.A(a) * w.T[a]);
    w.off.push_back(w.off.back() + w.T[a].cols());
  }
  w.n = w.off.back();
  w.Gt.assign(p.b, std::vector<Matrix>(p.b));
  for (Index a = 0; a < p.b; ++a)
    for (Index c = 0; c < p.b; ++c) w.Gt[a][c] = w.T[a].transpose() * p.Gab(a, c) * w.T[c];
  for (Index q = 0; q < p.b; ++q)
    for (Index r = q; r < p.b; ++r) w.pairs.emplace_back(q, r);
  w.nc = static_cast<Index>(w.pairs.size());
  if (w.n <= w.nc) return 0;

  Vector u(w.n);
  for (Index a = 0; a < p.b; ++a)
    u.segment(w.off[a], w.off[a + 1] - w.off[a]) = w.T[a].transpose() * p.Gab(a, a) * s[a];
  u = w.restore(u);

  const double n = double(w.n);
  int it = 0;
  for (; it < max_iters; ++it) {
    Vector g = w.grad(u);
    Matrix J = w.jac(u);
    Eigen::ColPivHouseholderQR<Matrix> qr(J.transpose());
    Vector lam = qr.solve(g);
    const double rg = (g - J.transpose() * lam).norm();
    if (flops) *flops += 4.0 * n * n * double(w.nc);
    if (rg < 1e-13 * std::max(1.0, g.norm())) break;

    Matrix HL = Matrix::Zero(w.n, w.n);
    for (Index a = 0; a < p.b; ++a) {
      const Index sz = w.off[a + 1] - w.off[a];
      HL.block(w.off[a], w.off[a], sz, sz) = 2.0 * w.At[a];
    }
    for (Index j = 0; j < w.nc; ++j) {
      auto [q, r] = w.pairs[j];
      const Index sq = w.off[q + 1] - w.off[q], sr = w.off[r + 1] - w.off[r];
      if (q == r) {
        HL.block(w.off[q], w.off[q], sq, sq) -= 2.0 * lam(j) * w.Gt[q][q];
      } else {
        HL.block(w.off[q], w.off[r], sq, sr) -= lam(j) * w.Gt[q][r];
        HL.block(w.off[r], w.off[q], sr, sq) -= lam(j) * w.Gt[r][q];
      }
    }
    const Index rank = qr.rank();
    Matrix Qf = qr.householderQ();
    Matrix Z = Qf.rightCols(w.n - rank);
    Matrix Hr = Z.transpose() * HL * Z;
    Hr = 0.5 * (Hr + Hr.transpose());
    Vector gr = Z.transpose() * g;
    Eigen::SelfAdjointEigenSolver<Matrix> eg(Hr);
    const Vector& e = eg.eigenvalues();
    const double emax = e.cwiseAbs().maxCoeff();
    const double shift = std::max(0.0, -e.minCoeff() + 1e-8 * std::max(1.0, emax));
    Vector coef = eg.eigenvectors().transpose() * gr;
    for (Index i = 0; i < coef.size(); ++i) coef(i) /= e(i) + shift;
    Vector d = -Z * (eg.eigenvectors() * coef);
    const double zc = double(Z.cols());
    if (flops) *flops += 2.0 * n * n * n + 2.0 * n * n * zc + 2.0 * n * zc * zc + 9.0 * zc * zc * zc;

    const double f0 = w.f(u), slope = g.dot(d);
    double t = 1.0;
    Vector un = u;
    bool accepted = false;
    while (t > 1e-10) {
      un = w.restore(u + t * d);
      if (w.f(un) <= f0 + 1e-4 * t * slope) {
        accepted = true;
        break;
      }
      t *= 0.5;
    }
    if (!accepted) break;
    u = un;
  }

  for (Index a = 0; a < p.b; ++a) s[a] = w.T[a] * u.segment(w.off[a], w.off[a + 1] - w.off[a]);
  return it;
}

}  // namespace lrrap::detail
