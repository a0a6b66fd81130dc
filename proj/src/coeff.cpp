#include "lrrap/coeff.hpp"

#include <cmath>
#include <limits>
#include <ostream>

namespace lrrap {

namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();

double flops_gemm(double m, double k, double n) { return 2.0 * m * k * n; }
double flops_eig(double n) { return 9.0 * n * n * n; }
double flops_svd_full(double m, double n) { return 4.0 * m * m * n + 8.0 * m * n * n + 9.0 * n * n * n; }

Vector to_s(const Coefficients& co, Index a) {
  Vector s(co.C.rows() + 1);
  s(0) = co.c(a);
  s.tail(co.C.rows()) = co.C.col(a);
  return s;
}

Coefficients from_s(const std::vector<Vector>& s, Index m) {
  const Index b = static_cast<Index>(s.size());
  Coefficients co{Vector(b), Matrix(m, b)};
  for (Index a = 0; a < b; ++a) {
    co.c(a) = s[a](0);
    co.C.col(a) = s[a].tail(m);
  }
  return co;
}

double sweep_trace(const detail::CoeffProblem& p, const std::vector<Vector>& s) {
  double t = 0.0;
  for (Index a = 0; a < p.b; ++a) t += s[a].dot(p.A(a) * s[a]);
  return t;
}

double sweep_constraint(const detail::CoeffProblem& p, const std::vector<Vector>& s) {
  double acc = 0.0;
  for (Index a = 0; a < p.b; ++a)
    for (Index c = 0; c < p.b; ++c) {
      double v = s[a].dot(p.Gab_times(a, c, s[c])) - (a == c ? 1.0 : 0.0);
      acc += v * v;
    }
  return std::sqrt(acc);
}

}  // namespace

void GramSet::validate() const {
  const Index nb = XtX.rows();
  const Index m = 3 * nb;
  auto bad = [](const char* what) { throw ShapeError(std::string("GramSet: ") + what); };
  if (nb < 1 || XtX.cols() != nb) bad("XtX must be b x b with b >= 1");
  if (VtV.rows() != m || VtV.cols() != m) bad("VtV must be 3b x 3b");
  if (VtHV.rows() != m || VtHV.cols() != m) bad("VtHV must be 3b x 3b");
  if (VtX.rows() != m || VtX.cols() != nb) bad("VtX must be 3b x b");
  if (VtHX.rows() != m || VtHX.cols() != nb) bad("VtHX must be 3b x b");
  if (diagXtHX.size() != nb) bad("diagXtHX must have length b");
}

namespace detail {

Matrix CoeffProblem::A(Index a) const {
  Matrix out(m, m);
  out(0, 0) = g->diagXtHX(a);
  out.block(0, 1, 1, m - 1) = g->VtHX.col(a).transpose();
  out.block(1, 0, m - 1, 1) = g->VtHX.col(a);
  out.bottomRightCorner(m - 1, m - 1) = g->VtHV;
  return out;
}

Matrix CoeffProblem::Gab(Index a, Index c) const {
  Matrix out(m, m);
  out(0, 0) = g->XtX(a, c);
  out.block(0, 1, 1, m - 1) = g->VtX.col(a).transpose();
  out.block(1, 0, m - 1, 1) = g->VtX.col(c);
  out.bottomRightCorner(m - 1, m - 1) = g->VtV;
  return out;
}

Vector CoeffProblem::Gab_times(Index a, Index c, const Vector& s) const {
  Vector out(m);
  auto tail = s.tail(m - 1);
  out(0) = g->XtX(a, c) * s(0) + g->VtX.col(a).dot(tail);
  out.tail(m - 1) = g->VtX.col(c) * s(0) + g->VtV * tail;
  return out;
}

}  // namespace detail

Matrix block_rayleigh_ritz(const Matrix& VtHV, const Matrix& VtV, Index b, double whiten_tol, Vector* ritz_values) {
  if (VtHV.rows() != VtV.rows() || VtV.rows() != VtV.cols() || VtHV.rows() != VtHV.cols())
    throw ShapeError("block_rayleigh_ritz: pencil sizes differ");
  Eigen::SelfAdjointEigenSolver<Matrix> eg(VtV);
  const Vector& w = eg.eigenvalues();
  const double wmax = w.size() ? w.maxCoeff() : 0.0;
  std::vector<Index> keep;
  for (Index i = 0; i < w.size(); ++i)
    if (wmax > 0 && w(i) > whiten_tol * wmax) keep.push_back(i);
  if (static_cast<Index>(keep.size()) < b)
    throw CoeffSolveError("block_rayleigh_ritz: fewer than b admissible directions after filtering",
                          static_cast<double>(keep.size()));
  Matrix T(VtV.rows(), static_cast<Index>(keep.size()));
  for (size_t j = 0; j < keep.size(); ++j) T.col(j) = eg.eigenvectors().col(keep[j]) / std::sqrt(w(keep[j]));
  Matrix red = T.transpose() * VtHV * T;
  red = 0.5 * (red + red.transpose());
  Eigen::SelfAdjointEigenSolver<Matrix> er(red);
  if (ritz_values) *ritz_values = er.eigenvalues().head(b);
  return T * er.eigenvectors().leftCols(b);
}

Matrix nullspace_basis(const Matrix& S, double tol) {
  const Index m = S.rows();
  if (S.cols() == 0) return Matrix::Identity(m, m);
  if (tol < 0) tol = double(m) * kEps;
  Eigen::JacobiSVD<Matrix> svd(S, Eigen::ComputeFullU);
  const Vector& sv = svd.singularValues();
  const double smax = sv.size() ? sv(0) : 0.0;
  Index rank = 0;
  if (smax > 0)
    while (rank < sv.size() && sv(rank) > tol * smax) ++rank;
  return svd.matrixU().rightCols(m - rank);
}

ReducedEig solve_reduced_geig(const Matrix& Ared, const Matrix& Gred, double whiten_tol) {
  if (Ared.rows() != Gred.rows() || Ared.rows() != Ared.cols() || Gred.rows() != Gred.cols())
    throw ShapeError("solve_reduced_geig: pencil sizes differ");
  if (Gred.rows() == 0) throw CoeffSolveError("solve_reduced_geig: empty pencil", 0.0);
  Eigen::SelfAdjointEigenSolver<Matrix> eg(0.5 * (Gred + Gred.transpose()));
  const Vector& w = eg.eigenvalues();
  const double wmax = w.maxCoeff();
  if (!(wmax > std::numeric_limits<double>::min() * 1e10))
    throw CoeffSolveError("solve_reduced_geig: Gram block is numerically zero", wmax);
  std::vector<Index> keep;
  for (Index i = 0; i < w.size(); ++i)
    if (w(i) > whiten_tol * wmax) keep.push_back(i);
  Matrix T(Gred.rows(), static_cast<Index>(keep.size()));
  for (size_t j = 0; j < keep.size(); ++j) T.col(j) = eg.eigenvectors().col(keep[j]) / std::sqrt(w(keep[j]));
  Matrix red = T.transpose() * Ared * T;
  red = 0.5 * (red + red.transpose());
  Eigen::SelfAdjointEigenSolver<Matrix> er(red);
  return {er.eigenvalues()(0), T * er.eigenvectors().col(0)};
}

double constraint_residual(const GramSet& G, const Coefficients& co) {
  const Matrix D = co.c.asDiagonal();
  Matrix M = D * G.XtX * D;
  Matrix cross = co.C.transpose() * G.VtX * D;
  M += cross + cross.transpose() + co.C.transpose() * G.VtV * co.C;
  M -= Matrix::Identity(M.rows(), M.cols());
  return M.norm();
}

double coefficient_trace(const GramSet& G, const Coefficients& co) {
  double t = 0.0;
  for (Index a = 0; a < G.b(); ++a) {
    const auto ca = co.C.col(a);
    t += co.c(a) * co.c(a) * G.diagXtHX(a) + 2.0 * co.c(a) * G.VtHX.col(a).dot(ca) + ca.dot(G.VtHV * ca);
  }
  return t;
}

double kkt_residual(const GramSet& G, const Coefficients& co, Matrix* lambda) {
  G.validate();
  detail::CoeffProblem p{&G, G.b(), G.m() + 1};
  const Index b = p.b, m = p.m;
  std::vector<Vector> s(b);
  for (Index a = 0; a < b; ++a) s[a] = to_s(co, a);
  const Index np = b * (b + 1) / 2;
  Matrix M = Matrix::Zero(b * m, np);
  Vector rhs(b * m);
  std::vector<std::pair<Index, Index>> pairs;
  for (Index q = 0; q < b; ++q)
    for (Index r = q; r < b; ++r) pairs.emplace_back(q, r);
  for (Index a = 0; a < b; ++a) rhs.segment(a * m, m) = p.A(a) * s[a];
  for (Index j = 0; j < np; ++j) {
    auto [q, r] = pairs[j];
    M.block(q * m, j, m, 1) += p.Gab_times(q, r, s[r]);
    if (q != r) M.block(r * m, j, m, 1) += p.Gab_times(r, q, s[q]);
  }
  Vector lam = M.colPivHouseholderQr().solve(rhs);
  if (!lam.allFinite()) lam.setZero();
  const double stat2 = (rhs - M * lam).squaredNorm();
  const double scale = std::max(1.0, rhs.squaredNorm());
  const double cons = constraint_residual(G, co);
  if (lambda) {
    lambda->setZero(b, b);
    for (Index j = 0; j < np; ++j) {
      auto [q, r] = pairs[j];
      (*lambda)(q, r) = (*lambda)(r, q) = lam(j);
    }
  }
  return std::sqrt(stat2 / scale + cons * cons);
}

CoeffResult find_coefficients(const GramSet& G, const LagrangeState* init, const CoeffOptions& opts) {
  G.validate();
  const Index b = G.b(), m3 = G.m(), m = m3 + 1;
  CoeffResult res;

  // Column scaling: V -> V D with unit Gram diagonal; zero columns dropped.
  Vector dscale = Vector::Ones(m3);
  if (opts.scale_columns) {
    for (Index j = 0; j < m3; ++j) {
      const double v = G.VtV(j, j);
      dscale(j) = v > 0 ? 1.0 / std::sqrt(v) : 0.0;
    }
  }
  GramSet gs;
  const auto D = dscale.asDiagonal();
  gs.VtV = D * G.VtV * D;
  gs.VtHV = D * G.VtHV * D;
  gs.VtHV = 0.5 * (gs.VtHV + gs.VtHV.transpose());
  gs.VtV = 0.5 * (gs.VtV + gs.VtV.transpose());
  gs.XtX = G.XtX;
  gs.VtX = D * G.VtX;
  gs.VtHX = D * G.VtHX;
  gs.diagXtHX = G.diagXtHX;
  detail::CoeffProblem p{&gs, b, m};
  auto& flops = res.flops.sweeps;

  std::vector<Vector> s(b, Vector::Zero(m));
  bool from_init = false;
  if (init && static_cast<Index>(init->s.size()) == b) {
    from_init = true;
    for (Index a = 0; a < b; ++a) {
      if (init->s[a].size() != m) from_init = false;
    }
    if (from_init) s = init->s;
  }
  if (!from_init) {
    Matrix C0 = block_rayleigh_ritz(gs.VtHV, gs.VtV, b, opts.whiten_tol);
    flops += 2 * flops_eig(double(m3)) + 2 * flops_gemm(m3, m3, m3);
    for (Index a = 0; a < b; ++a) {
      s[a](0) = 0.0;
      s[a].tail(m3) = C0.col(a);
      // s^T G s = 1 holds by construction; rescale to wash out rounding.
      const double nrm = std::sqrt(std::max(s[a].dot(p.Gab_times(a, a, s[a])), 0.0));
      if (nrm > 0) s[a] /= nrm;
    }
  }
  const bool init_feasible = sweep_constraint(p, s) <= 1e-8;
  double best_trace = init_feasible ? sweep_trace(p, s) : std::numeric_limits<double>::infinity();
  std::vector<Vector> best = s;
  res.init_trace = best_trace;
  if (opts.debug) {
    *opts.debug << "coeff b " << b << " init_trace " << best_trace << " init_feasible " << init_feasible << '\n';
    *opts.debug << "coeff gram_diag_VtV";
    for (Index j = 0; j < m3; ++j) *opts.debug << ' ' << G.VtV(j, j);
    *opts.debug << '\n';
  }

  const double null_tol = double(m) * kEps;
  int sweeps_done = 0;
  for (int k = 0; k < opts.sweeps; ++k) {
    for (Index a = 0; a < b; ++a) {
      Matrix S(m, b - 1);
      Index col = 0;
      for (Index c = 0; c < b; ++c)
        if (c != a) S.col(col++) = p.Gab_times(a, c, s[c]);
      flops += double(b - 1) * flops_gemm(m, m, 1);
      Matrix Q = nullspace_basis(S, null_tol);
      flops += flops_svd_full(m, b - 1);
      if (Q.cols() == 0) throw CoeffSolveError("find_coefficients: empty null space", double(a));
      Matrix Ared = Q.transpose() * p.A(a) * Q;
      Matrix Gred = Q.transpose() * p.Gab(a, a) * Q;
      flops += 2 * (flops_gemm(Q.cols(), m, m) + flops_gemm(Q.cols(), m, Q.cols()));
      ReducedEig re;
      try {
        re = solve_reduced_geig(Ared, Gred, opts.whiten_tol);
      } catch (const CoeffSolveError& e) {
        throw CoeffSolveError(std::string("find_coefficients: reduced pencil failed at column ") +
                                  std::to_string(a) + ": " + e.what(),
                              e.residual());
      }
      flops += 2 * flops_eig(double(Q.cols())) + 2 * flops_gemm(Q.cols(), Q.cols(), Q.cols());
      s[a] = Q * re.z;
    }
    ++sweeps_done;
    const double tr = sweep_trace(p, s);
    const double cons = sweep_constraint(p, s);
    const double kkt = kkt_residual(gs, from_s(s, m3));
    if (opts.debug)
      *opts.debug << "coeff sweep " << sweeps_done << " trace " << tr << " constraint " << cons << " kkt " << kkt
                  << '\n';
    if (tr > best_trace + 1e-12 * std::max(1.0, std::abs(best_trace))) {
      // Trace guard: keep the best feasible point and stop sweeping.
      s = best;
      break;
    }
    best = s;
    best_trace = tr;
    if (kkt < opts.early_exit) break;
  }
  res.sweeps_done = sweeps_done;

  double kkt_now = kkt_residual(gs, from_s(s, m3));
  if (opts.polish && b > 1 && b <= opts.polish_max_b && kkt_now > opts.early_exit) {
    std::vector<Vector> trial = s;
    const int its = detail::polish_kkt(p, trial, opts.polish_max_iters, opts.whiten_tol, &res.flops.polish);
    const double tr = sweep_trace(p, trial);
    const double cons = sweep_constraint(p, trial);
    if (opts.debug)
      *opts.debug << "coeff polish iters " << its << " trace " << tr << " constraint " << cons << '\n';
    if (cons <= 1e-10 && tr <= best_trace + 1e-12 * std::max(1.0, std::abs(best_trace))) {
      s = trial;
      res.polished = true;
    }
  }

  // Undo the column scaling.
  Coefficients scaled = from_s(s, m3);
  res.coeffs.c = scaled.c;
  res.coeffs.C = D * scaled.C;
  res.state.s.resize(b);
  for (Index a = 0; a < b; ++a) res.state.s[a] = to_s(res.coeffs, a);
  res.state.sweep = sweeps_done;
  res.trace = coefficient_trace(G, res.coeffs);
  res.constraint_residual = constraint_residual(G, res.coeffs);
  res.kkt_residual = kkt_residual(G, res.coeffs, &res.state.lambda);
  if (opts.debug)
    *opts.debug << "coeff final trace " << res.trace << " constraint " << res.constraint_residual << " kkt "
                << res.kkt_residual << " polished " << res.polished << '\n';
  if (!(res.constraint_residual <= 1e-8))
    throw CoeffSolveError("find_coefficients: orthonormality constraint not met", res.constraint_residual);
  return res;
}

}  // namespace lrrap
