// Small dense problem behind each block iteration: choose (c, C) minimizing
//   tr((X diag(c) + V C)^T H (X diag(c) + V C))
// subject to (X diag(c) + V C)^T (X diag(c) + V C) = I, using only Gram data.
//
// Column alpha of the unknowns is s_alpha = (zeta_alpha; c_alpha) where
// zeta_alpha = c[alpha] and c_alpha = C[:, alpha]. With
//   A_alpha   = [[x_a^T H x_a, x_a^T H V], [V^T H x_a, V^T H V]]
//   G_alphabeta = [[x_a^T x_b, x_a^T V], [V^T x_b, V^T V]]
// the objective is sum_a s_a^T A_a s_a and the constraints s_a^T G_ab s_b = delta_ab.
#pragma once

#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <vector>

#include "lrrap/tt.hpp"

namespace lrrap {

struct GramSet {
  Matrix VtV;       // 3b x 3b
  Matrix VtHV;      // 3b x 3b
  Matrix XtX;       // b x b
  Matrix VtX;       // 3b x b
  Matrix VtHX;      // 3b x b
  Vector diagXtHX;  // b

  Index b() const { return XtX.rows(); }
  Index m() const { return VtV.rows(); }
  // Throws ShapeError on inconsistent sizes.
  void validate() const;
};

struct Coefficients {
  Vector c;  // b
  Matrix C;  // 3b x b
};

struct LagrangeState {
  std::vector<Vector> s;  // b vectors of length 3b+1
  Matrix lambda;          // b x b, symmetric
  int sweep = 0;
};

struct FlopCounter {
  double sweeps = 0.0;  // Gauss-Seidel phase (init + sweeps)
  double polish = 0.0;
};

struct CoeffOptions {
  int sweeps = 3;
  // Stop sweeping once the KKT residual falls below this.
  double early_exit = 1e-8;
  // Relative eigenvalue floor when whitening a singular Gram pencil.
  double whiten_tol = 1e-10;
  // Newton refinement of the sweep result to a KKT point (see polish.cpp).
  bool polish = true;
  int polish_max_b = 16;
  int polish_max_iters = 100;
  // Rescale V columns to unit Gram diagonal before solving.
  bool scale_columns = true;
  // Structured per-sweep diagnostics.
  std::ostream* debug = nullptr;
};

struct CoeffResult {
  Coefficients coeffs;
  LagrangeState state;
  double trace = 0.0;
  double init_trace = 0.0;
  double constraint_residual = 0.0;
  double kkt_residual = 0.0;
  int sweeps_done = 0;
  bool polished = false;
  FlopCounter flops;
};

class CoeffSolveError : public std::runtime_error {
 public:
  CoeffSolveError(const std::string& what, double residual)
      : std::runtime_error(what), residual_(residual) {}
  double residual() const { return residual_; }

 private:
  double residual_;
};

// b lowest Ritz vectors of (VtHV, VtV), VtV-orthonormal. Null directions of
// VtV are filtered out by whitening.
Matrix block_rayleigh_ritz(const Matrix& VtHV, const Matrix& VtV, Index b, double whiten_tol = 1e-10,
                           Vector* ritz_values = nullptr);

// Orthonormal basis of Null(S^T); numerical rank uses sigma > tol*sigma_max,
// tol defaulting to rows*eps.
Matrix nullspace_basis(const Matrix& S, double tol = -1.0);

struct ReducedEig {
  double lambda;
  Vector z;  // z^T Gred z = 1
};
ReducedEig solve_reduced_geig(const Matrix& Ared, const Matrix& Gred, double whiten_tol = 1e-10);

CoeffResult find_coefficients(const GramSet& G, const LagrangeState* init = nullptr,
                              const CoeffOptions& opts = {});

// ||(X diag(c) + V C)^T (X diag(c) + V C) - I||_F from Gram data.
double constraint_residual(const GramSet& G, const Coefficients& coeffs);
// Objective sum_a s_a^T A_a s_a.
double coefficient_trace(const GramSet& G, const Coefficients& coeffs);
// Stacked first-order residual with least-squares symmetric multipliers:
//   sqrt(||stationarity||^2 / max(1, ||A s||^2) + ||constraint||^2).
double kkt_residual(const GramSet& G, const Coefficients& coeffs, Matrix* lambda = nullptr);

namespace detail {
// Block-structured data shared by the sweep and the polish.
struct CoeffProblem {
  const GramSet* g;
  Index b, m;  // m = 3b + 1
  Matrix A(Index a) const;
  Matrix Gab(Index a, Index c) const;
  // G_ab * s
  Vector Gab_times(Index a, Index c, const Vector& s) const;
};

// In-place Newton polish on whitened coordinates; returns iterations used.
int polish_kkt(const CoeffProblem& p, std::vector<Vector>& s, int max_iters, double whiten_tol, double* flops);
}  // namespace detail

}  // namespace lrrap
