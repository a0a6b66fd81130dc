// Tangent spaces of the fixed-TT-rank manifold.
//
// A tangent vector at x is stored by its delta cores dG_k; it represents
//   sum_k U_1..U_{k-1} dG_k V_{k+1}..V_d
// with U the left-orthogonal and V the right-orthogonal cores of x, and the
// gauge M^L(dG_k)^T M^L(U_k) = 0 for every k < d.
#pragma once

#include <memory>
#include <vector>

#include "lrrap/tt.hpp"

namespace lrrap {

class TangentBase {
 public:
  const TTVector& point() const { return x_; }
  const TTVector& left_frame() const { return u_; }
  const TTVector& right_frame() const { return v_; }
  int order() const { return x_.order(); }
  std::vector<Index> dims() const { return x_.dims(); }
  std::vector<Index> ranks() const { return u_.ranks(); }

  friend std::shared_ptr<const TangentBase> prepare_base(const TTVector& x);

 private:
  TangentBase() = default;
  TTVector x_, u_, v_;
};

using BasePtr = std::shared_ptr<const TangentBase>;

class BaseMismatch : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class TangentVector {
 public:
  TangentVector() = default;
  TangentVector(BasePtr base, std::vector<Core3> delta);

  const BasePtr& base() const { return base_; }
  const std::vector<Core3>& delta() const { return delta_; }
  const Core3& delta(int k) const { return delta_[k]; }

 private:
  BasePtr base_;
  std::vector<Core3> delta_;
};

// Tangent vectors sharing one base.
struct TangentBatch {
  BasePtr base;
  std::vector<TangentVector> members;
};

// Canonicalizes x (drops exactly zero singular directions) and computes both
// frames. The stored point has minimal ranks so the two frames agree in rank.
BasePtr prepare_base(const TTVector& x);

TangentVector tangent_zero(const BasePtr& base);
TangentVector project(const BasePtr& base, const TTVector& z);

enum class MatvecPath { fused, naive };
TangentVector project_matvec(const BasePtr& base, const TTOperator& H, const TTVector& y,
                             MatvecPath path = MatvecPath::fused);

TTVector embed(const TangentVector& t);
TangentVector axpy(double alpha, const TangentVector& t1, double beta, const TangentVector& t2);
// sum_j coeffs[j] * ts[j]; all members must share one base.
TangentVector combine(const std::vector<TangentVector>& ts, const Vector& coeffs);
double tangent_inner(const TangentVector& t1, const TangentVector& t2);

// Reapplies dG_k <- (I - U_k U_k^T) dG_k for k < d. A difference of two
// large tangent vectors keeps an absolute gauge error of rounding size, which
// matters once the difference itself is tiny.
TangentVector regauge(const TangentVector& t);

// max_k ||M^L(dG_k)^T M^L(U_k)||_F
double gauge_residual(const TangentVector& t);

}  // namespace lrrap
