#include "lrrap/tangent.hpp"

#include <cmath>

#include "contract.hpp"

namespace lrrap {

namespace {

void check_dims(const BasePtr& base, const std::vector<Index>& dims, const char* op) {
  if (!base) throw std::invalid_argument(std::string(op) + ": null tangent base");
  if (base->dims() != dims) throw ShapeError(std::string(op) + ": mode sizes differ from the base");
}

void check_same_base(const TangentVector& a, const TangentVector& b, const char* op) {
  if (a.base() != b.base())
    throw BaseMismatch(std::string(op) + ": tangent vectors are anchored at different bases");
}

// dG_k = (I - U_k U_k^T) Ghat_k for k < d-1; the last core is left alone.
Core3 gauge_fix(const RowMatrix& ghat, const Core3& u, bool last) {
  Core3 out(u.left_rank(), u.mode_size(), u.right_rank());
  auto ol = out.left_unfolding();
  if (last) {
    ol = ghat;
  } else {
    auto ul = u.left_unfolding();
    RowMatrix coef = ul.transpose() * ghat;
    ol = ghat - ul * coef;
  }
  return out;
}

}  // namespace

TangentVector::TangentVector(BasePtr base, std::vector<Core3> delta) : base_(std::move(base)), delta_(std::move(delta)) {
  if (!base_) throw std::invalid_argument("TangentVector: null base");
  const auto& u = base_->left_frame();
  if (static_cast<int>(delta_.size()) != u.order()) throw ShapeError("TangentVector: wrong number of delta cores");
  for (int k = 0; k < u.order(); ++k) {
    const Core3& c = u.core(k);
    const Core3& g = delta_[k];
    if (g.left_rank() != c.left_rank() || g.mode_size() != c.mode_size() || g.right_rank() != c.right_rank())
      throw ShapeError("TangentVector: delta core shape differs from the frame");
  }
}

BasePtr prepare_base(const TTVector& x) {
  auto base = std::shared_ptr<TangentBase>(new TangentBase());
  base->u_ = tt_round(x, x.max_rank());
  if (base->u_.core(base->u_.order() - 1).squared_norm() == 0.0)
    throw std::invalid_argument("prepare_base: zero vector has no tangent space");
  base->v_ = orthogonalize_right(base->u_);
  base->x_ = x;
  return base;
}

TangentVector tangent_zero(const BasePtr& base) {
  std::vector<Core3> delta;
  for (const auto& c : base->left_frame().cores()) delta.emplace_back(c.left_rank(), c.mode_size(), c.right_rank());
  return TangentVector(base, std::move(delta));
}

TangentVector project(const BasePtr& base, const TTVector& z) {
  check_dims(base, z.dims(), "project");
  const TTVector& U = base->left_frame();
  const TTVector& V = base->right_frame();
  const int d = U.order();
  std::vector<RowMatrix> right(d);
  right[d - 1] = RowMatrix::Ones(1, 1);
  for (int k = d - 1; k > 0; --k) right[k - 1] = detail::env2_right_step(right[k], V.core(k), z.core(k));

  std::vector<Core3> delta;
  delta.reserve(d);
  RowMatrix left = RowMatrix::Ones(1, 1);
  for (int k = 0; k < d; ++k) {
    const Core3& zk = z.core(k);
    const Index n = zk.mode_size();
    RowMatrix t = left * zk.right_unfolding();
    RowMatrix ghat = ConstRowMap(t.data(), left.rows() * n, zk.right_rank()) * right[k];
    delta.push_back(gauge_fix(ghat, U.core(k), k == d - 1));
    if (k + 1 < d) left = detail::env2_left_step(left, U.core(k), zk);
  }
  return TangentVector(base, std::move(delta));
}

TangentVector project_matvec(const BasePtr& base, const TTOperator& H, const TTVector& y, MatvecPath path) {
  check_dims(base, y.dims(), "project_matvec");
  if (H.dims() != y.dims()) throw ShapeError("project_matvec: operator mode sizes differ");
  if (path == MatvecPath::naive) return project(base, tt_matvec(H, y));

  const TTVector& U = base->left_frame();
  const TTVector& V = base->right_frame();
  const int d = U.order();
  std::vector<RowMatrix> right(d);
  right[d - 1] = RowMatrix::Ones(1, 1);
  for (int k = d - 1; k > 0; --k) {
    RowMatrix hr = detail::op_right_layout(H.core(k));
    right[k - 1] = detail::env3_right_step(right[k], V.core(k), hr, y.core(k), H.core(k).right_rank());
  }

  std::vector<Core3> delta;
  delta.reserve(d);
  RowMatrix left = RowMatrix::Ones(1, 1);
  for (int k = 0; k < d; ++k) {
    const Core4& h = H.core(k);
    const Core3& yk = y.core(k);
    const Core3& uk = U.core(k);
    const Index R = h.left_rank(), R2 = h.right_rank(), ry2 = yk.right_rank(), rx2 = uk.right_rank();
    RowMatrix hl = detail::op_left_layout(h);
    RowMatrix t2 = detail::env3_left_partial(left, hl, yk, uk.left_rank(), R);
    // right env [c'][b'][a'] -> [b'][c'][a']
    const RowMatrix& re = right[k];
    RowMatrix rp(R2 * ry2, rx2);
    for (Index c = 0; c < ry2; ++c)
      for (Index b = 0; b < R2; ++b) rp.row(b * ry2 + c) = re.row(c * R2 + b);
    RowMatrix ghat = t2 * rp;
    delta.push_back(gauge_fix(ghat, uk, k == d - 1));
    if (k + 1 < d) {
      RowMatrix next(rx2 * R2, ry2);
      RowMap(next.data(), rx2, R2 * ry2).noalias() = uk.left_unfolding().transpose() * t2;
      left = std::move(next);
    }
  }
  return TangentVector(base, std::move(delta));
}

TTVector embed(const TangentVector& t) {
  const TTVector& U = t.base()->left_frame();
  const TTVector& V = t.base()->right_frame();
  const int d = U.order();
  if (d == 1) return TTVector({t.delta(0)});
  std::vector<Core3> cores;
  cores.reserve(d);
  for (int k = 0; k < d; ++k) {
    const Core3& u = U.core(k);
    const Core3& v = V.core(k);
    const Core3& g = t.delta(k);
    const Index rl = u.left_rank(), rr = u.right_rank(), n = u.mode_size();
    if (k == 0) {
      Core3 s(1, n, 2 * rr);
      for (Index i = 0; i < n; ++i) {
        s.slice(i).leftCols(rr) = g.slice(i);
        s.slice(i).rightCols(rr) = u.slice(i);
      }
      cores.push_back(std::move(s));
    } else if (k == d - 1) {
      Core3 s(2 * rl, n, 1);
      for (Index i = 0; i < n; ++i) {
        s.slice(i).topRows(rl) = v.slice(i);
        s.slice(i).bottomRows(rl) = g.slice(i);
      }
      cores.push_back(std::move(s));
    } else {
      Core3 s(2 * rl, n, 2 * rr);
      for (Index i = 0; i < n; ++i) {
        auto si = s.slice(i);
        si.topLeftCorner(rl, rr) = v.slice(i);
        si.bottomLeftCorner(rl, rr) = g.slice(i);
        si.bottomRightCorner(rl, rr) = u.slice(i);
      }
      cores.push_back(std::move(s));
    }
  }
  return TTVector(std::move(cores));
}

TangentVector axpy(double alpha, const TangentVector& t1, double beta, const TangentVector& t2) {
  check_same_base(t1, t2, "axpy");
  std::vector<Core3> delta = t1.delta();
  for (size_t k = 0; k < delta.size(); ++k) {
    double* p = delta[k].data();
    const double* q = t2.delta(static_cast<int>(k)).data();
    for (Index e = 0; e < delta[k].size(); ++e) p[e] = alpha * p[e] + beta * q[e];
  }
  return TangentVector(t1.base(), std::move(delta));
}

TangentVector combine(const std::vector<TangentVector>& ts, const Vector& coeffs) {
  if (ts.empty()) throw std::invalid_argument("combine: empty list");
  if (static_cast<Index>(ts.size()) != coeffs.size()) throw ShapeError("combine: coefficient count mismatch");
  TangentVector out = tangent_zero(ts.front().base());
  std::vector<Core3> delta = out.delta();
  for (size_t j = 0; j < ts.size(); ++j) {
    check_same_base(ts.front(), ts[j], "combine");
    const double w = coeffs(static_cast<Index>(j));
    if (w == 0.0) continue;
    for (size_t k = 0; k < delta.size(); ++k) {
      double* p = delta[k].data();
      const double* q = ts[j].delta(static_cast<int>(k)).data();
      for (Index e = 0; e < delta[k].size(); ++e) p[e] += w * q[e];
    }
  }
  return TangentVector(ts.front().base(), std::move(delta));
}

double tangent_inner(const TangentVector& t1, const TangentVector& t2) {
  check_same_base(t1, t2, "tangent_inner");
  double s = 0.0;
  for (size_t k = 0; k < t1.delta().size(); ++k) {
    const Core3& a = t1.delta(static_cast<int>(k));
    const Core3& b = t2.delta(static_cast<int>(k));
    s += Eigen::Map<const Vector>(a.data(), a.size()).dot(Eigen::Map<const Vector>(b.data(), b.size()));
  }
  return s;
}

TangentVector regauge(const TangentVector& t) {
  const TTVector& U = t.base()->left_frame();
  const int d = U.order();
  std::vector<Core3> delta = t.delta();
  for (int k = 0; k + 1 < d; ++k) {
    auto ul = U.core(k).left_unfolding();
    auto gl = delta[k].left_unfolding();
    RowMatrix coef = ul.transpose() * gl;
    gl -= ul * coef;
  }
  return TangentVector(t.base(), std::move(delta));
}

double gauge_residual(const TangentVector& t) {
  const TTVector& U = t.base()->left_frame();
  double worst = 0.0;
  for (int k = 0; k + 1 < U.order(); ++k)
    worst = std::max(worst, (t.delta(k).left_unfolding().transpose() * U.core(k).left_unfolding()).norm());
  return worst;
}

}  // namespace lrrap
