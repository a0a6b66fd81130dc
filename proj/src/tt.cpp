#include "lrrap/tt.hpp"

#include <cmath>
#include <numeric>
#include <random>
#include <string>

#include "contract.hpp"

namespace lrrap {

namespace {

void require(bool ok, const std::string& what) {
  if (!ok) throw ShapeError(what);
}

void check_same_dims(const TTVector& a, const TTVector& b, const char* op) {
  require(a.dims() == b.dims(), std::string(op) + ": mode sizes differ");
}

Index saturating_mul(Index a, Index b, Index cap) {
  if (a > cap / std::max<Index>(b, 1)) return cap;
  return std::min(a * b, cap);
}

}  // namespace

Core3::Core3(Index rl, Index n, Index rr) : rl_(rl), n_(n), rr_(rr), data_(static_cast<size_t>(rl * n * rr), 0.0) {
  require(rl >= 1 && n >= 1 && rr >= 1, "core dimensions must be positive");
}

void Core3::scale(double alpha) {
  for (double& v : data_) v *= alpha;
}

double Core3::squared_norm() const {
  double s = 0.0;
  for (double v : data_) s += v * v;
  return s;
}

Core4::Core4(Index rl, Index n, Index rr)
    : rl_(rl), n_(n), rr_(rr), data_(static_cast<size_t>(rl * n * n * rr), 0.0) {
  require(rl >= 1 && n >= 1 && rr >= 1, "operator core dimensions must be positive");
}

TTVector::TTVector(std::vector<Core3> cores, Orthogonality orth) : cores_(std::move(cores)), orth_(orth) {
  require(!cores_.empty(), "TTVector needs at least one core");
  require(cores_.front().left_rank() == 1, "first core must have left rank 1");
  require(cores_.back().right_rank() == 1, "last core must have right rank 1");
  for (size_t k = 0; k + 1 < cores_.size(); ++k)
    require(cores_[k].right_rank() == cores_[k + 1].left_rank(),
            "rank mismatch between cores " + std::to_string(k) + " and " + std::to_string(k + 1));
}

std::vector<Index> TTVector::dims() const {
  std::vector<Index> out;
  for (const auto& c : cores_) out.push_back(c.mode_size());
  return out;
}

std::vector<Index> TTVector::ranks() const {
  std::vector<Index> out{1};
  for (const auto& c : cores_) out.push_back(c.right_rank());
  return out;
}

Index TTVector::max_rank() const {
  auto r = ranks();
  return *std::max_element(r.begin(), r.end());
}

TTOperator::TTOperator(std::vector<Core4> cores) : cores_(std::move(cores)) {
  require(!cores_.empty(), "TTOperator needs at least one core");
  require(cores_.front().left_rank() == 1, "first operator core must have left rank 1");
  require(cores_.back().right_rank() == 1, "last operator core must have right rank 1");
  for (size_t k = 0; k + 1 < cores_.size(); ++k)
    require(cores_[k].right_rank() == cores_[k + 1].left_rank(), "operator rank mismatch");
}

std::vector<Index> TTOperator::dims() const {
  std::vector<Index> out;
  for (const auto& c : cores_) out.push_back(c.mode_size());
  return out;
}

std::vector<Index> TTOperator::ranks() const {
  std::vector<Index> out{1};
  for (const auto& c : cores_) out.push_back(c.right_rank());
  return out;
}

Index TTOperator::max_rank() const {
  auto r = ranks();
  return *std::max_element(r.begin(), r.end());
}

RowMatrix matricize_left(const Core3& core) { return core.left_unfolding(); }
RowMatrix matricize_right(const Core3& core) { return core.right_unfolding(); }

Core3 core_from_left(const RowMatrix& m, Index rl, Index n) {
  require(m.rows() == rl * n, "core_from_left: row count is not rl*n");
  Core3 c(rl, n, m.cols());
  c.left_unfolding() = m;
  return c;
}

Core3 core_from_right(const RowMatrix& m, Index n, Index rr) {
  require(m.cols() == n * rr, "core_from_right: column count is not n*rr");
  Core3 c(m.rows(), n, rr);
  c.right_unfolding() = m;
  return c;
}

TTVector orthogonalize_left(const TTVector& x) {
  std::vector<Core3> cores = x.cores();
  const int d = x.order();
  RowMatrix q, r;
  for (int k = 0; k + 1 < d; ++k) {
    const Index rl = cores[k].left_rank(), n = cores[k].mode_size();
    detail::thin_qr(cores[k].left_unfolding(), q, r);
    cores[k] = core_from_left(q, rl, n);
    const Core3& next = cores[k + 1];
    RowMatrix m = r * next.right_unfolding();
    cores[k + 1] = core_from_right(m, next.mode_size(), next.right_rank());
  }
  return TTVector(std::move(cores), Orthogonality::left);
}

TTVector orthogonalize_right(const TTVector& x) {
  std::vector<Core3> cores = x.cores();
  const int d = x.order();
  RowMatrix q, r;
  for (int k = d - 1; k > 0; --k) {
    const Index n = cores[k].mode_size(), rr = cores[k].right_rank();
    RowMatrix mt = cores[k].right_unfolding().transpose();
    detail::thin_qr(mt, q, r);
    cores[k] = core_from_right(q.transpose(), n, rr);
    const Core3& prev = cores[k - 1];
    RowMatrix m = prev.left_unfolding() * r.transpose();
    cores[k - 1] = core_from_left(m, prev.left_rank(), prev.mode_size());
  }
  return TTVector(std::move(cores), Orthogonality::right);
}

TTVector tt_zero(const std::vector<Index>& dims) {
  std::vector<Core3> cores;
  for (Index n : dims) cores.emplace_back(1, n, 1);
  return TTVector(std::move(cores));
}

TTVector tt_add(const TTVector& a, const TTVector& b) {
  check_same_dims(a, b, "tt_add");
  const int d = a.order();
  if (d == 1) {
    Core3 c(1, a.core(0).mode_size(), 1);
    for (Index i = 0; i < c.mode_size(); ++i) c(0, i, 0) = a.core(0)(0, i, 0) + b.core(0)(0, i, 0);
    return TTVector({c});
  }
  std::vector<Core3> cores;
  cores.reserve(d);
  for (int k = 0; k < d; ++k) {
    const Core3& A = a.core(k);
    const Core3& B = b.core(k);
    const Index n = A.mode_size();
    const bool first = k == 0, last = k == d - 1;
    const Index rl = first ? 1 : A.left_rank() + B.left_rank();
    const Index rr = last ? 1 : A.right_rank() + B.right_rank();
    Core3 c(rl, n, rr);
    // first: [A B]; interior: diag(A, B); last: [A; B]
    const Index boff_l = first ? 0 : A.left_rank();
    const Index boff_r = last ? 0 : A.right_rank();
    for (Index i = 0; i < n; ++i) {
      c.slice(i).block(0, 0, A.left_rank(), A.right_rank()) += A.slice(i);
      c.slice(i).block(boff_l, boff_r, B.left_rank(), B.right_rank()) += B.slice(i);
    }
    cores.push_back(std::move(c));
  }
  return TTVector(std::move(cores));
}

TTVector tt_scale(const TTVector& a, double alpha) {
  std::vector<Core3> cores = a.cores();
  cores.back().scale(alpha);
  return TTVector(std::move(cores), a.orthogonality() == Orthogonality::right ? Orthogonality::none
                                                                              : a.orthogonality());
}

double tt_inner(const TTVector& a, const TTVector& b) {
  check_same_dims(a, b, "tt_inner");
  RowMatrix e = RowMatrix::Ones(1, 1);
  for (int k = 0; k < a.order(); ++k) e = detail::env2_left_step(e, a.core(k), b.core(k));
  return e(0, 0);
}

double tt_norm(const TTVector& a) { return std::sqrt(std::max(0.0, tt_inner(a, a))); }

TTVector tt_round(const TTVector& a, Index max_rank, double rel_eps, RoundInfo* info) {
  require(max_rank >= 1, "tt_round: max rank must be at least 1");
  const int d = a.order();
  TTVector ro = orthogonalize_right(a);
  std::vector<Core3> cores = ro.cores();
  const double nrm = std::sqrt(cores[0].squared_norm());
  if (info) info->discarded.assign(d > 1 ? d - 1 : 0, 0.0);
  if (nrm == 0.0) return tt_zero(a.dims());
  const double delta = d > 1 ? rel_eps * nrm / std::sqrt(double(d - 1)) : 0.0;

  for (int k = 0; k + 1 < d; ++k) {
    const Index rl = cores[k].left_rank(), n = cores[k].mode_size();
    Matrix m = cores[k].left_unfolding();
    const detail::Svd svd = detail::thin_svd(m);
    const Vector& s = svd.s;
    Index keep = 0;
    const double floor = 1e-14 * (s.size() ? s(0) : 0.0);
    while (keep < s.size() && s(keep) > floor) ++keep;
    keep = std::min(keep, max_rank);
    if (delta > 0) {
      double tail = 0.0;
      Index t = keep;
      while (t > 1) {
        double add = s(t - 1) * s(t - 1);
        if (tail + add > delta * delta) break;
        tail += add;
        --t;
      }
      keep = t;
    }
    keep = std::max<Index>(keep, 1);
    if (info) info->discarded[k] = s.tail(s.size() - keep).squaredNorm();
    RowMatrix u = svd.u.leftCols(keep);
    RowMatrix sv = s.head(keep).asDiagonal() * svd.v.leftCols(keep).transpose();
    cores[k] = core_from_left(u, rl, n);
    const Core3& next = cores[k + 1];
    RowMatrix nm = sv * next.right_unfolding();
    cores[k + 1] = core_from_right(nm, next.mode_size(), next.right_rank());
  }
  return TTVector(std::move(cores), Orthogonality::left);
}

TTVector tt_matvec(const TTOperator& H, const TTVector& y) {
  require(H.dims() == y.dims(), "tt_matvec: operator and vector mode sizes differ");
  std::vector<Core3> cores;
  for (int k = 0; k < y.order(); ++k) {
    const Core4& h = H.core(k);
    const Core3& g = y.core(k);
    const Index R = h.left_rank(), R2 = h.right_rank(), r = g.left_rank(), r2 = g.right_rank();
    const Index n = g.mode_size();
    Core3 z(R * r, n, R2 * r2);
    for (Index i = 0; i < n; ++i) {
      auto zi = z.slice(i);
      for (Index j = 0; j < n; ++j) {
        auto gj = g.slice(j);
        for (Index a = 0; a < R; ++a)
          for (Index c = 0; c < R2; ++c) {
            const double hv = h(a, i, j, c);
            if (hv != 0.0) zi.block(a * r, c * r2, r, r2) += hv * gj;
          }
      }
    }
    cores.push_back(std::move(z));
  }
  return TTVector(std::move(cores));
}

double tt_bilinear(const TTVector& x, const TTOperator& H, const TTVector& y) {
  require(H.dims() == y.dims() && x.dims() == y.dims(), "tt_bilinear: mode sizes differ");
  RowMatrix L = RowMatrix::Ones(1, 1);
  for (int k = 0; k < x.order(); ++k) {
    RowMatrix hl = detail::op_left_layout(H.core(k));
    L = detail::env3_left_step(L, x.core(k), hl, y.core(k), H.core(k).left_rank());
  }
  return L(0, 0);
}

TTOperator rank1_operator(const std::vector<Matrix>& factors) {
  require(!factors.empty(), "rank1_operator: no factors");
  std::vector<Core4> cores;
  for (const Matrix& f : factors) {
    require(f.rows() == f.cols(), "rank1_operator: factor is not square");
    Core4 c(1, f.rows(), 1);
    for (Index i = 0; i < f.rows(); ++i)
      for (Index j = 0; j < f.cols(); ++j) c(0, i, j, 0) = f(i, j);
    cores.push_back(std::move(c));
  }
  return TTOperator(std::move(cores));
}

TTOperator identity_operator(const std::vector<Index>& dims) {
  std::vector<Matrix> f;
  for (Index n : dims) f.push_back(Matrix::Identity(n, n));
  return rank1_operator(f);
}

TTVector op_as_vector(const TTOperator& H) {
  std::vector<Core3> cores;
  for (const Core4& h : H.cores()) {
    const Index n = h.mode_size();
    Core3 c(h.left_rank(), n * n, h.right_rank());
    std::copy(h.data(), h.data() + h.size(), c.data());
    cores.push_back(std::move(c));
  }
  return TTVector(std::move(cores));
}

TTOperator vector_as_op(const TTVector& v) {
  std::vector<Core4> cores;
  for (const Core3& c : v.cores()) {
    const Index n = static_cast<Index>(std::llround(std::sqrt(double(c.mode_size()))));
    require(n * n == c.mode_size(), "vector_as_op: mode size is not a square");
    Core4 h(c.left_rank(), n, c.right_rank());
    std::copy(c.data(), c.data() + c.size(), h.data());
    cores.push_back(std::move(h));
  }
  return TTOperator(std::move(cores));
}

TTOperator op_add(const TTOperator& a, const TTOperator& b) {
  require(a.dims() == b.dims(), "op_add: mode sizes differ");
  return vector_as_op(tt_add(op_as_vector(a), op_as_vector(b)));
}

TTOperator op_scale(const TTOperator& a, double alpha) {
  return vector_as_op(tt_scale(op_as_vector(a), alpha));
}

TTOperator op_round(const TTOperator& a, double rel_eps, Index max_rank) {
  return vector_as_op(tt_round(op_as_vector(a), max_rank, rel_eps));
}

TTOperator op_compose(const TTOperator& a, const TTOperator& b) {
  require(a.dims() == b.dims(), "op_compose: mode sizes differ");
  std::vector<Core4> cores;
  for (int k = 0; k < a.order(); ++k) {
    const Core4& A = a.core(k);
    const Core4& B = b.core(k);
    const Index n = A.mode_size();
    const Index Ra = A.left_rank(), Ra2 = A.right_rank(), Rb = B.left_rank(), Rb2 = B.right_rank();
    Core4 c(Ra * Rb, n, Ra2 * Rb2);
    for (Index a1 = 0; a1 < Ra; ++a1)
      for (Index b1 = 0; b1 < Rb; ++b1)
        for (Index i = 0; i < n; ++i)
          for (Index j = 0; j < n; ++j)
            for (Index a2 = 0; a2 < Ra2; ++a2)
              for (Index b2 = 0; b2 < Rb2; ++b2) {
                double s = 0.0;
                for (Index m = 0; m < n; ++m) s += A(a1, i, m, a2) * B(b1, m, j, b2);
                c(a1 * Rb + b1, i, j, a2 * Rb2 + b2) = s;
              }
    cores.push_back(std::move(c));
  }
  return TTOperator(std::move(cores));
}

Vector tt_to_dense(const TTVector& x, const DenseCaps& caps) {
  Index total = 1;
  for (Index n : x.dims()) total = saturating_mul(total, n, caps.vector_cap + 1);
  if (total > caps.vector_cap)
    throw std::length_error("tt_to_dense: n^d exceeds the dense cap of " + std::to_string(caps.vector_cap));
  RowMatrix w = RowMatrix::Ones(1, 1);
  for (const Core3& c : x.cores()) {
    RowMatrix t = w * c.right_unfolding();
    w = ConstRowMap(t.data(), t.rows() * c.mode_size(), c.right_rank());
  }
  return Eigen::Map<const Vector>(w.data(), w.size());
}

Matrix op_to_dense(const TTOperator& H, const DenseCaps& caps) {
  const auto dims = H.dims();
  Index total = 1;
  for (Index n : dims) total = saturating_mul(total, n, caps.operator_cap + 1);
  if (total > caps.operator_cap)
    throw std::length_error("op_to_dense: n^d exceeds the dense cap of " + std::to_string(caps.operator_cap));
  DenseCaps vcaps;
  vcaps.vector_cap = total * total;
  Vector flat = tt_to_dense(op_as_vector(H), vcaps);
  // flat is indexed by (i1 j1)(i2 j2)...; unscramble into rows i, cols j.
  const int d = H.order();
  Matrix out(total, total);
  std::vector<Index> idx(d, 0);
  for (Index p = 0; p < flat.size(); ++p) {
    Index rem = p, row = 0, col = 0;
    for (int k = d - 1; k >= 0; --k) {
      const Index n = dims[k];
      idx[k] = rem % (n * n);
      rem /= n * n;
    }
    for (int k = 0; k < d; ++k) {
      row = row * dims[k] + idx[k] / dims[k];
      col = col * dims[k] + idx[k] % dims[k];
    }
    out(row, col) = flat(p);
  }
  return out;
}

TTVector tt_from_dense(const Vector& v, const std::vector<Index>& dims, double eps) {
  require(!dims.empty(), "tt_from_dense: empty dims");
  Index total = 1;
  for (Index n : dims) total *= n;
  require(total == v.size(), "tt_from_dense: length does not match the product of dims");
  const int d = static_cast<int>(dims.size());
  const double nrm = v.norm();
  if (nrm == 0.0) return tt_zero(dims);
  const double delta = d > 1 ? eps * nrm / std::sqrt(double(d - 1)) : 0.0;
  std::vector<Core3> cores;
  RowMatrix rest = ConstRowMap(v.data(), 1, total);
  Index rl = 1;
  for (int k = 0; k + 1 < d; ++k) {
    const Index n = dims[k];
    const Index cols = rest.size() / (rl * n);
    Matrix m = ConstRowMap(rest.data(), rl * n, cols);
    const detail::Svd svd = detail::thin_svd(m);
    const Vector& s = svd.s;
    Index keep = 0;
    while (keep < s.size() && s(keep) > 1e-14 * s(0)) ++keep;
    double tail = 0.0;
    while (keep > 1 && tail + s(keep - 1) * s(keep - 1) <= delta * delta) {
      tail += s(keep - 1) * s(keep - 1);
      --keep;
    }
    keep = std::max<Index>(keep, 1);
    cores.push_back(core_from_left(RowMatrix(svd.u.leftCols(keep)), rl, n));
    rest = s.head(keep).asDiagonal() * svd.v.leftCols(keep).transpose();
    rl = keep;
  }
  cores.push_back(core_from_right(rest, dims.back(), 1));
  return TTVector(std::move(cores), Orthogonality::left);
}

TTVector tt_random(const std::vector<Index>& dims, Index rank, std::uint64_t seed) {
  require(rank >= 1, "tt_random: rank must be at least 1");
  require(!dims.empty(), "tt_random: empty dims");
  const int d = static_cast<int>(dims.size());
  std::vector<Index> r(d + 1, 1);
  for (int k = 1; k < d; ++k) {
    Index left = 1, right = 1;
    for (int i = 0; i < k; ++i) left = saturating_mul(left, dims[i], rank);
    for (int i = k; i < d; ++i) right = saturating_mul(right, dims[i], rank);
    r[k] = std::min({rank, left, right});
  }
  std::mt19937_64 gen(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<Core3> cores;
  for (int k = 0; k < d; ++k) {
    Core3 c(r[k], dims[k], r[k + 1]);
    for (Index p = 0; p < c.size(); ++p) c.data()[p] = normal(gen) / std::sqrt(double(r[k]));
    cores.push_back(std::move(c));
  }
  TTVector x(std::move(cores));
  const double nrm = tt_norm(x);
  return tt_scale(x, 1.0 / nrm);
}

}  // namespace lrrap
