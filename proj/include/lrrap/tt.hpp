// Tensor-train vectors and operators (MPS / MPO).
#pragma once

#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

namespace lrrap {

using Index = Eigen::Index;
using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using RowMap = Eigen::Map<RowMatrix>;
using ConstRowMap = Eigen::Map<const RowMatrix>;
using SliceMap = Eigen::Map<RowMatrix, 0, Eigen::OuterStride<>>;
using ConstSliceMap = Eigen::Map<const RowMatrix, 0, Eigen::OuterStride<>>;

class ShapeError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Three-way core r_l x n x r_r stored row-major in (left, mode, right) order,
// so both unfoldings are plain reshapes of the same buffer.
class Core3 {
 public:
  Core3() = default;
  Core3(Index rl, Index n, Index rr);

  Index left_rank() const { return rl_; }
  Index mode_size() const { return n_; }
  Index right_rank() const { return rr_; }
  Index size() const { return rl_ * n_ * rr_; }

  double& operator()(Index a, Index i, Index c) { return data_[(a * n_ + i) * rr_ + c]; }
  double operator()(Index a, Index i, Index c) const { return data_[(a * n_ + i) * rr_ + c]; }

  double* data() { return data_.data(); }
  const double* data() const { return data_.data(); }

  // (r_l n) x r_r
  RowMap left_unfolding() { return RowMap(data(), rl_ * n_, rr_); }
  ConstRowMap left_unfolding() const { return ConstRowMap(data(), rl_ * n_, rr_); }
  // r_l x (n r_r)
  RowMap right_unfolding() { return RowMap(data(), rl_, n_ * rr_); }
  ConstRowMap right_unfolding() const { return ConstRowMap(data(), rl_, n_ * rr_); }
  // G(i), r_l x r_r
  SliceMap slice(Index i) {
    return SliceMap(data() + i * rr_, rl_, rr_, Eigen::OuterStride<>(n_ * rr_));
  }
  ConstSliceMap slice(Index i) const {
    return ConstSliceMap(data() + i * rr_, rl_, rr_, Eigen::OuterStride<>(n_ * rr_));
  }

  void scale(double alpha);
  double squared_norm() const;

  friend bool operator==(const Core3&, const Core3&) = default;

 private:
  Index rl_ = 0, n_ = 0, rr_ = 0;
  std::vector<double> data_;
};

// Four-way operator core R_l x n x n x R_r, row-major (left, row, col, right).
class Core4 {
 public:
  Core4() = default;
  Core4(Index rl, Index n, Index rr);

  Index left_rank() const { return rl_; }
  Index mode_size() const { return n_; }
  Index right_rank() const { return rr_; }
  Index size() const { return rl_ * n_ * n_ * rr_; }

  double& operator()(Index a, Index i, Index j, Index c) {
    return data_[((a * n_ + i) * n_ + j) * rr_ + c];
  }
  double operator()(Index a, Index i, Index j, Index c) const {
    return data_[((a * n_ + i) * n_ + j) * rr_ + c];
  }
  double* data() { return data_.data(); }
  const double* data() const { return data_.data(); }

  // H(i, j), R_l x R_r
  ConstSliceMap slice(Index i, Index j) const {
    return ConstSliceMap(data() + (i * n_ + j) * rr_, rl_, rr_, Eigen::OuterStride<>(n_ * n_ * rr_));
  }

  friend bool operator==(const Core4&, const Core4&) = default;

 private:
  Index rl_ = 0, n_ = 0, rr_ = 0;
  std::vector<double> data_;
};

enum class Orthogonality { none, left, right };

class TTVector {
 public:
  TTVector() = default;
  // Validates rank compatibility and boundary ranks.
  explicit TTVector(std::vector<Core3> cores, Orthogonality orth = Orthogonality::none);

  int order() const { return static_cast<int>(cores_.size()); }
  const Core3& core(int k) const { return cores_[k]; }
  const std::vector<Core3>& cores() const { return cores_; }
  Orthogonality orthogonality() const { return orth_; }

  std::vector<Index> dims() const;
  // d+1 entries including the two boundary ones.
  std::vector<Index> ranks() const;
  Index max_rank() const;

 private:
  std::vector<Core3> cores_;
  Orthogonality orth_ = Orthogonality::none;
};

class TTOperator {
 public:
  TTOperator() = default;
  explicit TTOperator(std::vector<Core4> cores);

  int order() const { return static_cast<int>(cores_.size()); }
  const Core4& core(int k) const { return cores_[k]; }
  const std::vector<Core4>& cores() const { return cores_; }

  std::vector<Index> dims() const;
  std::vector<Index> ranks() const;
  Index max_rank() const;

 private:
  std::vector<Core4> cores_;
};

// Unfoldings as owning copies plus the inverse reshapes.
RowMatrix matricize_left(const Core3& core);
RowMatrix matricize_right(const Core3& core);
Core3 core_from_left(const RowMatrix& m, Index rl, Index n);
Core3 core_from_right(const RowMatrix& m, Index n, Index rr);

TTVector orthogonalize_left(const TTVector& x);
TTVector orthogonalize_right(const TTVector& x);

TTVector tt_add(const TTVector& a, const TTVector& b);
TTVector tt_scale(const TTVector& a, double alpha);
double tt_inner(const TTVector& a, const TTVector& b);
double tt_norm(const TTVector& a);
TTVector tt_zero(const std::vector<Index>& dims);

struct RoundInfo {
  // Squared singular values dropped at each of the d-1 cuts.
  std::vector<double> discarded;
};

// TT-SVD retraction: right-orthogonalize, then a left-to-right SVD sweep.
// Singular values at or below 1e-14 * sigma_max of an unfolding are always
// dropped; rel_eps > 0 additionally truncates to a relative Frobenius error.
// The result is left-orthogonal.
TTVector tt_round(const TTVector& a, Index max_rank, double rel_eps = 0.0, RoundInfo* info = nullptr);

TTVector tt_matvec(const TTOperator& H, const TTVector& y);
// <x, H y> without forming H y.
double tt_bilinear(const TTVector& x, const TTOperator& H, const TTVector& y);

TTOperator rank1_operator(const std::vector<Matrix>& factors);
TTOperator identity_operator(const std::vector<Index>& dims);
TTOperator op_add(const TTOperator& a, const TTOperator& b);
TTOperator op_scale(const TTOperator& a, double alpha);
// Core-wise product A*B, ranks multiply.
TTOperator op_compose(const TTOperator& a, const TTOperator& b);
TTOperator op_round(const TTOperator& a, double rel_eps, Index max_rank = 1 << 20);

// An operator viewed as a TT vector with mode sizes n_k^2 (same buffer layout).
TTVector op_as_vector(const TTOperator& H);
TTOperator vector_as_op(const TTVector& v);

struct DenseCaps {
  Index vector_cap = Index(1) << 20;
  Index operator_cap = Index(1) << 14;
};

Vector tt_to_dense(const TTVector& x, const DenseCaps& caps = {});
Matrix op_to_dense(const TTOperator& H, const DenseCaps& caps = {});
TTVector tt_from_dense(const Vector& v, const std::vector<Index>& dims, double eps);

// Seeded standard normal cores, normalized to unit norm.
TTVector tt_random(const std::vector<Index>& dims, Index rank, std::uint64_t seed);

}  // namespace lrrap
