#include <doctest.h>

#include <random>

#include "lrrap/models.hpp"
#include "lrrap/oracle.hpp"
#include "lrrap/tangent.hpp"
#include "support.hpp"

using namespace lrrap;

namespace {

// Projector onto span{d x / d G_k(a,i,c)}: every column is the dense
// expansion of x with one core replaced by a unit entry.
Matrix jacobian_projector(const TTVector& x, Index* rank = nullptr) {
  std::vector<Vector> cols;
  for (int k = 0; k < x.order(); ++k) {
    const Index sz = x.core(k).size();
    for (Index e = 0; e < sz; ++e) {
      auto cores = x.cores();
      Core3 unit(cores[k].left_rank(), cores[k].mode_size(), cores[k].right_rank());
      unit.data()[e] = 1.0;
      cores[k] = unit;
      cols.push_back(support::naive_dense(TTVector(cores)));
    }
  }
  Matrix J(cols[0].size(), Index(cols.size()));
  for (size_t j = 0; j < cols.size(); ++j) J.col(Index(j)) = cols[j];
  Eigen::JacobiSVD<Matrix> svd(J, Eigen::ComputeThinU);
  const auto& s = svd.singularValues();
  Index r = 0;
  while (r < s.size() && s(r) > 1e-10 * s(0)) ++r;
  if (rank) *rank = r;
  const Matrix Q = svd.matrixU().leftCols(r);
  return Q * Q.transpose();
}

TangentVector random_tangent(const BasePtr& base, std::mt19937_64& rng) {
  const Index r = 3;
  auto z = support::random_tt(base->dims(), support::feasible_ranks(base->dims(), r), rng);
  return project(base, z);
}

double rel(const Vector& a, const Vector& b) { return (a - b).norm() / std::max(1e-300, b.norm()); }

}  // namespace

TEST_CASE("prepare_base frames") {
  std::mt19937_64 rng(1);
  auto x = support::random_tt({2, 3, 2, 3}, {1, 2, 3, 2, 1}, rng);
  auto base = prepare_base(x);
  const Vector dx = support::naive_dense(x);
  CHECK(rel(support::naive_dense(base->left_frame()), dx) < 1e-12);
  CHECK(rel(support::naive_dense(base->right_frame()), dx) < 1e-12);
  auto again = prepare_base(x);
  for (int k = 0; k < x.order(); ++k) {
    CHECK(again->left_frame().core(k) == base->left_frame().core(k));
    CHECK(again->right_frame().core(k) == base->right_frame().core(k));
  }

  std::vector<Core3> c1;
  for (Index n : {2, 2, 2}) {
    Core3 g(1, n, 1);
    g(0, 0, 0) = 3.0;
    g(0, 1, 0) = 4.0;
    c1.push_back(g);
  }
  auto b1 = prepare_base(TTVector(c1));
  for (int k = 0; k < 2; ++k) {
    Matrix m = matricize_left(b1->left_frame().core(k));
    CHECK((m.transpose() * m)(0, 0) == doctest::Approx(1.0).epsilon(1e-14));
  }
  for (int k = 1; k < 3; ++k) {
    Matrix m = matricize_right(b1->right_frame().core(k));
    CHECK((m * m.transpose())(0, 0) == doctest::Approx(1.0).epsilon(1e-14));
  }
}

TEST_CASE("projection against the Jacobian oracle") {
  std::mt19937_64 rng(2);
  auto x = support::random_tt({2, 2, 2}, {1, 2, 2, 1}, rng);
  auto base = prepare_base(x);
  Index rank = 0;
  const Matrix P = jacobian_projector(x, &rank);
  // (d-2) n r^2 + 2 n r - (d-1) r^2 with d = 3, n = 2, r = 2.
  const Index formula = (3 - 2) * 2 * 4 + 2 * 2 * 2 - (3 - 1) * 4;
  CHECK(formula == 8);
  CHECK(rank == formula);
  CHECK(tangent_dimension({2, 2, 2}, {1, 2, 2, 1}) == formula);
  for (int trial = 0; trial < 5; ++trial) {
    auto z = support::random_tt({2, 2, 2}, {1, 2, 2, 1}, rng);
    const Vector pz = support::naive_dense(embed(project(base, z)));
    CHECK(rel(pz, P * support::naive_dense(z)) < 1e-10);
  }
  // The library's own oracle agrees with this one.
  CHECK((dense_tangent_projector(x) - P).norm() < 1e-8);
}

TEST_CASE("projection identities") {
  std::mt19937_64 rng(3);
  auto x = support::random_tt({2, 3, 2, 2}, {1, 2, 3, 2, 1}, rng);
  auto base = prepare_base(x);
  auto z = support::random_tt(x.dims(), {1, 2, 2, 2, 1}, rng);
  auto pz = project(base, z);

  CHECK(rel(support::naive_dense(embed(project(base, x))), support::naive_dense(x)) < 1e-12);
  CHECK(rel(support::naive_dense(embed(project(base, embed(pz)))), support::naive_dense(embed(pz))) < 1e-10);
  CHECK(gauge_residual(pz) <= 1e-10);
  CHECK(tt_norm(embed(pz)) <= tt_norm(z) * (1 + 1e-10));

  auto w = random_tangent(base, rng);
  const double lhs = tt_inner(embed(pz), embed(w));
  const double rhs = tt_inner(z, embed(project(base, embed(w))));
  CHECK(lhs == doctest::Approx(rhs).epsilon(1e-10));

  CHECK_THROWS(project(base, support::random_tt({2, 2, 2, 2}, {1, 1, 1, 1, 1}, rng)));
}

TEST_CASE("project_matvec") {
  std::mt19937_64 rng(4);
  auto x = support::random_tt({2, 2, 3, 2}, {1, 2, 3, 2, 1}, rng);
  auto y = support::random_tt(x.dims(), {1, 2, 2, 2, 1}, rng);
  auto base = prepare_base(x);

  auto I = identity_operator(x.dims());
  CHECK(rel(support::naive_dense(embed(project_matvec(base, I, y))), support::naive_dense(embed(project(base, y)))) <
        1e-12);

  auto H = support::random_op(x.dims(), {1, 2, 3, 2, 1}, rng);
  auto fused = embed(project_matvec(base, H, y, MatvecPath::fused));
  auto naive = embed(project_matvec(base, H, y, MatvecPath::naive));
  CHECK(rel(support::naive_dense(fused), support::naive_dense(naive)) < 1e-10);
  CHECK(rel(support::naive_dense(fused), support::naive_dense(embed(project(base, tt_matvec(H, y))))) < 1e-10);

  auto x3 = support::random_tt({2, 2, 2}, {1, 2, 2, 1}, rng);
  auto b3 = prepare_base(x3);
  const Matrix H3 = support::heisenberg_dense(3);
  const Vector expect = jacobian_projector(x3) * (H3 * support::naive_dense(x3));
  CHECK(rel(support::naive_dense(embed(project_matvec(b3, heisenberg_mpo(3), x3))), expect) < 1e-10);
}

TEST_CASE("embed, axpy and tangent_inner") {
  std::mt19937_64 rng(5);
  auto x = support::random_tt({2, 3, 3, 2}, {1, 2, 3, 2, 1}, rng);
  auto base = prepare_base(x);
  const Index r = base->point().max_rank();

  CHECK(tt_norm(embed(tangent_zero(base))) == 0.0);

  auto t1 = random_tangent(base, rng);
  auto t2 = random_tangent(base, rng);
  auto e1 = embed(t1);
  CHECK(e1.max_rank() <= 2 * r);

  // Term-by-term sum U_1..U_{k-1} dG_k V_{k+1}..V_d.
  Vector terms = Vector::Zero(support::naive_dense(x).size());
  for (int k = 0; k < x.order(); ++k) {
    std::vector<Core3> cores;
    for (int j = 0; j < x.order(); ++j)
      cores.push_back(j < k ? base->left_frame().core(j) : j == k ? t1.delta(k) : base->right_frame().core(j));
    terms += support::naive_dense(TTVector(cores));
  }
  CHECK(rel(support::naive_dense(e1), terms) < 1e-12);

  auto a = axpy(1.5, t1, -0.5, t2);
  CHECK(rel(support::naive_dense(embed(a)), 1.5 * support::naive_dense(e1) - 0.5 * support::naive_dense(embed(t2))) <
        1e-12);
  CHECK(rel(support::naive_dense(embed(axpy(1.0, t1, 0.0, t2))), support::naive_dense(e1)) < 1e-15);
  CHECK(tt_norm(embed(axpy(1.0, t1, -1.0, t1))) == 0.0);
  CHECK(gauge_residual(a) <= 1e-10);

  double sq = 0.0;
  for (int k = 0; k < x.order(); ++k) sq += t1.delta(k).squared_norm();
  CHECK(tangent_inner(t1, t1) == doctest::Approx(sq).epsilon(1e-14));
  CHECK(tangent_inner(t1, t2) == doctest::Approx(tt_inner(e1, embed(t2))).epsilon(1e-10));
  CHECK(tangent_inner(t1, tangent_zero(base)) == 0.0);

  Vector w(2);
  w << 2.0, -3.0;
  CHECK(rel(support::naive_dense(embed(combine({t1, t2}, w))), support::naive_dense(embed(axpy(2.0, t1, -3.0, t2)))) <
        1e-14);

  auto other = prepare_base(x);
  auto t3 = project(other, x);
  CHECK_THROWS_AS(axpy(1.0, t1, 1.0, t3), BaseMismatch);
  CHECK_THROWS_AS(tangent_inner(t1, t3), BaseMismatch);
}

TEST_CASE("regauge removes accumulated gauge error") {
  std::mt19937_64 rng(6);
  auto x = support::random_tt({2, 3, 2}, {1, 2, 2, 1}, rng);
  auto base = prepare_base(x);
  auto t = random_tangent(base, rng);
  auto cores = t.delta();
  cores[0] = base->left_frame().core(0);
  TangentVector off(base, cores);
  CHECK(gauge_residual(off) > 0.1);
  auto fixed = regauge(off);
  CHECK(gauge_residual(fixed) <= 1e-12);
  CHECK(rel(support::naive_dense(embed(regauge(t))), support::naive_dense(embed(t))) < 1e-12);
}

TEST_CASE("random geometry instances") {
  // A smaller version of the acceptance sweep, kept here for quick feedback.
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 10; ++trial) {
    const int d = 2 + int(rng() % 3);
    const Index n = 2 + Index(rng() % 2);
    const Index r = 1 + Index(rng() % 3);
    std::vector<Index> dims(d, n);
    auto ranks = support::feasible_ranks(dims, r);
    auto x = support::random_tt(dims, ranks, rng);
    auto base = prepare_base(x);
    Index jr = 0;
    const Matrix P = jacobian_projector(x, &jr);
    CHECK(jr == tangent_dimension(dims, base->ranks()));
    auto z = support::random_tt(dims, ranks, rng);
    CHECK(rel(support::naive_dense(embed(project(base, z))), P * support::naive_dense(z)) < 1e-9);
  }
}
