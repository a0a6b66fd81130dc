#include <doctest.h>

#include <cmath>
#include <random>

#include "lrrap/coeff.hpp"
#include "support.hpp"

using namespace lrrap;

namespace {

// Gram data of explicit dense vectors: X (N x b), V (N x 3b), symmetric H.
struct DenseInstance {
  Matrix X, V, H;
  GramSet g;
};

DenseInstance make_instance(Index b, Index N, std::mt19937_64& rng, bool orthonormal = false) {
  std::normal_distribution<double> nd;
  DenseInstance in;
  Matrix A(N, N);
  for (Index i = 0; i < A.size(); ++i) A.data()[i] = nd(rng);
  in.H = 0.5 * (A + A.transpose());
  Matrix XV(N, 4 * b);
  for (Index i = 0; i < XV.size(); ++i) XV.data()[i] = nd(rng);
  if (orthonormal) {
    Eigen::HouseholderQR<Matrix> qr(XV);
    XV = qr.householderQ() * Matrix::Identity(N, 4 * b);
  } else {
    for (Index j = 0; j < b; ++j) XV.col(j).normalize();
  }
  in.X = XV.leftCols(b);
  in.V = XV.rightCols(3 * b);
  in.g.VtV = in.V.transpose() * in.V;
  in.g.VtHV = in.V.transpose() * in.H * in.V;
  in.g.XtX = in.X.transpose() * in.X;
  in.g.VtX = in.V.transpose() * in.X;
  in.g.VtHX = in.V.transpose() * in.H * in.X;
  in.g.diagXtHX = (in.X.transpose() * in.H * in.X).diagonal();
  return in;
}

Matrix updated_block(const DenseInstance& in, const Coefficients& co) { return in.X * co.c.asDiagonal() + in.V * co.C; }

// Smallest eigenvalue of the pencil (A, G) with G SPD, via Cholesky and Jacobi.
double pencil_min(const Matrix& A, const Matrix& G) {
  Eigen::LLT<Matrix> llt(G);
  const Matrix Li = llt.matrixL().solve(Matrix::Identity(G.rows(), G.cols()));
  const Matrix S = Li * A * Li.transpose();
  return support::jacobi_eigenvalues(0.5 * (S + S.transpose()))(0);
}

}  // namespace

TEST_CASE("block_rayleigh_ritz") {
  Matrix A = Vector::LinSpaced(6, 1, 6).asDiagonal();
  Vector theta;
  Matrix C = block_rayleigh_ritz(A, Matrix::Identity(6, 6), 2, 1e-10, &theta);
  CHECK(theta(0) == doctest::Approx(1.0));
  CHECK(theta(1) == doctest::Approx(2.0));
  CHECK(std::abs(C(0, 0)) == doctest::Approx(1.0));
  CHECK(std::abs(C(1, 1)) == doctest::Approx(1.0));
  CHECK(C.bottomRows(4).norm() < 1e-14);

  std::mt19937_64 rng(1);
  auto in = make_instance(2, 20, rng);
  Matrix C2 = block_rayleigh_ritz(in.g.VtHV, in.g.VtV, 2, 1e-10, &theta);
  CHECK((in.g.VtHV * C2 - in.g.VtV * C2 * theta.head(2).asDiagonal()).norm() < 1e-9);
  CHECK((C2.transpose() * in.g.VtV * C2 - Matrix::Identity(2, 2)).norm() < 1e-10);

  // Duplicate a column of V: one null direction of VtV.
  Matrix V = in.V;
  V.col(5) = V.col(4);
  Matrix VtV = V.transpose() * V, VtHV = V.transpose() * in.H * V;
  Matrix C3 = block_rayleigh_ritz(VtHV, VtV, 2, 1e-10, &theta);
  CHECK((C3.transpose() * VtV * C3 - Matrix::Identity(2, 2)).norm() < 1e-8);
  CHECK(theta(0) == doctest::Approx(pencil_min(in.V.leftCols(5).transpose() * in.H * in.V.leftCols(5),
                                               in.V.leftCols(5).transpose() * in.V.leftCols(5)))
                        .epsilon(1e-8));

  CHECK_THROWS(block_rayleigh_ritz(Matrix::Zero(3, 3), Matrix::Zero(3, 3), 2));
}

TEST_CASE("nullspace_basis") {
  const Index m = 7;
  auto Q0 = nullspace_basis(Matrix::Zero(m, 1));
  CHECK(Q0.cols() == m);
  CHECK((Q0.transpose() * Q0 - Matrix::Identity(m, m)).norm() < 1e-12);

  std::mt19937_64 rng(2);
  Matrix S = Matrix::Random(m, 3);
  Eigen::HouseholderQR<Matrix> qr(S);
  S = qr.householderQ() * Matrix::Identity(m, 3);
  auto Q = nullspace_basis(S);
  CHECK(Q.cols() == m - 3);
  CHECK((S.transpose() * Q).norm() < 1e-12);
  CHECK((Q.transpose() * Q - Matrix::Identity(Q.cols(), Q.cols())).norm() < 1e-12);

  Matrix D(m, 3);
  D << S.col(0), S.col(1), S.col(1);
  auto Qd = nullspace_basis(D);
  CHECK(Qd.cols() == m - 2);
  CHECK((D.transpose() * Qd).norm() < 1e-10 * D.norm());
}

TEST_CASE("solve_reduced_geig") {
  Matrix A = Vector(Eigen::Vector3d(3, 1, 2)).asDiagonal();
  auto r = solve_reduced_geig(A, Matrix::Identity(3, 3));
  CHECK(r.lambda == doctest::Approx(1.0));
  CHECK(std::abs(r.z(1)) == doctest::Approx(1.0));
  CHECK(std::abs(r.z(0)) < 1e-14);

  // 2x2 pencil against the roots of det(A - lambda G) = 0.
  Matrix A2(2, 2), G2(2, 2);
  A2 << 2, 1, 1, -1;
  G2 << 2, 0.5, 0.5, 1;
  const double qa = G2.determinant();
  const double qb = -(A2(0, 0) * G2(1, 1) + A2(1, 1) * G2(0, 0) - 2 * A2(0, 1) * G2(0, 1));
  const double qc = A2.determinant();
  const double root = (-qb - std::sqrt(qb * qb - 4 * qa * qc)) / (2 * qa);
  auto r2 = solve_reduced_geig(A2, G2);
  CHECK(r2.lambda == doctest::Approx(root).epsilon(1e-12));
  CHECK(r2.z.dot(G2 * r2.z) == doctest::Approx(1.0).epsilon(1e-12));

  Matrix Gd = Vector(Eigen::Vector2d(1, 1e-18)).asDiagonal();
  Matrix Ad(2, 2);
  Ad << 1, 0, 0, -5;
  auto rd = solve_reduced_geig(Ad, Gd);
  CHECK(std::isfinite(rd.lambda));
  CHECK(rd.lambda == doctest::Approx(1.0));

  CHECK_THROWS(solve_reduced_geig(Ad, Matrix::Zero(2, 2)));
}

TEST_CASE("find_coefficients at b=1 is a pencil problem") {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 5; ++trial) {
    auto in = make_instance(1, 12, rng);
    auto res = find_coefficients(in.g);
    Matrix W(12, 4);
    W << in.X, in.V;
    const double expect = pencil_min(W.transpose() * in.H * W, W.transpose() * W);
    CHECK(res.trace == doctest::Approx(expect).epsilon(1e-10));
    CHECK(res.constraint_residual <= 1e-8);
    CHECK(kkt_residual(in.g, res.coeffs) < 1e-10);
  }
}

TEST_CASE("find_coefficients on random blocks") {
  std::mt19937_64 rng(4);
  for (Index b : {2, 4, 8}) {
    auto in = make_instance(b, 40, rng);
    auto res = find_coefficients(in.g);
    const Matrix Y = updated_block(in, res.coeffs);
    CHECK((Y.transpose() * Y - Matrix::Identity(b, b)).norm() <= 1e-8);
    CHECK(res.constraint_residual == doctest::Approx((Y.transpose() * Y - Matrix::Identity(b, b)).norm()).epsilon(1e-6));
    CHECK(res.trace == doctest::Approx((Y.transpose() * in.H * Y).trace()).epsilon(1e-10));
    CHECK(res.trace <= res.init_trace + 1e-12);
    CHECK(res.kkt_residual <= 1e-6);
  }
  SUBCASE("orthonormal data, three sweeps") {
    auto in = make_instance(2, 30, rng, true);
    CoeffOptions o;
    o.polish = false;
    o.sweeps = 3;
    auto res = find_coefficients(in.g, nullptr, o);
    CHECK(res.constraint_residual < 1e-10);
  }
}

TEST_CASE("kkt_residual") {
  std::mt19937_64 rng(5);
  auto in = make_instance(3, 25, rng);
  Coefficients zero{Vector::Zero(3), Matrix::Zero(9, 3)};
  CHECK(kkt_residual(in.g, zero) == doctest::Approx(std::sqrt(3.0)));
  CHECK(constraint_residual(in.g, zero) == doctest::Approx(std::sqrt(3.0)));

  std::normal_distribution<double> nd;
  Coefficients rnd{Vector::Zero(3), Matrix::Zero(9, 3)};
  for (Index i = 0; i < 3; ++i) rnd.c(i) = nd(rng);
  for (Index i = 0; i < rnd.C.size(); ++i) rnd.C.data()[i] = nd(rng);
  CHECK(kkt_residual(in.g, rnd) > 0.1);
  CHECK(coefficient_trace(in.g, rnd) ==
        doctest::Approx((updated_block(in, rnd).transpose() * in.H * updated_block(in, rnd)).trace()).epsilon(1e-10));
}

TEST_CASE("GramSet validation") {
  std::mt19937_64 rng(6);
  auto in = make_instance(2, 15, rng);
  CHECK_NOTHROW(in.g.validate());
  in.g.VtX = Matrix::Zero(5, 2);
  CHECK_THROWS_AS(in.g.validate(), ShapeError);
}
