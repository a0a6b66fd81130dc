#include <doctest.h>

#include <cmath>
#include <random>

#include "lrrap/models.hpp"
#include "lrrap/oracle.hpp"
#include "support.hpp"

using namespace lrrap;

namespace {

// Characteristic polynomial coefficients by the Faddeev-LeVerrier recursion.
std::vector<double> char_poly(const Matrix& A) {
  const Index n = A.rows();
  std::vector<double> c(n + 1, 0.0);
  c[n] = 1.0;
  Matrix M = Matrix::Zero(n, n);
  for (Index k = 1; k <= n; ++k) {
    M = A * M + c[n - k + 1] * Matrix::Identity(n, n);
    c[n - k] = -(A * M).trace() / double(k);
  }
  return c;
}

double poly_eval(const std::vector<double>& c, double x) {
  double v = 0.0;
  for (size_t i = c.size(); i-- > 0;) v = v * x + c[i];
  return v;
}

}  // namespace

TEST_CASE("dense_eigs") {
  Matrix a(2, 2);
  a << 0, 1, 1, 0;
  auto e = dense_eigs(a);
  CHECK(e.values(0) == doctest::Approx(-1.0));
  CHECK(e.values(1) == doctest::Approx(1.0));

  std::mt19937_64 rng(1);
  std::normal_distribution<double> nd;
  Matrix r(5, 5);
  for (Index i = 0; i < 25; ++i) r.data()[i] = nd(rng);
  Matrix s = 0.5 * (r + r.transpose());
  auto es = dense_eigs(s);
  const auto cp = char_poly(s);
  for (Index i = 0; i < 5; ++i) {
    // Each eigenvalue is a root: refine by one Newton step and compare.
    const double x = es.values(i), h = 1e-6;
    const double f = poly_eval(cp, x), df = (poly_eval(cp, x + h) - poly_eval(cp, x - h)) / (2 * h);
    CHECK(std::abs(f / df) < 1e-9);
  }
  CHECK((es.values - support::jacobi_eigenvalues(s)).cwiseAbs().maxCoeff() < 1e-12);
  for (Index i = 0; i < 5; ++i) {
    CHECK((s * es.vectors.col(i) - es.values(i) * es.vectors.col(i)).norm() <= 1e-9 * s.norm());
    if (i > 0) CHECK(es.values(i - 1) <= es.values(i));
  }
  CHECK((es.vectors.transpose() * es.vectors - Matrix::Identity(5, 5)).norm() < 1e-10);

  auto h2 = dense_eigs(op_to_dense(heisenberg_mpo(2)));
  CHECK(h2.values(0) == doctest::Approx(-0.75));
  CHECK(h2.values(3) == doctest::Approx(0.25));

  auto few = dense_eigs(s, 2);
  CHECK(few.values.size() == 2);
  CHECK(few.vectors.cols() == 2);

  Matrix asym = s;
  asym(0, 1) += 1.0;
  CHECK_THROWS(dense_eigs(asym));
  OracleCaps caps;
  caps.max_dim = 4;
  CHECK_THROWS(dense_eigs(s, 0, caps));
}

TEST_CASE("mae") {
  Vector a(3), b(3);
  a << 1, 2, 4;
  b << 1, 2, 3;
  CHECK(mae(a, a) == 0.0);
  CHECK(mae(b.array() + 0.1, b) == doctest::Approx(0.1));
  CHECK(mae(a, b) == doctest::Approx(1.0 / 3.0));
  CHECK_THROWS(mae(a, Vector::Zero(2)));
}

TEST_CASE("dense_tangent_projector") {
  std::mt19937_64 rng(2);
  auto x = support::random_tt({2, 2, 2}, {1, 2, 2, 1}, rng);
  const Matrix P = dense_tangent_projector(x);
  CHECK((P * P - P).norm() < 1e-10);
  CHECK((P - P.transpose()).norm() < 1e-10);
  CHECK(support::numerical_rank(P) == (3 - 2) * 2 * 4 + 2 * 2 * 2 - (3 - 1) * 4);
  const Vector xd = support::naive_dense(x);
  CHECK((P * xd - xd).norm() < 1e-10 * xd.norm());
  CHECK_THROWS(dense_tangent_projector(tt_random(std::vector<Index>(9, 2), 1, 1)));
}

TEST_CASE("tangent_dimension") {
  // (d-2) n r^2 + 2 n r - (d-1) r^2 for uniform ranks.
  for (int d = 2; d <= 6; ++d)
    for (Index n : {2, 3})
      for (Index r : {1, 2}) {
        std::vector<Index> ranks(d + 1, r);
        ranks.front() = ranks.back() = 1;
        CHECK(tangent_dimension(std::vector<Index>(d, n), ranks) == (d - 2) * n * r * r + 2 * n * r - (d - 1) * r * r);
      }
}
