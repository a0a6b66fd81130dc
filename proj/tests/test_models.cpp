#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "lrrap/models.hpp"
#include "support.hpp"

using namespace lrrap;

namespace {

Matrix dense_harmonic(const OscillatorSpec& s) {
  const int d = s.d();
  Index N = 1;
  for (Index n : s.n) N *= n;
  Matrix out = Matrix::Zero(N, N);
  for (int k = 0; k < d; ++k) {
    Matrix term = Matrix::Ones(1, 1);
    for (int j = 0; j < d; ++j) {
      Matrix f = Matrix::Identity(s.n[j], s.n[j]);
      if (j == k)
        for (Index i = 0; i < s.n[j]; ++i) f(i, i) = s.omega[j] * (double(i) + 0.5);
      term = support::kron(term, f);
    }
    out += term;
  }
  return out;
}

Matrix dense_position(Index n) {
  Matrix q = Matrix::Zero(n, n);
  for (Index k = 0; k + 1 < n; ++k) q(k, k + 1) = q(k + 1, k) = std::sqrt(double(k + 1) / 2.0);
  return q;
}

Matrix on_sites(const std::vector<Index>& n, const std::vector<std::pair<int, Matrix>>& f) {
  Matrix out = Matrix::Ones(1, 1);
  for (size_t j = 0; j < n.size(); ++j) {
    Matrix m = Matrix::Identity(n[j], n[j]);
    for (const auto& [site, mat] : f)
      if (site == int(j)) m = mat * m;
    out = support::kron(out, m);
  }
  return out;
}

}  // namespace

TEST_CASE("sop_to_mpo") {
  SopTerm id;
  auto I = sop_to_mpo({id}, {2, 3, 2});
  CHECK(I.ranks() == std::vector<Index>{1, 1, 1, 1});
  CHECK((support::naive_dense(I) - Matrix::Identity(12, 12)).norm() < 1e-14);

  Matrix A(2, 2), B(3, 3);
  A << 1, 2, 2, -1;
  B << 0, 1, 0, 1, 2, 3, 0, 3, 1;
  SopTerm ta{1.0, {{0, A}}}, tb{1.0, {{2, B}}};
  auto M = sop_to_mpo({ta, tb}, {2, 2, 3});
  const Matrix expect = on_sites({2, 2, 3}, {{0, A}}) + on_sites({2, 2, 3}, {{2, B}});
  CHECK((support::naive_dense(M) - expect).norm() < 1e-12);

  SopTerm bad{1.0, {{3, A}}};
  CHECK_THROWS(sop_to_mpo({bad}, {2, 2, 2}));
}

TEST_CASE("heisenberg_mpo") {
  CHECK_THROWS(heisenberg_mpo(1));
  const Vector e2 = support::jacobi_eigenvalues(support::naive_dense(heisenberg_mpo(2)));
  CHECK(e2(0) == doctest::Approx(-0.75));
  for (int i = 1; i < 4; ++i) CHECK(e2(i) == doctest::Approx(0.25));
  CHECK(support::jacobi_eigenvalues(support::naive_dense(heisenberg_mpo(3)))(0) == doctest::Approx(-1.0));

  for (int d = 2; d <= 6; ++d) {
    const Matrix H = support::naive_dense(heisenberg_mpo(d));
    CHECK((H - H.transpose()).norm() < 1e-12);
    // Same spectrum as the chain in the usual spin basis.
    const Vector a = support::jacobi_eigenvalues(H);
    const Vector b = support::jacobi_eigenvalues(support::heisenberg_dense(d));
    CHECK((a - b).cwiseAbs().maxCoeff() < 1e-10);
  }
  for (int d = 2; d <= 40; ++d) {
    auto H = heisenberg_mpo(d);
    CHECK(H.max_rank() <= 5);
  }
  CHECK(heisenberg_terms(5).size() == 12);
}

TEST_CASE("oscillator_mpo") {
  OscillatorSpec s;
  s.n = {8, 8};
  s.omega = {1.0, 1.7};
  auto H = oscillator_mpo(s);
  CHECK(H.max_rank() <= 2);
  const Matrix Hd = support::naive_dense(H);
  CHECK((Hd - dense_harmonic(s)).norm() < 1e-12);
  CHECK(support::jacobi_eigenvalues(Hd)(0) == doctest::Approx(0.5 * (1.0 + 1.7)).epsilon(1e-12));

  OscillatorSpec q = s;
  q.quartic.push_back({{0, 0, 1, 1}, 0.05});
  const Matrix diff = support::naive_dense(oscillator_mpo(q)) - Hd;
  const Matrix Q = dense_position(8);
  const Matrix expect = 0.05 * on_sites(s.n, {{0, Q * Q}, {1, Q * Q}});
  CHECK((diff - expect).norm() < 1e-12);

  OscillatorSpec c = s;
  c.cubic.push_back({{0, 1, 1}, -0.1});
  const Matrix diffc = support::naive_dense(oscillator_mpo(c)) - Hd;
  CHECK((diffc + 0.1 * on_sites(s.n, {{0, Q}, {1, Q * Q}})).norm() < 1e-12);

  OscillatorSpec bad = s;
  bad.omega[1] = -1.0;
  CHECK_THROWS(bad.validate());
  bad = s;
  bad.cubic.push_back({{0, 5, 1}, 1.0});
  CHECK_THROWS(bad.validate());

  CHECK((harmonic_matrix(4, 2.0).diagonal() - Vector(Eigen::Vector4d(1, 3, 5, 7))).norm() < 1e-15);
  CHECK((position_matrix(5) - dense_position(5)).norm() < 1e-15);
}

TEST_CASE("exponential sums and the harmonic preconditioner") {
  SpectralBounds bd{1.0, 20.0};
  auto es = exp_sum_inverse(8, bd);
  double worst = 0.0;
  for (int k = 0; k <= 2000; ++k) {
    const double x = bd.lo * std::pow(bd.hi / bd.lo, k / 2000.0);
    double f = 0.0;
    for (size_t j = 0; j < es.weight.size(); ++j) f += es.weight[j] * std::exp(-es.exponent[j] * x);
    worst = std::max(worst, std::abs(x * f - 1.0));
  }
  CHECK(worst <= es.max_rel_error * (1 + 1e-6) + 1e-12);

  OscillatorSpec one;
  one.n = {12};
  one.omega = {1.3};
  std::mt19937_64 rng(1);
  std::normal_distribution<double> nd;
  Vector v(12);
  for (Index i = 0; i < 12; ++i) v(i) = nd(rng);
  const Matrix A = dense_harmonic(one);
  std::vector<double> errs;
  for (int rho : {4, 8, 12}) {
    auto prec = harmonic_preconditioner(one, rho);
    CHECK(prec.terms.size() == size_t(rho));
    Matrix Binv = Matrix::Zero(12, 12);
    for (const auto& t : prec.terms) {
      CHECK(t.max_rank() == 1);
      Binv += support::naive_dense(t);
    }
    const double e = (Binv * A * v - v).norm() / v.norm();
    CHECK(e <= prec.inversion_error * (1 + 1e-6) + 1e-12);
    errs.push_back(e);
  }
  CHECK(errs[1] < errs[0]);
  CHECK(errs[2] < errs[1]);
  CHECK(errs[1] < 1e-2);

  OscillatorSpec two;
  two.n = {6, 5};
  two.omega = {1.0, 2.5};
  auto p2 = harmonic_preconditioner(two, 10);
  CHECK_NOTHROW(p2.validate({6, 5}));
  auto b2 = harmonic_bounds(two);
  const Vector ev = dense_harmonic(two).diagonal();
  CHECK(b2.lo <= ev.minCoeff());
  CHECK(b2.hi >= ev.maxCoeff());
}

TEST_CASE("product_state_block") {
  OscillatorSpec s;
  s.n = {4, 4};
  s.omega = {1.0, 1.6};
  auto blk = product_state_block(s, 6);
  std::vector<double> energies;
  for (Index a = 0; a < 4; ++a)
    for (Index b = 0; b < 4; ++b) energies.push_back(1.0 * (a + 0.5) + 1.6 * (b + 0.5));
  std::sort(energies.begin(), energies.end());
  const Matrix Hd = dense_harmonic(s);
  for (int i = 0; i < 6; ++i) {
    CHECK(blk[i].max_rank() == 1);
    const Vector x = support::naive_dense(blk[i]);
    CHECK(x.dot(Hd * x) == doctest::Approx(energies[i]).epsilon(1e-12));
    for (int j = 0; j < 6; ++j) CHECK(tt_inner(blk[i], blk[j]) == doctest::Approx(i == j ? 1.0 : 0.0));
  }
  CHECK_THROWS(product_state_block(s, 17));

  // Spin chain: lowest basis states of the diagonal nearest-neighbour part.
  const int d = 5;
  auto sb = product_state_block(d, 4);
  std::vector<double> diag;
  for (Index m = 0; m < (Index(1) << d); ++m) {
    double e = 0.0;
    for (int i = 0; i + 1 < d; ++i) {
      const int a = (m >> (d - 1 - i)) & 1, b = (m >> (d - 2 - i)) & 1;
      e += (a == b ? 0.25 : -0.25);
    }
    diag.push_back(e);
  }
  std::vector<double> sorted = diag;
  std::sort(sorted.begin(), sorted.end());
  for (int i = 0; i < 4; ++i) {
    const Vector x = support::naive_dense(sb[i]);
    Index at = 0;
    x.cwiseAbs().maxCoeff(&at);
    CHECK(x.norm() == doctest::Approx(1.0));
    CHECK(std::abs(x(at)) == doctest::Approx(1.0));
    CHECK(diag[at] == doctest::Approx(sorted[i]));
  }
}
