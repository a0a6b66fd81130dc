#include "lrrap/models.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>

namespace lrrap {

void Preconditioner::validate(const std::vector<Index>& dims) const {
  for (const auto& t : terms) {
    if (t.dims() != dims) throw ShapeError("preconditioner term has the wrong mode sizes");
    for (Index r : t.ranks())
      if (r != 1) throw ShapeError("preconditioner term is not of operator rank 1");
  }
}

TTOperator sop_to_mpo(const std::vector<SopTerm>& terms, const std::vector<Index>& dims, double eps,
                      Index rank_flush) {
  const int d = static_cast<int>(dims.size());
  if (d < 1) throw ShapeError("sop_to_mpo: empty dims");
  std::optional<TTOperator> sum;
  for (const SopTerm& t : terms) {
    std::vector<Matrix> f;
    for (Index n : dims) f.push_back(Matrix::Identity(n, n));
    int prev = -1;
    for (const auto& [site, m] : t.factors) {
      if (site < 0 || site >= d)
        throw std::out_of_range("sop_to_mpo: site index " + std::to_string(site) + " out of range");
      if (site <= prev) throw std::invalid_argument("sop_to_mpo: site indices must be strictly increasing");
      if (m.rows() != dims[site] || m.cols() != dims[site])
        throw ShapeError("sop_to_mpo: factor size does not match the mode size at site " + std::to_string(site));
      f[site] = m;
      prev = site;
    }
    f[0] *= t.coefficient;
    TTOperator op = rank1_operator(f);
    sum = sum ? op_add(*sum, op) : op;
    if (sum->max_rank() > rank_flush) sum = op_round(*sum, eps * 1e-2);
  }
  if (!sum) {
    std::vector<Matrix> f;
    for (Index n : dims) f.push_back(Matrix::Zero(n, n));
    return rank1_operator(f);
  }
  return op_round(*sum, eps);
}

std::vector<SopTerm> heisenberg_terms(int d) {
  if (d < 2) throw std::invalid_argument("heisenberg: d must be at least 2");
  Matrix sx(2, 2), sz(2, 2), j(2, 2);
  sx << 0.5, 0.0, 0.0, -0.5;
  sz << 0.0, 0.5, 0.5, 0.0;
  j << 0.0, 1.0, -1.0, 0.0;
  std::vector<SopTerm> terms;
  for (int i = 0; i + 1 < d; ++i) {
    terms.push_back({1.0, {{i, sx}, {i + 1, sx}}});
    terms.push_back({-0.25, {{i, j}, {i + 1, j}}});
    terms.push_back({1.0, {{i, sz}, {i + 1, sz}}});
  }
  return terms;
}

TTOperator heisenberg_mpo(int d, double eps) {
  return sop_to_mpo(heisenberg_terms(d), std::vector<Index>(d, 2), eps);
}

void OscillatorSpec::validate() const {
  if (n.empty()) throw std::invalid_argument("oscillator: no modes");
  if (omega.size() != n.size()) throw std::invalid_argument("oscillator: need one frequency per mode");
  for (size_t k = 0; k < n.size(); ++k) {
    if (n[k] < 1) throw std::invalid_argument("oscillator: basis size must be positive");
    if (!(omega[k] > 0)) throw std::invalid_argument("oscillator: frequencies must be positive");
  }
  auto check = [&](const std::vector<Coupling>& cs, size_t order, const char* what) {
    for (const auto& c : cs) {
      if (c.sites.size() != order) throw std::invalid_argument(std::string("oscillator: ") + what + " coupling needs " + std::to_string(order) + " sites");
      for (int s : c.sites)
        if (s < 0 || s >= d()) throw std::out_of_range(std::string("oscillator: ") + what + " coupling site out of range");
    }
  };
  check(cubic, 3, "cubic");
  check(quartic, 4, "quartic");
}

Matrix harmonic_matrix(Index n, double omega) {
  Matrix h = Matrix::Zero(n, n);
  for (Index k = 0; k < n; ++k) h(k, k) = omega * (double(k) + 0.5);
  return h;
}

Matrix position_matrix(Index n) {
  Matrix q = Matrix::Zero(n, n);
  for (Index k = 0; k + 1 < n; ++k) q(k, k + 1) = q(k + 1, k) = std::sqrt(double(k + 1) / 2.0);
  return q;
}

std::vector<SopTerm> oscillator_terms(const OscillatorSpec& spec) {
  spec.validate();
  std::vector<SopTerm> terms;
  for (int k = 0; k < spec.d(); ++k) terms.push_back({1.0, {{k, harmonic_matrix(spec.n[k], spec.omega[k])}}});
  auto add = [&](const Coupling& c) {
    std::map<int, int> power;
    for (int s : c.sites) ++power[s];
    SopTerm t{c.value, {}};
    for (auto [site, p] : power) {
      Matrix q = position_matrix(spec.n[site]);
      Matrix m = Matrix::Identity(q.rows(), q.cols());
      for (int e = 0; e < p; ++e) m = m * q;
      t.factors.emplace_back(site, m);
    }
    terms.push_back(std::move(t));
  };
  for (const auto& c : spec.cubic) add(c);
  for (const auto& c : spec.quartic) add(c);
  return terms;
}

TTOperator oscillator_mpo(const OscillatorSpec& spec, double eps) {
  return sop_to_mpo(oscillator_terms(spec), spec.n, eps);
}

SpectralBounds harmonic_bounds(const OscillatorSpec& spec) {
  spec.validate();
  SpectralBounds b;
  for (int k = 0; k < spec.d(); ++k) {
    Matrix h = harmonic_matrix(spec.n[k], spec.omega[k]);
    double lo = std::numeric_limits<double>::infinity(), hi = -lo;
    for (Index i = 0; i < h.rows(); ++i) {
      const double radius = h.row(i).cwiseAbs().sum() - std::abs(h(i, i));
      lo = std::min(lo, h(i, i) - radius);
      hi = std::max(hi, h(i, i) + radius);
    }
    b.lo += lo;
    b.hi += hi;
  }
  return b;
}

namespace {

// Scaled problem on [1, kappa]: 1/x ~ sum_j h e^{s_j} exp(-e^{s_j} x), s_j = s0 + j h.
double expsum_error(int rho, double s0, double h, const std::vector<double>& grid) {
  double worst = 0.0;
  for (double x : grid) {
    double f = 0.0;
    for (int j = 0; j < rho; ++j) {
      const double a = std::exp(s0 + j * h);
      f += h * a * std::exp(-a * x);
    }
    worst = std::max(worst, std::abs(x * f - 1.0));
  }
  return worst;
}

std::vector<double> log_grid(double kappa, int points) {
  std::vector<double> g(points);
  for (int i = 0; i < points; ++i) g[i] = std::exp(std::log(kappa) * i / std::max(1, points - 1));
  return g;
}

}  // namespace

ExpSum exp_sum_inverse(int rho, SpectralBounds bounds) {
  if (rho < 1) throw std::invalid_argument("exp_sum_inverse: need at least one term");
  if (!(bounds.lo > 0)) throw std::invalid_argument("exp_sum_inverse: spectral interval is not positive (non-SPD operator)");
  const double kappa = std::max(bounds.hi / bounds.lo, 1.0 + 1e-12);
  const auto coarse = log_grid(kappa, 120);
  double best_s0 = 0.0, best_h = 1.0, best = std::numeric_limits<double>::infinity();
  for (int ih = 1; ih <= 60; ++ih) {
    const double h = 0.05 * ih;
    for (double s0 = -20.0; s0 <= 3.0; s0 += 0.25) {
      const double e = expsum_error(rho, s0, h, coarse);
      if (e < best) {
        best = e;
        best_s0 = s0;
        best_h = h;
      }
    }
  }
  // Pattern search refinement on a denser grid.
  const auto fine = log_grid(kappa, 400);
  best = expsum_error(rho, best_s0, best_h, fine);
  double step_s = 0.125, step_h = 0.025;
  for (int it = 0; it < 200 && (step_s > 1e-6 || step_h > 1e-7); ++it) {
    bool improved = false;
    const double cand[4][2] = {{step_s, 0}, {-step_s, 0}, {0, step_h}, {0, -step_h}};
    for (const auto& c : cand) {
      const double s0 = best_s0 + c[0], h = best_h + c[1];
      if (h <= 0) continue;
      const double e = expsum_error(rho, s0, h, fine);
      if (e < best) {
        best = e;
        best_s0 = s0;
        best_h = h;
        improved = true;
      }
    }
    if (!improved) {
      step_s *= 0.5;
      step_h *= 0.5;
    }
  }
  ExpSum out;
  for (int j = 0; j < rho; ++j) {
    const double a = std::exp(best_s0 + j * best_h);
    out.weight.push_back(best_h * a / bounds.lo);
    out.exponent.push_back(a / bounds.lo);
  }
  out.max_rel_error = expsum_error(rho, best_s0, best_h, log_grid(kappa, 4000));
  return out;
}

Preconditioner harmonic_preconditioner(const OscillatorSpec& spec, int rho, const SpectralBounds* bounds) {
  spec.validate();
  const SpectralBounds sb = bounds ? *bounds : harmonic_bounds(spec);
  if (!(sb.lo > 0)) throw std::invalid_argument("harmonic_preconditioner: harmonic part is not positive definite");
  ExpSum es = exp_sum_inverse(rho, sb);
  std::vector<Eigen::SelfAdjointEigenSolver<Matrix>> eig;
  for (int k = 0; k < spec.d(); ++k) eig.emplace_back(harmonic_matrix(spec.n[k], spec.omega[k]));
  Preconditioner p;
  for (int j = 0; j < rho; ++j) {
    std::vector<Matrix> f;
    for (int k = 0; k < spec.d(); ++k) {
      const auto& e = eig[k];
      Vector ex = (-es.exponent[j] * e.eigenvalues().array()).exp();
      f.push_back(e.eigenvectors() * ex.asDiagonal() * e.eigenvectors().transpose());
    }
    f[0] *= es.weight[j];
    p.terms.push_back(rank1_operator(f));
  }
  p.inversion_error = es.max_rel_error;
  return p;
}

namespace {

TTVector basis_product(const std::vector<Index>& dims, const std::vector<Index>& occ) {
  std::vector<Core3> cores;
  for (size_t k = 0; k < dims.size(); ++k) {
    Core3 c(1, dims[k], 1);
    c(0, occ[k], 0) = 1.0;
    cores.push_back(std::move(c));
  }
  return TTVector(std::move(cores), Orthogonality::left);
}

}  // namespace

std::vector<TTVector> product_state_block(const OscillatorSpec& spec, int b) {
  spec.validate();
  const int d = spec.d();
  double total = 1.0;
  for (Index n : spec.n) total *= double(n);
  if (b < 1 || double(b) > total) throw std::invalid_argument("product_state_block: b exceeds the number of product states");
  auto energy = [&](const std::vector<Index>& occ) {
    double e = 0.0;
    for (int k = 0; k < d; ++k) e += spec.omega[k] * (double(occ[k]) + 0.5);
    return e;
  };
  using Entry = std::pair<double, std::vector<Index>>;
  std::set<Entry> frontier;
  std::set<std::vector<Index>> seen;
  std::vector<Index> zero(d, 0);
  frontier.insert({energy(zero), zero});
  seen.insert(zero);
  std::vector<TTVector> out;
  while (static_cast<int>(out.size()) < b) {
    Entry top = *frontier.begin();
    frontier.erase(frontier.begin());
    out.push_back(basis_product(spec.n, top.second));
    for (int k = 0; k < d; ++k) {
      if (top.second[k] + 1 >= spec.n[k]) continue;
      std::vector<Index> next = top.second;
      ++next[k];
      if (seen.insert(next).second) frontier.insert({energy(next), next});
    }
  }
  return out;
}

std::vector<TTVector> product_state_block(int d, int b) {
  if (d < 1) throw std::invalid_argument("product_state_block: d must be positive");
  if (b < 1 || (d < 30 && b > (1 << d)))
    throw std::invalid_argument("product_state_block: b exceeds the number of product states");
  // k-best paths through the chain; bond energy sigma_i sigma_{i+1} / 4.
  using Path = std::pair<double, std::vector<Index>>;
  auto sigma = [](Index s) { return s == 0 ? 1.0 : -1.0; };
  std::vector<Path> best[2];
  best[0] = {{0.0, {0}}};
  best[1] = {{0.0, {1}}};
  for (int i = 1; i < d; ++i) {
    std::vector<Path> next[2];
    for (Index t = 0; t < 2; ++t) {
      for (Index s = 0; s < 2; ++s)
        for (const auto& [e, path] : best[s]) {
          std::vector<Index> p = path;
          p.push_back(t);
          next[t].push_back({e + 0.25 * sigma(s) * sigma(t), std::move(p)});
        }
      std::sort(next[t].begin(), next[t].end());
      if (static_cast<int>(next[t].size()) > b) next[t].resize(b);
    }
    best[0] = std::move(next[0]);
    best[1] = std::move(next[1]);
  }
  std::vector<Path> all = best[0];
  all.insert(all.end(), best[1].begin(), best[1].end());
  std::sort(all.begin(), all.end());
  std::vector<TTVector> out;
  const std::vector<Index> dims(d, 2);
  for (int k = 0; k < b; ++k) out.push_back(basis_product(dims, all[k].second));
  return out;
}

}  // namespace lrrap
