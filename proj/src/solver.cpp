#include "lrrap/solver.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <exception>
#include <fstream>
#include <limits>
#include <numeric>
#include <sstream>

#include "lrrap/tt_io.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace lrrap {

Schedule parse_schedule(const std::string& name) {
  if (name == "first_only") return Schedule::first_only;
  if (name == "argmax") return Schedule::argmax;
  if (name == "random") return Schedule::random;
  if (name == "optimal") return Schedule::optimal;
  throw std::invalid_argument("unknown schedule '" + name + "' (expected first_only, argmax, random or optimal)");
}

std::string to_string(Schedule s) {
  switch (s) {
    case Schedule::first_only: return "first_only";
    case Schedule::argmax: return "argmax";
    case Schedule::random: return "random";
    case Schedule::optimal: return "optimal";
  }
  return "?";
}

void SolverConfig::validate() const {
  if (b < 1) throw std::invalid_argument("solver: b must be at least 1");
  if (rank < 1) throw std::invalid_argument("solver: rank must be at least 1");
  if (!(tol > 0)) throw std::invalid_argument("solver: tol must be positive");
  if (max_iters < 0) throw std::invalid_argument("solver: max_iters must be non-negative");
  if (phase1_cap < 0) throw std::invalid_argument("solver: phase1_cap must be non-negative");
  if (threads < 0) throw std::invalid_argument("solver: threads must be non-negative");
}

namespace {

// Runs f(0..n-1), possibly in parallel; every call writes only its own slot.
template <class F>
void for_each_column(int n, F&& f) {
  std::exception_ptr err;
#pragma omp parallel for schedule(static)
  for (int i = 0; i < n; ++i) {
    try {
      f(i);
    } catch (...) {
#pragma omp critical(lrrap_column_error)
      if (!err) err = std::current_exception();
    }
  }
  if (err) std::rethrow_exception(err);
}

TTVector normalized(const TTVector& x) {
  const double nx = tt_norm(x);
  if (!(nx > 0)) throw SolverError("iterate collapsed to zero");
  return tt_scale(x, 1.0 / nx);
}

bool is_zero(const TangentVector& t) {
  for (const auto& c : t.delta())
    for (Index e = 0; e < c.size(); ++e)
      if (c.data()[e] != 0.0) return false;
  return true;
}

// Y_i -= Q K_i with K = (Q^T Q)^+ Q^T Y_i, two passes.
void orthogonalize_against(std::vector<TangentVector>& Y, const std::vector<TangentVector>& Q) {
  const Index q = static_cast<Index>(Q.size());
  Matrix M(q, q);
  for (Index i = 0; i < q; ++i)
    for (Index j = 0; j <= i; ++j) M(i, j) = M(j, i) = tangent_inner(Q[i], Q[j]);
  Eigen::SelfAdjointEigenSolver<Matrix> es(M);
  const double top = es.eigenvalues().cwiseAbs().maxCoeff();
  if (!(top > 0)) return;
  Vector inv = es.eigenvalues();
  for (Index i = 0; i < q; ++i) inv(i) = inv(i) > 1e-12 * top ? 1.0 / inv(i) : 0.0;
  const Matrix Mp = es.eigenvectors() * inv.asDiagonal() * es.eigenvectors().transpose();
  for (auto& y : Y) {
    for (int pass = 0; pass < 2; ++pass) {
      Vector proj(q);
      for (Index i = 0; i < q; ++i) proj(i) = tangent_inner(Q[i], y);
      const Vector k = Mp * proj;
      y = regauge(axpy(1.0, y, -1.0, combine(Q, k)));
    }
  }
}

// B_j H for every preconditioner term; the same rank as H.
std::vector<TTOperator> compose_terms(const Preconditioner& prec, const TTOperator& H) {
  std::vector<TTOperator> out;
  for (const auto& b : prec.terms) out.push_back(op_compose(b, H));
  return out;
}

TangentVector preconditioned_residual(const BasePtr& base, const TTOperator& H, const TTVector& x, double theta,
                                      const Preconditioner& prec, const std::vector<TTOperator>& BH,
                                      const TangentVector* phx, const TangentVector* px, MatvecPath path) {
  if (prec.is_identity()) {
    TangentVector a = phx ? *phx : project_matvec(base, H, x, path);
    TangentVector b = px ? *px : project(base, x);
    return regauge(axpy(1.0, a, -theta, b));
  }
  TangentVector acc = tangent_zero(base);
  for (size_t j = 0; j < prec.terms.size(); ++j) {
    acc = axpy(1.0, acc, 1.0, project_matvec(base, BH[j], x, path));
    acc = axpy(1.0, acc, -theta, project_matvec(base, prec.terms[j], x, path));
  }
  return regauge(acc);
}

std::string fmt17(double v) {
  if (!std::isfinite(v)) return "null";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::uint64_t splitmix(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace

double rayleigh(const TTOperator& H, const TTVector& x) {
  const double xx = tt_inner(x, x);
  if (!(xx > 0)) throw std::invalid_argument("rayleigh: zero vector");
  return tt_bilinear(x, H, x) / xx;
}

std::vector<TangentVector> projected_residual_block(const BasePtr& base, const TTOperator& H,
                                                    const std::vector<TTVector>& X, const Vector& theta,
                                                    const Preconditioner& prec, MatvecPath path) {
  if (theta.size() != static_cast<Index>(X.size())) throw ShapeError("projected_residual_block: theta length mismatch");
  prec.validate(H.dims());
  const auto BH = compose_terms(prec, H);
  std::vector<TangentVector> out(X.size());
  for_each_column(static_cast<int>(X.size()), [&](int i) {
    out[i] = preconditioned_residual(base, H, X[i], theta(i), prec, BH, nullptr, nullptr, path);
  });
  return out;
}

int choose_tangent_index(const Vector& prev, const Vector& cur, Schedule s, std::mt19937_64& rng,
                         const std::function<double(int)>& objective) {
  const Index b = cur.size();
  if (b < 1) throw std::invalid_argument("choose_tangent_index: empty block");
  if (prev.size() != b) throw ShapeError("choose_tangent_index: length mismatch");
  switch (s) {
    case Schedule::first_only: return 0;
    case Schedule::random: return static_cast<int>(std::uniform_int_distribution<Index>(0, b - 1)(rng));
    case Schedule::argmax: {
      int best = 0;
      double best_change = -1.0;
      for (Index i = 0; i < b; ++i) {
        const double change = cur(i) == 0.0 ? std::numeric_limits<double>::infinity()
                                              : std::abs((prev(i) - cur(i)) / cur(i));
        if (change > best_change) {
          best_change = change;
          best = static_cast<int>(i);
        }
      }
      return best;
    }
    case Schedule::optimal: {
      if (!objective) throw std::invalid_argument("choose_tangent_index: optimal schedule needs an objective");
      int best = 0;
      double best_value = std::numeric_limits<double>::infinity();
      for (Index i = 0; i < b; ++i) {
        const double v = objective(static_cast<int>(i));
        if (v < best_value) {
          best_value = v;
          best = static_cast<int>(i);
        }
      }
      return best;
    }
  }
  return 0;
}

GramSet assemble_grams(const std::vector<TTVector>& X, const std::vector<TangentVector>& V,
                       const std::vector<TangentVector>& PX, const std::vector<TangentVector>& PHV,
                       const std::vector<TangentVector>& PHX, const Vector& diagXtHX) {
  const Index b = static_cast<Index>(X.size()), m = static_cast<Index>(V.size());
  if (m != 3 * b || PHV.size() != V.size() || static_cast<Index>(PX.size()) != b ||
      static_cast<Index>(PHX.size()) != b || diagXtHX.size() != b)
    throw ShapeError("assemble_grams: inconsistent block sizes");
  GramSet g;
  g.VtV.resize(m, m);
  g.VtHV.resize(m, m);
  g.VtX.resize(m, b);
  g.VtHX.resize(m, b);
  g.XtX.resize(b, b);
  for (Index j = 0; j < m; ++j) {
    for (Index l = 0; l <= j; ++l) g.VtV(j, l) = g.VtV(l, j) = tangent_inner(V[j], V[l]);
    for (Index l = 0; l < m; ++l) g.VtHV(j, l) = tangent_inner(V[j], PHV[l]);
    for (Index i = 0; i < b; ++i) {
      g.VtX(j, i) = tangent_inner(V[j], PX[i]);
      g.VtHX(j, i) = tangent_inner(V[j], PHX[i]);
    }
  }
  g.VtHV = 0.5 * (g.VtHV + g.VtHV.transpose()).eval();
  for (Index i = 0; i < b; ++i)
    for (Index k = 0; k <= i; ++k) g.XtX(i, k) = g.XtX(k, i) = tt_inner(X[i], X[k]);
  g.diagXtHX = diagXtHX;
  return g;
}

Retraction assemble_and_retract(const std::vector<TTVector>& X, const Coefficients& co,
                                const std::vector<TangentVector>& V, Index r, int t, Index p_rank, double step,
                                const std::vector<TangentVector>* directions) {
  const int b = static_cast<int>(X.size());
  if (co.c.size() != b || co.C.rows() != 3 * b || co.C.cols() != b || static_cast<int>(V.size()) != 3 * b)
    throw ShapeError("assemble_and_retract: coefficient shapes do not match the block");
  if (t < 0 || t >= b) throw std::out_of_range("assemble_and_retract: anchor index out of range");
  if (directions && static_cast<int>(directions->size()) != 2 * b)
    throw ShapeError("assemble_and_retract: expected 2b direction members");
  if (p_rank <= 0) p_rank = 2 * r;
  const Index base_rank = V.front().base()->left_frame().max_rank();
  Retraction out;
  out.X.resize(b);
  out.P.resize(b);
  out.pre_rounding_rank.resize(b);
  for_each_column(b, [&](int i) {
    Vector cv = step * co.C.col(i);
    TangentVector dir;
    if (directions) {
      dir = combine(*directions, cv.tail(2 * b));
    } else {
      Vector cp = cv;
      cp.head(b).setZero();
      dir = combine(V, cp);
    }
    out.P[i] = tt_round(embed(dir), p_rank);
    TangentVector corr = combine(V, cv);
    TTVector y;
    if (i == t) {
      // V[t] = P x_t = x_t, so the anchor column stays in one tangent space.
      y = embed(axpy(1.0, corr, co.c(i), V[t]));
      if (y.max_rank() > 2 * base_rank) throw SolverError("anchor column exceeds the 2r rank bound");
    } else {
      y = tt_add(tt_scale(X[i], co.c(i)), embed(corr));
      if (y.max_rank() > X[i].max_rank() + 2 * base_rank)
        throw SolverError("column exceeds the 3r rank bound");
    }
    out.pre_rounding_rank[i] = y.max_rank();
    out.X[i] = normalized(tt_round(y, r));
  });
  return out;
}

namespace {

// Everything one update needs at a fixed anchor.
struct Plan {
  int t = 0;
  std::vector<TangentVector> V;
  // W and P P before orthogonalization against P X. V = [PX, W, PP] T with T
  // unit block upper triangular, so C[b:3b] applies to them unchanged.
  std::vector<TangentVector> raw;
  CoeffResult coeff;
};

struct Evaluation {
  Vector theta, res;
  std::vector<BasePtr> bases;
  std::vector<TangentVector> own_phx, own_px;
};

class Driver {
 public:
  Driver(const TTOperator& H, const Preconditioner& prec, const SolverConfig& cfg)
      : H_(H), prec_(prec), cfg_(cfg), BH_(compose_terms(prec, H)) {}

  Evaluation evaluate(const std::vector<TTVector>& X) const {
    const int b = static_cast<int>(X.size());
    Evaluation ev;
    ev.theta.resize(b);
    ev.res.resize(b);
    ev.bases.resize(b);
    ev.own_phx.resize(b);
    ev.own_px.resize(b);
    for_each_column(b, [&](int i) {
      ev.theta(i) = rayleigh(H_, X[i]);
      ev.bases[i] = prepare_base(X[i]);
      ev.own_phx[i] = project_matvec(ev.bases[i], H_, X[i], cfg_.matvec);
      ev.own_px[i] = project(ev.bases[i], X[i]);
      TangentVector r = regauge(axpy(1.0, ev.own_phx[i], -ev.theta(i), ev.own_px[i]));
      ev.res(i) = std::sqrt(std::max(0.0, tangent_inner(r, r)));
    });
    return ev;
  }

  Plan plan(int t, const std::vector<TTVector>& X, const std::vector<TTVector>& P, const Evaluation& ev) const {
    const int b = static_cast<int>(X.size());
    const BasePtr& base = ev.bases[t];
    std::vector<TangentVector> PX(b), PHX(b), W(b), PP(b);
    for_each_column(b, [&](int i) {
      PX[i] = i == t ? ev.own_px[i] : project(base, X[i]);
      PHX[i] = i == t ? ev.own_phx[i] : project_matvec(base, H_, X[i], cfg_.matvec);
      W[i] = preconditioned_residual(base, H_, X[i], ev.theta(i), prec_, BH_, &PHX[i], &PX[i], cfg_.matvec);
      PP[i] = P.empty() ? tangent_zero(base) : project(base, P[i]);
    });
    // Explicit orthogonalization against P X: the Gram entries of W are
    // otherwise dominated by cancellation once ||r||^2 nears rounding level.
    Plan p;
    p.t = t;
    p.raw.reserve(2 * b);
    for (auto* blk : {&W, &PP})
      for (auto& v : *blk) p.raw.push_back(v);
    orthogonalize_against(W, PX);
    orthogonalize_against(PP, PX);
    p.V.reserve(3 * b);
    for (auto* blk : {&PX, &W, &PP})
      for (auto& v : *blk) p.V.push_back(v);
    std::vector<TangentVector> PHV(3 * b);
    for_each_column(3 * b, [&](int j) {
      if (j == t)
        PHV[j] = PHX[t];
      else if (is_zero(p.V[j]))
        PHV[j] = tangent_zero(base);
      else
        PHV[j] = project_matvec(base, H_, embed(p.V[j]), cfg_.matvec);
    });
    Vector diag(b);
    for (int i = 0; i < b; ++i) diag(i) = ev.theta(i) * tt_inner(X[i], X[i]);
    const GramSet g = assemble_grams(X, p.V, PX, PHV, PHX, diag);
    p.coeff = find_coefficients(g, nullptr, cfg_.coeff);
    return p;
  }

 private:
  const TTOperator& H_;
  const Preconditioner& prec_;
  const SolverConfig& cfg_;
  std::vector<TTOperator> BH_;
};

struct ThreadScope {
#ifdef _OPENMP
  explicit ThreadScope(int n) : saved(omp_get_max_threads()) {
    omp_set_num_threads(n > 0 ? n : omp_get_num_procs());
  }
  ~ThreadScope() { omp_set_num_threads(saved); }
  int saved;
#else
  explicit ThreadScope(int) {}
#endif
};

}  // namespace

SolveResult lrrap_lobpcg(const TTOperator& H, const std::vector<TTVector>& X0, const Preconditioner& prec,
                         const SolverConfig& cfg, const IterationObserver& observer, const SolverState* resume) {
  cfg.validate();
  prec.validate(H.dims());
  ThreadScope threads(cfg.threads);
  using clock = std::chrono::steady_clock;
  const auto t0 = clock::now();

  SolverState st;
  if (resume) {
    st = *resume;
  } else {
    st.X = X0;
    st.rayleigh_prev = Vector();
  }
  if (static_cast<int>(st.X.size()) != cfg.b)
    throw std::invalid_argument("lrrap_lobpcg: initial block has " + std::to_string(st.X.size()) +
                                " columns, expected b = " + std::to_string(cfg.b));
  for (auto& x : st.X) {
    if (x.dims() != H.dims()) throw ShapeError("lrrap_lobpcg: initial vector mode sizes differ from the operator");
    // A resumed iterate is already normalized; touching it would break
    // bitwise agreement with the uninterrupted run.
    const bool over = x.max_rank() > cfg.rank;
    if (over) x = tt_round(x, cfg.rank);
    if (over || !resume) x = normalized(x);
  }
  if (!st.P.empty() && static_cast<int>(st.P.size()) != cfg.b) throw ShapeError("lrrap_lobpcg: bad direction block");

  const double phase1_tol = cfg.phase1_tol > 0 ? cfg.phase1_tol : cfg.tol;
  const int b = cfg.b;
  Driver drv(H, prec, cfg);

  SolveResult out;
  double prev_sum = std::numeric_limits<double>::quiet_NaN();
  struct Best {
    std::vector<TTVector> X;
    Vector theta, res;
    double sum = std::numeric_limits<double>::infinity();
  } best;

  for (;;) {
    const Evaluation ev = drv.evaluate(st.X);
    st.rayleigh = ev.theta;
    TraceRow row;
    row.iter = st.iter;
    row.rayleigh.assign(ev.theta.data(), ev.theta.data() + b);
    row.residual.assign(ev.res.data(), ev.res.data() + b);

    const double sum = ev.theta.sum();
    if (std::isfinite(prev_sum) && sum > prev_sum + 1e-12 * std::max(1.0, std::abs(prev_sum))) ++out.trace_increases;
    prev_sum = sum;
    if (sum < best.sum) best = {st.X, ev.theta, ev.res, sum};

    const bool converged = (ev.res.array() <= cfg.tol).all();
    auto emit = [&] {
      if (cfg.record_time) row.wall_ms = std::chrono::duration<double, std::milli>(clock::now() - t0).count();
      st.trace.push_back(row);
      if (observer) observer(row);
    };
    if (converged || st.iter >= cfg.max_iters) {
      emit();
      out.status = converged ? SolveStatus::converged : SolveStatus::max_iters;
      break;
    }

    int t;
    if (cfg.phase1 && st.in_phase1 && ev.res(0) > phase1_tol && st.iter < cfg.phase1_cap) {
      t = 0;
    } else {
      st.in_phase1 = false;
      // Seeded per iteration so a resumed run draws what the straight run would.
      std::mt19937_64 rng(splitmix(cfg.seed ^ splitmix(static_cast<std::uint64_t>(st.iter))));
      if (st.rayleigh_prev.size() != b) {
        t = 0;
      } else if (cfg.schedule == Schedule::optimal) {
        std::vector<std::optional<Plan>> cache(b);
        t = choose_tangent_index(st.rayleigh_prev, ev.theta, cfg.schedule, rng, [&](int i) {
          cache[i] = drv.plan(i, st.X, st.P, ev);
          return cache[i]->coeff.trace;
        });
      } else {
        t = choose_tangent_index(st.rayleigh_prev, ev.theta, cfg.schedule, rng);
      }
    }

    const Plan p = drv.plan(t, st.X, st.P, ev);
    Retraction ret = assemble_and_retract(st.X, p.coeff.coeffs, p.V, cfg.rank, t, cfg.p_rank, 1.0, &p.raw);
    if (cfg.coeff.debug) {
      double after = 0.0;
      for (const auto& y : ret.X) after += rayleigh(H, y);
      *cfg.coeff.debug << "iter " << st.iter << " anchor " << t + 1 << " predicted_trace " << fmt17(p.coeff.trace)
                       << " retracted_trace " << fmt17(after) << '\n';
    }
    if (cfg.line_search) {
      double step = 1.0;
      auto trace_of = [&](const std::vector<TTVector>& Y) {
        double s = 0.0;
        for (const auto& y : Y) s += rayleigh(H, y);
        return s;
      };
      for (int k = 0; k < 3 && trace_of(ret.X) > sum; ++k) {
        step *= 0.5;
        ret = assemble_and_retract(st.X, p.coeff.coeffs, p.V, cfg.rank, t, cfg.p_rank, step, &p.raw);
      }
    }

    row.t_index = t + 1;
    row.coeff_residual = p.coeff.kkt_residual;
    emit();
    st.t = t;
    st.rayleigh_prev = ev.theta;
    st.X = std::move(ret.X);
    st.P = std::move(ret.P);
    ++st.iter;
  }

  out.iterations = st.iter;
  std::vector<TTVector> Xs = st.X;
  Vector theta = st.rayleigh, res = Vector::Map(st.trace.back().residual.data(), b);
  if (out.status != SolveStatus::converged) {
    Xs = best.X;
    theta = best.theta;
    res = best.res;
    out.diagnostic = "not converged after " + std::to_string(st.iter) + " iterations; max residual " +
                     fmt17(res.maxCoeff()) + " > tol " + fmt17(cfg.tol) + "; returning the lowest-trace iterate";
  }
  if (out.trace_increases > 0) {
    if (!out.diagnostic.empty()) out.diagnostic += "; ";
    out.diagnostic += "Rayleigh sum increased in " + std::to_string(out.trace_increases) + " iterations";
  }
  std::vector<int> order(b);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int i, int j) { return theta(i) < theta(j); });
  out.eigenvalues.resize(b);
  out.residuals.resize(b);
  for (int k = 0; k < b; ++k) {
    out.eigenvalues(k) = theta(order[k]);
    out.residuals(k) = res(order[k]);
    out.X.push_back(Xs[order[k]]);
  }
  out.state = std::move(st);
  return out;
}

std::vector<TTVector> random_block(const std::vector<Index>& dims, int b, Index r, std::uint64_t seed) {
  if (b < 1) throw std::invalid_argument("random_block: b must be at least 1");
  std::vector<TTVector> Q;
  for (int i = 0; i < b; ++i) {
    TTVector y = tt_random(dims, r, splitmix(seed ^ splitmix(static_cast<std::uint64_t>(i) + 1)));
    for (int pass = 0; pass < 2; ++pass) {
      for (const auto& q : Q) y = tt_add(y, tt_scale(q, -tt_inner(q, y)));
      y = tt_round(y, r);
      const double ny = tt_norm(y);
      if (!(ny > 1e-8)) throw std::invalid_argument("random_block: block size exceeds what rank r can hold");
      y = tt_scale(y, 1.0 / ny);
    }
    Q.push_back(std::move(y));
  }
  return Q;
}

void write_checkpoint(const std::string& path, const SolverState& s) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot write checkpoint " + path);
  const int b = static_cast<int>(s.X.size());
  os << "lrrap-checkpoint 1\n";
  os << "iter " << s.iter << "\nt " << s.t << "\nphase1 " << (s.in_phase1 ? 1 : 0) << "\nb " << b << "\nhas_p "
     << (s.P.empty() ? 0 : 1) << "\n";
  auto vec = [&](const char* key, const Vector& v) {
    os << key << ' ' << v.size();
    for (Index i = 0; i < v.size(); ++i) os << ' ' << fmt17(v(i));
    os << '\n';
  };
  vec("rayleigh", s.rayleigh);
  vec("rayleigh_prev", s.rayleigh_prev);
  for (const auto& x : s.X) write_tt(os, x);
  for (const auto& p : s.P) write_tt(os, p);
  if (!os) throw std::runtime_error("error while writing checkpoint " + path);
}

SolverState read_checkpoint(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("cannot read checkpoint " + path);
  std::string line;
  auto field = [&](const char* key) {
    if (!std::getline(is, line)) throw FormatError(std::string("checkpoint: missing '") + key + "'");
    std::istringstream ls(line);
    std::string k;
    ls >> k;
    if (k != key) throw FormatError(std::string("checkpoint: expected '") + key + "', got '" + k + "'");
    std::string rest;
    std::getline(ls, rest);
    return rest;
  };
  if (!std::getline(is, line) || line != "lrrap-checkpoint 1") throw FormatError("checkpoint: bad header");
  SolverState s;
  s.iter = std::stoi(field("iter"));
  s.t = std::stoi(field("t"));
  s.in_phase1 = std::stoi(field("phase1")) != 0;
  const int b = std::stoi(field("b"));
  const bool has_p = std::stoi(field("has_p")) != 0;
  auto vec = [&](const char* key) {
    std::istringstream ls(field(key));
    Index n = 0;
    ls >> n;
    Vector v(n);
    for (Index i = 0; i < n; ++i) {
      std::string tok;
      ls >> tok;
      v(i) = tok == "null" ? std::numeric_limits<double>::quiet_NaN() : std::stod(tok);
    }
    return v;
  };
  s.rayleigh = vec("rayleigh");
  s.rayleigh_prev = vec("rayleigh_prev");
  for (int i = 0; i < b; ++i) s.X.push_back(read_tt_vector(is));
  if (has_p)
    for (int i = 0; i < b; ++i) s.P.push_back(read_tt_vector(is));
  return s;
}

std::string trace_record(const TraceRow& row) {
  std::ostringstream os;
  auto arr = [&](const std::vector<double>& v) {
    os << '[';
    for (size_t i = 0; i < v.size(); ++i) os << (i ? "," : "") << fmt17(v[i]);
    os << ']';
  };
  os << "{\"schema\":" << kTraceSchema << ",\"iter\":" << row.iter << ",\"t_index\":" << row.t_index
     << ",\"rayleigh\":";
  arr(row.rayleigh);
  os << ",\"residual\":";
  arr(row.residual);
  os << ",\"coeff_residual\":" << fmt17(row.coeff_residual) << ",\"wall_ms\":" << fmt17(row.wall_ms) << '}';
  return os.str();
}

}  // namespace lrrap
