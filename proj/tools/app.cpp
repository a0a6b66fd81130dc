#include "app.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "lrrap/oracle.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace lrrap::app {

namespace {

std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

template <class T>
T get_or(const json& j, const char* key, T fallback) {
  if (!j.contains(key) || j.at(key).is_null()) return fallback;
  return j.at(key).get<T>();
}

std::vector<Coupling> parse_couplings(const json& j, const char* key) {
  std::vector<Coupling> out;
  if (!j.contains(key)) return out;
  for (const auto& c : j.at(key)) out.push_back({c.at("sites").get<std::vector<int>>(), c.at("value").get<double>()});
  return out;
}

OscillatorSpec oscillator_spec(const json& m) {
  OscillatorSpec s;
  s.n = m.at("n").get<std::vector<Index>>();
  s.omega = m.at("omega").get<std::vector<double>>();
  s.cubic = parse_couplings(m, "cubic");
  s.quartic = parse_couplings(m, "quartic");
  s.validate();
  return s;
}

std::vector<Index> model_dims(const json& m) {
  const std::string kind = m.at("kind").get<std::string>();
  if (kind == "heisenberg") return std::vector<Index>(m.at("d").get<int>(), 2);
  if (kind == "oscillator") return m.at("n").get<std::vector<Index>>();
  throw std::runtime_error("config: unknown model.kind '" + kind + "' (expected heisenberg or oscillator)");
}

void ensure_dir(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw std::runtime_error("cannot create output directory '" + dir + "': " + ec.message());
}

std::ofstream open_out(const std::string& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot write " + path);
  return os;
}

void write_trace(const std::string& path, const std::vector<TraceRow>& rows) {
  auto os = open_out(path);
  for (const auto& r : rows) os << trace_record(r) << '\n';
}

std::vector<Level> levels_of(const SolveResult& r) {
  std::vector<Level> out;
  for (Index i = 0; i < r.eigenvalues.size(); ++i) out.push_back({r.eigenvalues(i), r.residuals(i)});
  return out;
}

}  // namespace

RunConfig parse_config(const json& j, const Overrides& ov) {
  RunConfig rc;
  try {
    rc.model = j.at("model");
    model_dims(rc.model);
    const json s = j.value("solver", json::object());
    SolverConfig& c = rc.solver;
    c.b = get_or(s, "b", 1);
    c.rank = get_or<Index>(s, "rank", 1);
    c.tol = get_or(s, "tol", 1e-8);
    c.max_iters = get_or(s, "max_iters", 300);
    c.schedule = parse_schedule(get_or<std::string>(s, "schedule", "argmax"));
    c.phase1 = get_or(s, "phase1", true);
    c.phase1_tol = get_or(s, "phase1_tol", -1.0);
    c.phase1_cap = get_or(s, "phase1_cap", 20);
    c.seed = get_or<std::uint64_t>(s, "seed", 0);
    c.coeff.sweeps = get_or(s, "sweeps", 3);
    c.coeff.polish = get_or(s, "polish", false);
    c.p_rank = get_or<Index>(s, "p_rank", 0);
    c.line_search = get_or(s, "line_search", false);
    c.threads = get_or(s, "threads", 1);
    c.record_time = get_or(s, "record_time", false);
    rc.init = get_or<std::string>(s, "init", "random");
    if (rc.init != "random" && rc.init != "product")
      throw std::runtime_error("config: solver.init must be 'random' or 'product'");
    const json p = j.value("precond", json::object());
    rc.precond_kind = get_or<std::string>(p, "kind", "none");
    rc.precond_terms = get_or(p, "terms", 0);
    if (rc.precond_kind != "none" && rc.precond_kind != "expsum")
      throw std::runtime_error("config: precond.kind must be 'none' or 'expsum'");
    const json o = j.value("output", json::object());
    rc.out_dir = get_or<std::string>(o, "dir", "");
  } catch (const json::exception& e) {
    throw std::runtime_error(std::string("config: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw std::runtime_error(std::string("config: ") + e.what());
  }
  if (ov.seed) rc.solver.seed = *ov.seed;
  if (ov.threads) rc.solver.threads = *ov.threads;
  if (ov.tol) rc.solver.tol = *ov.tol;
  if (ov.out) rc.out_dir = *ov.out;
  if (rc.out_dir.empty()) {
    const char* env = std::getenv("LRRAP_OUTPUT_DIR");
    rc.out_dir = env && *env ? env : "lrrap-out";
  }
  try {
    rc.solver.validate();
  } catch (const std::invalid_argument& e) {
    throw std::runtime_error(std::string("config: ") + e.what());
  }
  return rc;
}

RunConfig load_config(const std::string& path, const Overrides& ov) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot read config file '" + path + "'");
  json j;
  try {
    is >> j;
  } catch (const json::exception& e) {
    throw std::runtime_error("config '" + path + "' is not valid JSON: " + e.what());
  }
  return parse_config(j, ov);
}

Problem build_problem(const RunConfig& rc) {
  Problem p;
  const std::string kind = rc.model.at("kind").get<std::string>();
  const auto dims = model_dims(rc.model);
  const int b = rc.solver.b;
  std::optional<OscillatorSpec> osc;
  if (kind == "heisenberg") {
    p.H = heisenberg_mpo(static_cast<int>(dims.size()), get_or(rc.model, "eps", 1e-12));
  } else {
    osc = oscillator_spec(rc.model);
    p.H = oscillator_mpo(*osc, get_or(rc.model, "eps", 1e-12));
  }
  if (rc.precond_kind == "expsum") {
    if (!osc) throw std::runtime_error("config: precond.kind 'expsum' needs the oscillator model");
    p.prec = harmonic_preconditioner(*osc, std::max(1, rc.precond_terms));
  }
  if (rc.init == "product")
    p.X0 = osc ? product_state_block(*osc, b) : product_state_block(static_cast<int>(dims.size()), b);
  else
    p.X0 = random_block(dims, b, rc.solver.rank, rc.solver.seed);
  return p;
}

void write_spectrum(const std::string& path, const std::vector<Level>& levels) {
  auto os = open_out(path);
  os << "index,eigenvalue,residual\n";
  for (size_t i = 0; i < levels.size(); ++i)
    os << i + 1 << ',' << fmt17(levels[i].eigenvalue) << ',' << fmt17(levels[i].residual) << '\n';
}

std::vector<Level> read_spectrum(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot read spectrum file '" + path + "'");
  std::string line;
  if (!std::getline(is, line) || line.rfind("index,eigenvalue", 0) != 0)
    throw std::runtime_error("'" + path + "' is not a spectrum file (bad header)");
  std::vector<Level> out;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::string idx, ev, res;
    std::getline(ls, idx, ',');
    std::getline(ls, ev, ',');
    std::getline(ls, res, ',');
    try {
      out.push_back({std::stod(ev), res.empty() ? 0.0 : std::stod(res)});
    } catch (const std::exception&) {
      throw std::runtime_error("'" + path + "': malformed line '" + line + "'");
    }
  }
  return out;
}

int cmd_solve(const RunConfig& rc) {
  ensure_dir(rc.out_dir);
  const Problem p = build_problem(rc);
  const std::string trace_path = (fs::path(rc.out_dir) / "trace.jsonl").string();
  auto trace = open_out(trace_path);
  SolveResult r;
  try {
    r = lrrap_lobpcg(p.H, p.X0, p.prec, rc.solver, [&](const TraceRow& row) {
      trace << trace_record(row) << '\n';
      trace.flush();
    });
  } catch (const std::exception& e) {
    std::cerr << "solve failed: " << e.what() << '\n';
    return kHardFailure;
  }
  write_spectrum((fs::path(rc.out_dir) / "spectrum.csv").string(), levels_of(r));
  write_checkpoint((fs::path(rc.out_dir) / "checkpoint.lrrap").string(), r.state);
  std::cout << (r.status == SolveStatus::converged ? "converged" : "not converged") << " after " << r.iterations
            << " iterations\n";
  for (Index i = 0; i < r.eigenvalues.size(); ++i)
    std::cout << "  " << i + 1 << "  " << fmt17(r.eigenvalues(i)) << "  residual " << r.residuals(i) << '\n';
  if (!r.diagnostic.empty()) std::cout << r.diagnostic << '\n';
  return r.status == SolveStatus::converged ? kConverged : kNotConverged;
}

int cmd_oracle(const RunConfig& rc) {
  ensure_dir(rc.out_dir);
  const Problem p = build_problem(rc);
  Index total = 1;
  for (Index n : p.H.dims()) total *= n;
  const OracleCaps caps;
  if (total > caps.max_dim) {
    std::cerr << "oracle: dimension " << total << " exceeds the dense oracle cap of " << caps.max_dim << '\n';
    return kHardFailure;
  }
  const Matrix A = op_to_dense(p.H, DenseCaps{caps.max_dim, caps.max_dim});
  const DenseEigs e = dense_eigs(A, rc.solver.b, caps);
  std::vector<Level> levels;
  for (Index i = 0; i < e.values.size(); ++i)
    levels.push_back({e.values(i), (A * e.vectors.col(i) - e.values(i) * e.vectors.col(i)).norm()});
  write_spectrum((fs::path(rc.out_dir) / "oracle.csv").string(), levels);
  for (size_t i = 0; i < levels.size(); ++i) std::cout << "  " << i + 1 << "  " << fmt17(levels[i].eigenvalue) << '\n';
  return kConverged;
}

int cmd_compare(const std::string& a, const std::string& b, double threshold) {
  const auto la = read_spectrum(a), lb = read_spectrum(b);
  if (la.size() != lb.size()) {
    std::cerr << "compare: spectra have different lengths (" << la.size() << " vs " << lb.size() << ")\n";
    return kHardFailure;
  }
  Vector va(la.size()), vb(lb.size());
  std::cout << "level,a,b,delta\n";
  for (size_t i = 0; i < la.size(); ++i) {
    va(i) = la[i].eigenvalue;
    vb(i) = lb[i].eigenvalue;
    std::cout << i + 1 << ',' << fmt17(va(i)) << ',' << fmt17(vb(i)) << ',' << fmt17(va(i) - vb(i)) << '\n';
  }
  const double m = mae(va, vb);
  std::cout << "MAE " << fmt17(m) << '\n';
  return m <= threshold ? kConverged : kAboveThreshold;
}

int cmd_schedule_study(const RunConfig& rc, const std::vector<std::string>& strategies) {
  std::vector<Schedule> parsed;
  for (const auto& s : strategies) parsed.push_back(parse_schedule(s));
  ensure_dir(rc.out_dir);
  const Problem p = build_problem(rc);
  int worst = kConverged;
  for (size_t k = 0; k < parsed.size(); ++k) {
    SolverConfig cfg = rc.solver;
    cfg.schedule = parsed[k];
    SolveResult r;
    try {
      r = lrrap_lobpcg(p.H, p.X0, p.prec, cfg);
    } catch (const std::exception& e) {
      std::cerr << strategies[k] << ": solve failed: " << e.what() << '\n';
      worst = kHardFailure;
      continue;
    }
    const auto& rows = r.state.trace;
    write_trace((fs::path(rc.out_dir) / ("trace_" + strategies[k] + ".jsonl")).string(), rows);
    // Column-wise convergence curves |R_i(iter) - R_i(final)|.
    auto os = open_out((fs::path(rc.out_dir) / ("curves_" + strategies[k] + ".csv")).string());
    os << "iter,column,rayleigh_error,residual\n";
    const auto& last = rows.back().rayleigh;
    for (const auto& row : rows)
      for (size_t i = 0; i < row.rayleigh.size(); ++i)
        os << row.iter << ',' << i + 1 << ',' << fmt17(std::abs(row.rayleigh[i] - last[i])) << ','
           << fmt17(row.residual[i]) << '\n';
    const auto& res = rows.back().residual;
    int above = 0;
    for (double v : res) above += v > cfg.tol;
    std::cout << strategies[k] << ": " << r.iterations << " iterations, max residual "
              << *std::max_element(res.begin(), res.end()) << ", " << above << " of " << res.size()
              << " residuals above tol\n";
    if (r.status != SolveStatus::converged && worst == kConverged) worst = kNotConverged;
  }
  return worst;
}

int cmd_bench(const RunConfig& rc) {
  const Problem p = build_problem(rc);
  const auto t0 = std::chrono::steady_clock::now();
  SolveResult r;
  try {
    r = lrrap_lobpcg(p.H, p.X0, p.prec, rc.solver);
  } catch (const std::exception& e) {
    std::cerr << "bench: solve failed: " << e.what() << '\n';
    return kHardFailure;
  }
  const double sec = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  std::cout << "iterations " << r.iterations << "\nseconds " << sec << "\nms_per_iteration "
            << 1e3 * sec / std::max(1, r.iterations) << "\nmax_residual " << r.residuals.maxCoeff() << '\n';
  return r.status == SolveStatus::converged ? kConverged : kNotConverged;
}

}  // namespace lrrap::app
