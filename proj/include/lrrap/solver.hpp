// Block eigensolver on the fixed-rank TT manifold. Every iteration projects
// the search space onto the tangent space of a single iterate x_t, solves the
// small coefficient problem and retracts each column back to rank r.
#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "lrrap/coeff.hpp"
#include "lrrap/precond.hpp"
#include "lrrap/tangent.hpp"
#include "lrrap/tt.hpp"

namespace lrrap {

enum class Schedule { first_only, argmax, random, optimal };

Schedule parse_schedule(const std::string& name);  // throws std::invalid_argument
std::string to_string(Schedule s);

struct SolverConfig {
  int b = 1;
  Index rank = 1;
  double tol = 1e-8;
  int max_iters = 300;
  Schedule schedule = Schedule::argmax;
  // Keep t = 1 until the first column's residual drops below phase1_tol
  // (tol when negative), for at most phase1_cap iterations.
  bool phase1 = true;
  double phase1_tol = -1.0;
  int phase1_cap = 20;
  std::uint64_t seed = 0;
  // Newton polish is off here: the trace is flat under rotations inside the
  // block, and the polish drifts along them, mixing converged columns.
  CoeffOptions coeff = [] {
    CoeffOptions o;
    o.polish = false;
    return o;
  }();
  // Search directions are kept as TT vectors of rank <= p_rank (2r when <= 0).
  Index p_rank = 0;
  MatvecPath matvec = MatvecPath::fused;
  // Halve the correction (up to 3 times) when the retracted block raises the
  // Rayleigh trace. Off by default.
  bool line_search = false;
  int threads = 1;  // 0 = all cores
  // Record wall-clock time in the trace; off keeps reruns byte-identical.
  bool record_time = false;

  void validate() const;
};

struct TraceRow {
  int iter = 0;
  int t_index = 0;  // 1-based anchor used for this iteration's update, 0 if none
  std::vector<double> rayleigh, residual;
  double coeff_residual = 0.0;  // KKT residual of the coefficient solve
  double wall_ms = 0.0;
};

struct SolverState {
  std::vector<TTVector> X, P;  // P empty before the first update
  Vector rayleigh, rayleigh_prev;
  int t = 0;  // zero-based anchor of the last update
  int iter = 0;
  bool in_phase1 = true;
  std::vector<TraceRow> trace;
};

enum class SolveStatus { converged, max_iters };

struct SolveResult {
  Vector eigenvalues;  // ascending
  Vector residuals;    // matching eigenvalues
  std::vector<TTVector> X;
  SolveStatus status = SolveStatus::max_iters;
  int iterations = 0;
  int trace_increases = 0;  // iterations where the Rayleigh sum went up
  std::string diagnostic;
  SolverState state;  // unsorted final state, usable for checkpoints
};

class SolverError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// <x, Hx> / <x, x>; throws std::invalid_argument for x = 0.
double rayleigh(const TTOperator& H, const TTVector& x);

// P B^{-1} (H x_i - theta_i x_i) at base, one entry per column. Each term
// uses project_matvec with B_j H (an operator of the same rank as H), so
// B^{-1} H is never formed.
std::vector<TangentVector> projected_residual_block(const BasePtr& base, const TTOperator& H,
                                                    const std::vector<TTVector>& X, const Vector& theta,
                                                    const Preconditioner& prec, MatvecPath path = MatvecPath::fused);

// Zero-based index. argmax picks the largest |(prev - cur) / cur| (cur = 0
// counts as infinite, ties go to the smaller index); optimal needs objective
// and picks its minimizer.
int choose_tangent_index(const Vector& prev, const Vector& cur, Schedule s, std::mt19937_64& rng,
                         const std::function<double(int)>& objective = {});

// Gram matrices from tangent data at one base. V holds 3b members, PX and
// PHX the projections of x_i and H x_i, PHV the projections of H embed(V_j).
GramSet assemble_grams(const std::vector<TTVector>& X, const std::vector<TangentVector>& V,
                       const std::vector<TangentVector>& PX, const std::vector<TangentVector>& PHV,
                       const std::vector<TangentVector>& PHX, const Vector& diagXtHX);

struct Retraction {
  std::vector<TTVector> X;  // unit norm, rank <= r
  std::vector<TTVector> P;  // new search directions
  std::vector<Index> pre_rounding_rank;
};

// Column i becomes T_r(x_i c_i + embed(sum_j C(j,i) V_j)), renormalized.
// The anchor column t folds c_t x_t into the tangent sum (V[t] = P x_t), so
// its pre-rounding rank is <= 2r; the others are <= 3r. P_i is the embedding
// of the V[b:3b] part rounded to p_rank; when directions (2b members) is
// given, C[b:3b] is applied to those instead. Throws SolverError if a rank
// bound is violated.
Retraction assemble_and_retract(const std::vector<TTVector>& X, const Coefficients& co,
                                const std::vector<TangentVector>& V, Index r, int t, Index p_rank = 0,
                                double step = 1.0, const std::vector<TangentVector>* directions = nullptr);

using IterationObserver = std::function<void(const TraceRow&)>;

SolveResult lrrap_lobpcg(const TTOperator& H, const std::vector<TTVector>& X0, const Preconditioner& prec,
                         const SolverConfig& cfg, const IterationObserver& observer = {},
                         const SolverState* resume = nullptr);

// Seeded random rank-r block, orthonormalized by Gram-Schmidt with rounding.
std::vector<TTVector> random_block(const std::vector<Index>& dims, int b, Index r, std::uint64_t seed);

void write_checkpoint(const std::string& path, const SolverState& s);
SolverState read_checkpoint(const std::string& path);

// One JSON object per line; schema is versioned by the "schema" key.
std::string trace_record(const TraceRow& row);
inline constexpr int kTraceSchema = 1;

}  // namespace lrrap
