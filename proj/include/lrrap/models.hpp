// Benchmark Hamiltonians, initial guesses and the harmonic preconditioner.
#pragma once

#include <vector>

#include "lrrap/precond.hpp"
#include "lrrap/tt.hpp"

namespace lrrap {

// coefficient * kron(factors), sites not listed are identity. Sites are
// zero-based and strictly increasing.
struct SopTerm {
  double coefficient = 1.0;
  std::vector<std::pair<int, Matrix>> factors;
};

// Sum of the terms as an MPO, rounded at relative accuracy eps. Partial sums
// are rounded whenever their rank exceeds rank_flush to bound memory.
TTOperator sop_to_mpo(const std::vector<SopTerm>& terms, const std::vector<Index>& dims, double eps = 1e-12,
                      Index rank_flush = 16);

// Open Heisenberg chain sum_i Sx Sx + Sy Sy + Sz Sz on neighbouring sites with
// Sx = diag(1,-1)/2, Sz = [[0,1],[1,0]]/2 and Sy = (i/2) J, J = [[0,1],[-1,0]]
// (x and z labels swapped against the common convention; same spectrum).
// Only Sy (x) Sy = -J (x) J / 4 enters, which is real.
std::vector<SopTerm> heisenberg_terms(int d);
TTOperator heisenberg_mpo(int d, double eps = 1e-12);

// A listed coupling contributes value * q_{sites[0]} * q_{sites[1]} * ...;
// repeated sites give powers of q on that mode.
struct Coupling {
  std::vector<int> sites;
  double value = 0.0;
};

struct OscillatorSpec {
  std::vector<Index> n;       // basis size per mode
  std::vector<double> omega;  // harmonic frequencies
  std::vector<Coupling> cubic, quartic;

  int d() const { return static_cast<int>(n.size()); }
  void validate() const;
};

// Per-mode matrices in the harmonic-oscillator eigenbasis: the harmonic part
// is diag(omega (k + 1/2)), the position operator is tridiagonal with
// q_{k,k+1} = sqrt((k+1)/2).
Matrix harmonic_matrix(Index n, double omega);
Matrix position_matrix(Index n);

std::vector<SopTerm> oscillator_terms(const OscillatorSpec& spec);
TTOperator oscillator_mpo(const OscillatorSpec& spec, double eps = 1e-12);

struct SpectralBounds {
  double lo = 0.0, hi = 0.0;
};

// Gershgorin enclosure of the harmonic part sum_k I..h_k..I.
SpectralBounds harmonic_bounds(const OscillatorSpec& spec);

// 1/x ~ sum_j weight_j exp(-exponent_j x) on [lo, hi].
struct ExpSum {
  std::vector<double> weight, exponent;
  double max_rel_error = 0.0;  // max |x f(x) - 1| on the interval
};
ExpSum exp_sum_inverse(int rho, SpectralBounds bounds);

Preconditioner harmonic_preconditioner(const OscillatorSpec& spec, int rho, const SpectralBounds* bounds = nullptr);

// b lowest product eigenstates of the harmonic part, ordered by energy
// (ties by the lexicographic order of the occupation numbers).
std::vector<TTVector> product_state_block(const OscillatorSpec& spec, int b);
// b lowest computational-basis states of the diagonal nearest-neighbour part
// sum_i Sx_i Sx_{i+1} of the spin chain.
std::vector<TTVector> product_state_block(int d, int b);

}  // namespace lrrap
