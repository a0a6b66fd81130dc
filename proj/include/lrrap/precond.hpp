#pragma once

#include <limits>
#include <vector>

#include "lrrap/tt.hpp"

namespace lrrap {

// B^{-1} = B_1 + ... + B_rho with every B_j of operator rank 1; no terms
// means the identity.
struct Preconditioner {
  std::vector<TTOperator> terms;
  // Worst-case relative error of B^{-1} A on the spectral interval it was
  // built for (NaN when unknown).
  double inversion_error = std::numeric_limits<double>::quiet_NaN();

  bool is_identity() const { return terms.empty(); }
  // Throws ShapeError if a term has an internal rank other than 1 or its
  // mode sizes differ from dims.
  void validate(const std::vector<Index>& dims) const;
};

}  // namespace lrrap
