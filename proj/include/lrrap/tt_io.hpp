// Self-describing container for TT vectors and operators.
//
// Each record is a short text header followed by the raw core data in the
// in-memory layout:
//
//   lrrap-tt 1
//   kind vector          (or: operator)
//   endian little
//   d 3
//   dims 2 2 2
//   ranks 1 2 2 1
//   data <count>\n<count little-endian doubles>
//
// Several records may be concatenated in one file.
#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "lrrap/tt.hpp"

namespace lrrap {

class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr int kContainerVersion = 1;

void write_tt(std::ostream& os, const TTVector& x);
void write_tt(std::ostream& os, const TTOperator& H);
TTVector read_tt_vector(std::istream& is);
TTOperator read_tt_operator(std::istream& is);

void save_vectors(const std::string& path, const std::vector<TTVector>& xs);
std::vector<TTVector> load_vectors(const std::string& path);

}  // namespace lrrap
