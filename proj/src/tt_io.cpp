#include "lrrap/tt_io.hpp"

#include <algorithm>
#include <bit>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

namespace lrrap {

namespace {

constexpr const char* kMagic = "lrrap-tt";

const char* native_endian() { return std::endian::native == std::endian::little ? "little" : "big"; }

void write_doubles(std::ostream& os, const double* p, Index count) {
  os << "data " << count << '\n';
  os.write(reinterpret_cast<const char*>(p), static_cast<std::streamsize>(count * sizeof(double)));
}

struct Header {
  std::string kind;
  bool swap = false;
  std::vector<Index> dims, ranks;
  Index count = 0;
};

std::string expect_key(std::istream& is, const char* key) {
  std::string line;
  if (!std::getline(is, line)) throw FormatError(std::string("container: missing '") + key + "' line");
  std::istringstream ls(line);
  std::string k;
  ls >> k;
  if (k != key) throw FormatError(std::string("container: expected '") + key + "', got '" + k + "'");
  std::string rest;
  std::getline(ls, rest);
  return rest;
}

std::vector<Index> parse_list(const std::string& s) {
  std::istringstream ls(s);
  std::vector<Index> out;
  Index v;
  while (ls >> v) out.push_back(v);
  return out;
}

Header read_header(std::istream& is) {
  Header h;
  std::string magic;
  int version = 0;
  std::string line;
  if (!std::getline(is, line)) throw FormatError("container: empty stream");
  std::istringstream(line) >> magic >> version;
  if (magic != kMagic) throw FormatError("container: bad magic '" + magic + "'");
  if (version != kContainerVersion) throw FormatError("container: unsupported version " + std::to_string(version));
  std::istringstream(expect_key(is, "kind")) >> h.kind;
  std::string endian;
  std::istringstream(expect_key(is, "endian")) >> endian;
  if (endian != "little" && endian != "big") throw FormatError("container: bad endian tag '" + endian + "'");
  h.swap = endian != native_endian();
  int d = 0;
  std::istringstream(expect_key(is, "d")) >> d;
  h.dims = parse_list(expect_key(is, "dims"));
  h.ranks = parse_list(expect_key(is, "ranks"));
  if (d < 1 || static_cast<int>(h.dims.size()) != d || static_cast<int>(h.ranks.size()) != d + 1)
    throw FormatError("container: inconsistent d / dims / ranks");
  std::istringstream(expect_key(is, "data")) >> h.count;
  return h;
}

void read_doubles(std::istream& is, double* p, Index count, bool swap) {
  is.read(reinterpret_cast<char*>(p), static_cast<std::streamsize>(count * sizeof(double)));
  if (!is) throw FormatError("container: truncated core data");
  if (swap) {
    for (Index k = 0; k < count; ++k) {
      unsigned char b[sizeof(double)];
      std::memcpy(b, p + k, sizeof(double));
      std::reverse(b, b + sizeof(double));
      std::memcpy(p + k, b, sizeof(double));
    }
  }
}

template <class T>
void write_header(std::ostream& os, const char* kind, const T& t) {
  os << kMagic << ' ' << kContainerVersion << '\n' << "kind " << kind << '\n';
  os << "endian " << native_endian() << '\n' << "d " << t.order() << '\n' << "dims";
  for (Index n : t.dims()) os << ' ' << n;
  os << '\n' << "ranks";
  for (Index r : t.ranks()) os << ' ' << r;
  os << '\n';
}

}  // namespace

void write_tt(std::ostream& os, const TTVector& x) {
  write_header(os, "vector", x);
  Index total = 0;
  for (const auto& c : x.cores()) total += c.size();
  std::vector<double> buf;
  buf.reserve(total);
  for (const auto& c : x.cores()) buf.insert(buf.end(), c.data(), c.data() + c.size());
  write_doubles(os, buf.data(), total);
  os << '\n';
}

void write_tt(std::ostream& os, const TTOperator& H) {
  write_header(os, "operator", H);
  Index total = 0;
  for (const auto& c : H.cores()) total += c.size();
  std::vector<double> buf;
  buf.reserve(total);
  for (const auto& c : H.cores()) buf.insert(buf.end(), c.data(), c.data() + c.size());
  write_doubles(os, buf.data(), total);
  os << '\n';
}

TTVector read_tt_vector(std::istream& is) {
  Header h = read_header(is);
  if (h.kind != "vector") throw FormatError("container: record is a " + h.kind + ", expected vector");
  std::vector<Core3> cores;
  Index total = 0;
  for (size_t k = 0; k < h.dims.size(); ++k) {
    cores.emplace_back(h.ranks[k], h.dims[k], h.ranks[k + 1]);
    total += cores.back().size();
  }
  if (total != h.count) throw FormatError("container: data count does not match the ranks");
  for (auto& c : cores) read_doubles(is, c.data(), c.size(), h.swap);
  is.ignore(1);
  return TTVector(std::move(cores));
}

TTOperator read_tt_operator(std::istream& is) {
  Header h = read_header(is);
  if (h.kind != "operator") throw FormatError("container: record is a " + h.kind + ", expected operator");
  std::vector<Core4> cores;
  Index total = 0;
  for (size_t k = 0; k < h.dims.size(); ++k) {
    cores.emplace_back(h.ranks[k], h.dims[k], h.ranks[k + 1]);
    total += cores.back().size();
  }
  if (total != h.count) throw FormatError("container: data count does not match the ranks");
  for (auto& c : cores) read_doubles(is, c.data(), c.size(), h.swap);
  is.ignore(1);
  return TTOperator(std::move(cores));
}

void save_vectors(const std::string& path, const std::vector<TTVector>& xs) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot open " + path + " for writing");
  os << "count " << xs.size() << '\n';
  for (const auto& x : xs) write_tt(os, x);
}

std::vector<TTVector> load_vectors(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("cannot open " + path);
  size_t count = 0;
  std::string line;
  std::getline(is, line);
  std::istringstream ls(line);
  std::string key;
  ls >> key >> count;
  if (key != "count") throw FormatError("container: expected 'count' line");
  std::vector<TTVector> out;
  for (size_t k = 0; k < count; ++k) out.push_back(read_tt_vector(is));
  return out;
}

}  // namespace lrrap
