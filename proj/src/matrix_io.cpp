#include "cglkit/matrix_io.hpp"

#include <charconv>
#include <fstream>
#include <sstream>
#include <vector>

#include "cglkit/error.hpp"

namespace cglkit {
namespace {

struct Header {
  std::size_t n = 0;
  std::size_t k = 1;
  std::string kind;
};

Header parse_header(const std::string& line) {
  constexpr std::string_view prefix = "# cgl-kit matrix";
  if (line.rfind(prefix, 0) != 0) {
    throw Error(ErrorCode::Io, "missing '# cgl-kit matrix' header");
  }
  Header h;
  bool have_n = false;
  std::istringstream ss(line.substr(prefix.size()));
  std::string tok;
  while (ss >> tok) {
    const auto eq = tok.find('=');
    if (eq == std::string::npos) continue;
    const std::string key = tok.substr(0, eq);
    const std::string val = tok.substr(eq + 1);
    try {
      if (key == "n") {
        h.n = std::stoul(val);
        have_n = true;
      } else if (key == "k") {
        h.k = std::stoul(val);
      } else if (key == "kind") {
        h.kind = val;
      }
    } catch (const std::exception&) {
      throw Error(ErrorCode::Io, "bad header field '" + tok + "'");
    }
  }
  if (!have_n || h.k == 0) throw Error(ErrorCode::Io, "header lacks n or has k=0");
  return h;
}

double parse_double(std::string_view field) {
  while (!field.empty() && (field.front() == ' ' || field.front() == '\t')) field.remove_prefix(1);
  while (!field.empty() && (field.back() == ' ' || field.back() == '\r')) field.remove_suffix(1);
  double v = 0.0;
  const auto res = std::from_chars(field.data(), field.data() + field.size(), v);
  if (res.ec != std::errc() || res.ptr != field.data() + field.size()) {
    throw Error(ErrorCode::Io, "cannot parse number '" + std::string(field) + "'");
  }
  return v;
}

RowMatrix read_body(std::istream& in, std::size_t dim) {
  RowMatrix m(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim));
  std::string line;
  for (std::size_t r = 0; r < dim; ++r) {
    if (!std::getline(in, line)) throw Error(ErrorCode::Io, "matrix has too few rows");
    std::size_t c = 0;
    std::size_t pos = 0;
    while (pos <= line.size()) {
      const auto next = std::min(line.find(',', pos), line.size());
      if (c >= dim) throw Error(ErrorCode::Io, "row " + std::to_string(r) + " has too many columns");
      m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c++)) =
          parse_double(std::string_view(line).substr(pos, next - pos));
      pos = next + 1;
    }
    if (c != dim) throw Error(ErrorCode::Io, "row " + std::to_string(r) + " has too few columns");
  }
  return m;
}

void write_body(std::ostream& out, const RowMatrix& m) {
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      if (j) out << ',';
      out << format_double(m(i, j));
    }
    out << '\n';
  }
}

std::ofstream open_out(const std::string& path) {
  std::ofstream f(path);
  if (!f) throw Error(ErrorCode::Io, "cannot open '" + path + "' for writing");
  return f;
}

std::ifstream open_in(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw Error(ErrorCode::Io, "cannot open '" + path + "'");
  return f;
}

}  // namespace

std::string format_double(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

void write_operator_csv(std::ostream& out, const OperatorMatrix& op) {
  out << "# cgl-kit matrix n=" << op.n << " k=" << op.k << " kind=" << to_string(op.kind) << '\n';
  write_body(out, op.entries);
}

void write_operator_csv(const std::string& path, const OperatorMatrix& op) {
  auto f = open_out(path);
  write_operator_csv(f, op);
}

OperatorMatrix read_operator_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw Error(ErrorCode::Io, "empty matrix file");
  const Header h = parse_header(line);
  OperatorMatrix op;
  op.n = h.n;
  op.k = h.k;
  op.kind = operator_kind_from_string(h.kind.empty() ? "L" : h.kind);
  op.entries = read_body(in, h.n * h.k);
  return op;
}

OperatorMatrix read_operator_csv(const std::string& path) {
  auto f = open_in(path);
  return read_operator_csv(f);
}

void write_matrix_csv(std::ostream& out, const RowMatrix& m, std::string_view kind) {
  if (m.rows() != m.cols()) throw Error(ErrorCode::DimensionMismatch, "matrix CSV needs a square matrix");
  out << "# cgl-kit matrix n=" << m.rows() << " k=1 kind=" << kind << '\n';
  write_body(out, m);
}

void write_matrix_csv(const std::string& path, const RowMatrix& m, std::string_view kind) {
  auto f = open_out(path);
  write_matrix_csv(f, m, kind);
}

RowMatrix read_matrix_csv(std::istream& in, std::string* kind) {
  std::string line;
  if (!std::getline(in, line)) throw Error(ErrorCode::Io, "empty matrix file");
  const Header h = parse_header(line);
  if (kind) *kind = h.kind;
  return read_body(in, h.n * h.k);
}

RowMatrix read_matrix_csv(const std::string& path, std::string* kind) {
  auto f = open_in(path);
  return read_matrix_csv(f, kind);
}

}  // namespace cglkit
