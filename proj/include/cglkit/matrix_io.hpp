#pragma once

#include <iosfwd>
#include <string>

#include "cglkit/connection_graph.hpp"

namespace cglkit {

// Dense CSV: a `# cgl-kit matrix n=<n> k=<k> kind=<kind>` header line, then
// one comma-separated line per row.

void write_operator_csv(std::ostream& out, const OperatorMatrix& op);
void write_operator_csv(const std::string& path, const OperatorMatrix& op);

/// Degrees are not stored; the returned operator has an empty DegreeVector.
OperatorMatrix read_operator_csv(std::istream& in);
OperatorMatrix read_operator_csv(const std::string& path);

/// Plain matrices (affinities, distance tables) use the same layout with
/// k=1 and a free-form kind label.
void write_matrix_csv(std::ostream& out, const RowMatrix& m, std::string_view kind);
void write_matrix_csv(const std::string& path, const RowMatrix& m, std::string_view kind);
RowMatrix read_matrix_csv(std::istream& in, std::string* kind = nullptr);
RowMatrix read_matrix_csv(const std::string& path, std::string* kind = nullptr);

/// Formats a double so that reading it back gives the same bits.
std::string format_double(double v);

}  // namespace cglkit
