#pragma once

#include <string>
#include <vector>

#include "cricci/builders.hpp"
#include "cricci/generator.hpp"
#include "cricci/space.hpp"

namespace cricci {

// Text inputs accept blank lines and '#' comments throughout.

// One edge per line: `u v [w]`, whitespace-separated, arbitrary string labels.
std::vector<Edge> read_edge_list(const std::string& path);

// Comma-separated numeric matrix; a non-numeric first row is treated as a
// header and skipped.
Matrix read_matrix_csv(const std::string& path);

// One point per row, numeric columns = ambient coordinates.
std::vector<Vector> read_points_csv(const std::string& path);

// Rows `index,weight`; unlisted indices get weight 0.
Vector read_measure_csv(const std::string& path, int n);

// Dense comma-separated matrix, or coordinate list `i j value`
// (whitespace-separated, size inferred from the largest index).
SparseMatrix read_operator_file(const std::string& path);

// path "-" writes to standard output.
void write_text_file(const std::string& path, const std::string& text);

std::string csv_escape(const std::string& s);

} // namespace cricci
