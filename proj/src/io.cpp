#include "cricci/io.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iostream>
#include <sstream>

namespace cricci {

namespace {

std::vector<std::string> read_lines(const std::string& path) {
    std::ifstream in(path);
    if (!in) fail(ErrorCode::InvalidInput, "cannot open '" + path + "'");
    std::vector<std::string> lines;
    std::string line;
    while (std::getline(in, line)) {
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        while (!line.empty() && (line.back() == '\r' || line.back() == ' ' ||
                                 line.back() == '\t'))
            line.pop_back();
        if (line.find_first_not_of(" \t") == std::string::npos) continue;
        lines.push_back(line);
    }
    return lines;
}

std::vector<std::string> split(const std::string& line, char delim) {
    std::vector<std::string> out;
    std::stringstream ss(line);
    std::string tok;
    if (delim == ' ') {
        while (ss >> tok) out.push_back(tok);
    } else {
        while (std::getline(ss, tok, delim)) {
            const auto b = tok.find_first_not_of(" \t");
            const auto e = tok.find_last_not_of(" \t");
            out.push_back(b == std::string::npos
                              ? std::string()
                              : tok.substr(b, e - b + 1));
        }
    }
    return out;
}

bool parse_double(const std::string& tok, double& value) {
    try {
        std::size_t used = 0;
        value = std::stod(tok, &used);
        return used == tok.size();
    } catch (...) {
        return false;
    }
}

double require_double(const std::string& tok, const std::string& path,
                      std::size_t lineno) {
    double v = 0;
    if (!parse_double(tok, v) || !std::isfinite(v))
        fail(ErrorCode::InvalidInput,
             path + ": cannot parse number '" + tok + "' (entry line " +
                 std::to_string(lineno + 1) + ")");
    return v;
}

} // namespace

std::vector<Edge> read_edge_list(const std::string& path) {
    std::vector<Edge> edges;
    const auto lines = read_lines(path);
    for (std::size_t k = 0; k < lines.size(); ++k) {
        const auto toks = split(lines[k], ' ');
        if (toks.size() != 2 && toks.size() != 3)
            fail(ErrorCode::InvalidInput,
                 path + ": expected 'u v [w]' (entry line " +
                     std::to_string(k + 1) + ")");
        Edge e{toks[0], toks[1], 1.0};
        if (toks.size() == 3) e.w = require_double(toks[2], path, k);
        edges.push_back(std::move(e));
    }
    return edges;
}

namespace {

std::vector<std::vector<double>> numeric_rows(const std::string& path,
                                              bool allow_empty = false) {
    const auto lines = read_lines(path);
    if (lines.empty()) {
        if (allow_empty) return {};
        fail(ErrorCode::InvalidInput, path + ": no data rows");
    }
    std::vector<std::vector<double>> rows;
    for (std::size_t k = 0; k < lines.size(); ++k) {
        const char delim = lines[k].find(',') != std::string::npos ? ',' : ' ';
        const auto toks = split(lines[k], delim);
        std::vector<double> row;
        bool ok = true;
        for (const auto& t : toks) {
            double v = 0;
            if (!parse_double(t, v)) {
                ok = false;
                break;
            }
            row.push_back(v);
        }
        if (!ok) {
            if (k == 0 && lines.size() > 1) continue; // header row
            fail(ErrorCode::InvalidInput,
                 path + ": non-numeric entry (entry line " +
                     std::to_string(k + 1) + ")");
        }
        rows.push_back(std::move(row));
    }
    if (rows.empty()) {
        if (allow_empty) return {};
        fail(ErrorCode::InvalidInput, path + ": no numeric rows");
    }
    for (const auto& r : rows)
        if (r.size() != rows[0].size())
            fail(ErrorCode::InvalidInput, path + ": rows have mixed lengths");
    return rows;
}

} // namespace

Matrix read_matrix_csv(const std::string& path) {
    const auto rows = numeric_rows(path);
    Matrix M(rows.size(), rows[0].size());
    for (std::size_t i = 0; i < rows.size(); ++i)
        for (std::size_t j = 0; j < rows[i].size(); ++j)
            M(static_cast<int>(i), static_cast<int>(j)) = rows[i][j];
    return M;
}

std::vector<Vector> read_points_csv(const std::string& path) {
    const auto rows = numeric_rows(path, true);
    std::vector<Vector> pts(rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        pts[i].resize(rows[i].size());
        for (std::size_t j = 0; j < rows[i].size(); ++j)
            pts[i](static_cast<int>(j)) = rows[i][j];
    }
    return pts;
}

Vector read_measure_csv(const std::string& path, int n) {
    const auto rows = numeric_rows(path);
    Vector w = Vector::Zero(n);
    for (const auto& r : rows) {
        if (r.size() != 2)
            fail(ErrorCode::InvalidInput,
                 path + ": expected rows 'index,weight'");
        const int idx = static_cast<int>(std::llround(r[0]));
        if (idx < 0 || idx >= n || std::abs(r[0] - idx) > 1e-9)
            fail(ErrorCode::InvalidInput,
                 path + ": index " + std::to_string(r[0]) +
                     " outside the space (size " + std::to_string(n) + ")");
        w(idx) += r[1];
    }
    return w;
}

SparseMatrix read_operator_file(const std::string& path) {
    const auto lines = read_lines(path);
    if (lines.empty())
        fail(ErrorCode::InvalidInput, path + ": no data rows");
    const bool dense = lines[0].find(',') != std::string::npos;
    if (dense) {
        const Matrix M = read_matrix_csv(path);
        if (M.rows() != M.cols())
            fail(ErrorCode::NonSquareMatrix,
                 path + ": operator matrix must be square");
        return SparseMatrix(M.sparseView());
    }
    // coordinate list `i j value`
    std::vector<Eigen::Triplet<double>> trips;
    int n = 0;
    for (std::size_t k = 0; k < lines.size(); ++k) {
        const auto toks = split(lines[k], ' ');
        if (toks.size() != 3)
            fail(ErrorCode::InvalidInput,
                 path + ": expected 'i j value' (entry line " +
                     std::to_string(k + 1) + ")");
        const double fi = require_double(toks[0], path, k);
        const double fj = require_double(toks[1], path, k);
        const int i = static_cast<int>(std::llround(fi));
        const int j = static_cast<int>(std::llround(fj));
        if (i < 0 || j < 0 || std::abs(fi - i) > 1e-9 ||
            std::abs(fj - j) > 1e-9)
            fail(ErrorCode::InvalidInput,
                 path + ": indices must be nonnegative integers (entry line " +
                     std::to_string(k + 1) + ")");
        trips.emplace_back(i, j, require_double(toks[2], path, k));
        n = std::max({n, i + 1, j + 1});
    }
    SparseMatrix M(n, n);
    M.setFromTriplets(trips.begin(), trips.end());
    return M;
}

void write_text_file(const std::string& path, const std::string& text) {
    if (path.empty() || path == "-") {
        std::cout << text;
        return;
    }
    std::ofstream out(path);
    if (!out) fail(ErrorCode::InvalidInput, "cannot write '" + path + "'");
    out << text;
}

std::string csv_escape(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    out += '"';
    return out;
}

} // namespace cricci
