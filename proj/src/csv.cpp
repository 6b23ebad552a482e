#include "dua/csv.hpp"

#include <charconv>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "dua/errors.hpp"

namespace dua {

std::string format_double(double x) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof(buf), x);
    return std::string(buf, res.ptr);
}

namespace {

double parse_cell(const std::string& cell, const std::filesystem::path& path, std::size_t row,
                  std::size_t col) {
    const char* begin = cell.c_str();
    char* end = nullptr;
    errno = 0;
    const double value = std::strtod(begin, &end);
    // Allow surrounding spaces, nothing else.
    while (end && *end == ' ') ++end;
    const char* start = begin;
    while (*start == ' ') ++start;
    if (end == begin || start == end || (end && *end != '\0')) {
        throw DataError(path.string() + ": row " + std::to_string(row) + ", col " +
                        std::to_string(col) + ": cannot parse '" + cell + "' as a number");
    }
    if (!std::isfinite(value)) {
        throw DataError(path.string() + ": row " + std::to_string(row) + ", col " +
                        std::to_string(col) + ": non-finite value '" + cell + "'");
    }
    return value;
}

std::vector<std::string> split_line(const std::string& line) {
    std::vector<std::string> cells;
    std::string cell;
    std::stringstream ss(line);
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (!line.empty() && line.back() == ',') cells.emplace_back();
    return cells;
}

}  // namespace

Matrix read_csv_matrix(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open file: " + path.string());
    std::vector<std::vector<double>> rows;
    std::string line;
    std::size_t lineno = 0;
    std::size_t width = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        auto cells = split_line(line);
        if (width == 0) {
            width = cells.size();
        } else if (cells.size() != width) {
            throw DataError(path.string() + ": row " + std::to_string(lineno) + " has " +
                            std::to_string(cells.size()) + " cells, expected " +
                            std::to_string(width));
        }
        std::vector<double> parsed(cells.size());
        for (std::size_t c = 0; c < cells.size(); ++c) {
            parsed[c] = parse_cell(cells[c], path, lineno, c + 1);
        }
        rows.push_back(std::move(parsed));
    }
    if (rows.empty()) throw DataError("empty file: " + path.string());
    Matrix out(rows.size(), width);
    for (std::size_t i = 0; i < rows.size(); ++i)
        for (std::size_t j = 0; j < width; ++j) out(i, j) = rows[i][j];
    return out;
}

void write_csv_matrix(const Matrix& m, const std::filesystem::path& path) {
    std::string content;
    content.reserve(m.size() * 12);
    for (std::size_t i = 0; i < m.rows(); ++i) {
        for (std::size_t j = 0; j < m.cols(); ++j) {
            if (j) content += ',';
            content += format_double(m(i, j));
        }
        content += '\n';
    }
    atomic_write_text(path, content);
}

std::vector<int> read_csv_labels(const std::filesystem::path& path) {
    Matrix m = read_csv_matrix(path);
    if (m.cols() != 1) {
        throw DataError(path.string() + ": labels file must have exactly one column, got " +
                        std::to_string(m.cols()));
    }
    std::vector<int> labels(m.rows());
    for (std::size_t i = 0; i < m.rows(); ++i) {
        const double v = m(i, 0);
        const int li = static_cast<int>(v);
        if (static_cast<double>(li) != v) {
            throw DataError(path.string() + ": row " + std::to_string(i + 1) +
                            ": label is not an integer");
        }
        labels[i] = li;
    }
    return labels;
}

void write_csv_labels(const std::vector<int>& labels, const std::filesystem::path& path) {
    std::string content;
    for (int l : labels) {
        content += std::to_string(l);
        content += '\n';
    }
    atomic_write_text(path, content);
}

void atomic_write_text(const std::filesystem::path& path, const std::string& content) {
    std::filesystem::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw DataError("cannot write file: " + tmp.string());
        out << content;
        if (!out) throw DataError("write failed: " + tmp.string());
    }
    std::filesystem::rename(tmp, path);
}

std::string read_text(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open file: " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace dua
