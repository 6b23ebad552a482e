#include "dua/matrix.hpp"

#include <cmath>
#include <string>

#include "dua/errors.hpp"

namespace dua {

namespace {

void require_same_shape(const Matrix& a, const Matrix& b, const char* op) {
    if (!a.same_shape(b)) {
        throw ShapeError(std::string(op) + ": shape mismatch " + std::to_string(a.rows()) +
                         "x" + std::to_string(a.cols()) + " vs " + std::to_string(b.rows()) +
                         "x" + std::to_string(b.cols()));
    }
}

}  // namespace

Matrix::Matrix(std::size_t rows, std::size_t cols, double fill)
    : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

Matrix::Matrix(std::initializer_list<std::initializer_list<double>> rows) {
    rows_ = rows.size();
    cols_ = rows_ == 0 ? 0 : rows.begin()->size();
    data_.reserve(rows_ * cols_);
    for (const auto& r : rows) {
        if (r.size() != cols_) throw ShapeError("Matrix init: ragged rows");
        data_.insert(data_.end(), r.begin(), r.end());
    }
}

void Matrix::fill(double v) {
    for (auto& x : data_) x = v;
}

bool Matrix::all_finite() const {
    for (double x : data_) {
        if (!std::isfinite(x)) return false;
    }
    return true;
}

bool operator==(const Matrix& a, const Matrix& b) {
    return a.same_shape(b) && a.values() == b.values();
}

Matrix matmul(const Matrix& a, const Matrix& b) {
    if (a.cols() != b.rows()) {
        throw ShapeError("matmul: " + std::to_string(a.rows()) + "x" + std::to_string(a.cols()) +
                         " * " + std::to_string(b.rows()) + "x" + std::to_string(b.cols()));
    }
    Matrix out(a.rows(), b.cols());
    const std::size_t n = a.rows(), k = a.cols(), m = b.cols();
    for (std::size_t i = 0; i < n; ++i) {
        const double* ai = a.row(i);
        double* oi = out.row(i);
        for (std::size_t p = 0; p < k; ++p) {
            const double av = ai[p];
            const double* bp = b.row(p);
            for (std::size_t j = 0; j < m; ++j) oi[j] += av * bp[j];
        }
    }
    return out;
}

Matrix transpose(const Matrix& m) {
    Matrix out(m.cols(), m.rows());
    for (std::size_t i = 0; i < m.rows(); ++i)
        for (std::size_t j = 0; j < m.cols(); ++j) out(j, i) = m(i, j);
    return out;
}

Matrix add(const Matrix& a, const Matrix& b) {
    require_same_shape(a, b, "add");
    Matrix out = a;
    for (std::size_t i = 0; i < out.size(); ++i) out.values()[i] += b.values()[i];
    return out;
}

Matrix sub(const Matrix& a, const Matrix& b) {
    require_same_shape(a, b, "sub");
    Matrix out = a;
    for (std::size_t i = 0; i < out.size(); ++i) out.values()[i] -= b.values()[i];
    return out;
}

Matrix hadamard(const Matrix& a, const Matrix& b) {
    require_same_shape(a, b, "hadamard");
    Matrix out = a;
    for (std::size_t i = 0; i < out.size(); ++i) out.values()[i] *= b.values()[i];
    return out;
}

Matrix scale(const Matrix& m, double s) {
    Matrix out = m;
    for (auto& x : out.values()) x *= s;
    return out;
}

void axpy(Matrix& a, double s, const Matrix& b) {
    require_same_shape(a, b, "axpy");
    for (std::size_t i = 0; i < a.size(); ++i) a.values()[i] += s * b.values()[i];
}

Matrix add_row_bias(const Matrix& m, const Matrix& bias) {
    if (bias.rows() != 1 || bias.cols() != m.cols()) {
        throw ShapeError("add_row_bias: bias must be 1x" + std::to_string(m.cols()));
    }
    Matrix out = m;
    for (std::size_t i = 0; i < m.rows(); ++i) {
        double* oi = out.row(i);
        for (std::size_t j = 0; j < m.cols(); ++j) oi[j] += bias(0, j);
    }
    return out;
}

Matrix column_sums(const Matrix& m) {
    Matrix out(1, m.cols());
    for (std::size_t i = 0; i < m.rows(); ++i) {
        const double* mi = m.row(i);
        for (std::size_t j = 0; j < m.cols(); ++j) out(0, j) += mi[j];
    }
    return out;
}

Matrix relu(const Matrix& m) {
    Matrix out = m;
    for (auto& x : out.values()) x = x > 0.0 ? x : 0.0;
    return out;
}

Matrix relu_grad(const Matrix& m) {
    Matrix out(m.rows(), m.cols());
    for (std::size_t i = 0; i < m.size(); ++i) out.values()[i] = m.values()[i] > 0.0 ? 1.0 : 0.0;
    return out;
}

double max_abs(const Matrix& m) {
    double best = 0.0;
    for (double x : m.values()) best = std::max(best, std::fabs(x));
    return best;
}

}  // namespace dua
