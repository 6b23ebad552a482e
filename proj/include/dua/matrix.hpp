#pragma once

#include <cstddef>
#include <initializer_list>
#include <vector>

namespace dua {

/// Dense row-major matrix of doubles. Rows index samples throughout the
/// library; a vector is represented as a 1xN matrix.
class Matrix {
public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols, double fill = 0.0);
    Matrix(std::initializer_list<std::initializer_list<double>> rows);

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    std::size_t size() const { return data_.size(); }
    bool empty() const { return data_.empty(); }

    double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
    double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

    double* data() { return data_.data(); }
    const double* data() const { return data_.data(); }
    double* row(std::size_t r) { return data_.data() + r * cols_; }
    const double* row(std::size_t r) const { return data_.data() + r * cols_; }
    std::vector<double>& values() { return data_; }
    const std::vector<double>& values() const { return data_; }

    bool same_shape(const Matrix& other) const {
        return rows_ == other.rows_ && cols_ == other.cols_;
    }

    void fill(double v);
    bool all_finite() const;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

bool operator==(const Matrix& a, const Matrix& b);

Matrix matmul(const Matrix& a, const Matrix& b);
Matrix transpose(const Matrix& m);

Matrix add(const Matrix& a, const Matrix& b);
Matrix sub(const Matrix& a, const Matrix& b);
Matrix hadamard(const Matrix& a, const Matrix& b);
Matrix scale(const Matrix& m, double s);

// a += s * b, shapes must match.
void axpy(Matrix& a, double s, const Matrix& b);

// Adds a 1xC bias row to every row of m.
Matrix add_row_bias(const Matrix& m, const Matrix& bias);

// Sums the rows of m into a 1xC matrix.
Matrix column_sums(const Matrix& m);

Matrix relu(const Matrix& m);
// Elementwise indicator x > 0 (0 at x == 0).
Matrix relu_grad(const Matrix& m);

double max_abs(const Matrix& m);

}  // namespace dua
