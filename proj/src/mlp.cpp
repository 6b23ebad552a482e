#include "dua/mlp.hpp"

#include <cmath>
#include <string>

#include "dua/errors.hpp"

namespace dua {

std::vector<Matrix*> MlpParams::params() {
    return {&w1, &b1, &w2, &b2, &w3, &b3};
}

std::vector<const Matrix*> MlpParams::params() const {
    return {&w1, &b1, &w2, &b2, &w3, &b3};
}

MlpParams MlpParams::zeros(std::size_t in, std::size_t h1, std::size_t h2, std::size_t out) {
    if (in == 0 || h1 == 0 || h2 == 0 || out == 0) {
        throw ConfigError("MlpParams: all layer widths must be positive");
    }
    MlpParams p;
    p.w1 = Matrix(h1, in);
    p.b1 = Matrix(1, h1);
    p.w2 = Matrix(h2, h1);
    p.b2 = Matrix(1, h2);
    p.w3 = Matrix(out, h2);
    p.b3 = Matrix(1, out);
    return p;
}

MlpParams MlpParams::he_init(std::size_t in, std::size_t h1, std::size_t h2, std::size_t out,
                             Rng& rng) {
    MlpParams p = zeros(in, h1, h2, out);
    for (Matrix* w : {&p.w1, &p.w2, &p.w3}) {
        const double sd = std::sqrt(2.0 / static_cast<double>(w->cols()));
        for (auto& x : w->values()) x = sd * rng.normal();
    }
    return p;
}

void MlpParams::validate() const {
    const bool ok = b1.rows() == 1 && b1.cols() == w1.rows() && w2.cols() == w1.rows() &&
                    b2.rows() == 1 && b2.cols() == w2.rows() && w3.cols() == w2.rows() &&
                    b3.rows() == 1 && b3.cols() == w3.rows();
    if (!ok) throw ShapeError("MlpParams: inconsistent layer shapes");
}

Matrix mlp_forward(const MlpParams& p, const Matrix& input, MlpCache* cache) {
    p.validate();
    if (input.cols() != p.in_width()) {
        throw ShapeError("mlp_forward: input width " + std::to_string(input.cols()) +
                         " != expected " + std::to_string(p.in_width()));
    }
    Matrix z1 = add_row_bias(matmul(input, transpose(p.w1)), p.b1);
    Matrix a1 = relu(z1);
    Matrix z2 = add_row_bias(matmul(a1, transpose(p.w2)), p.b2);
    Matrix a2 = relu(z2);
    Matrix out = add_row_bias(matmul(a2, transpose(p.w3)), p.b3);
    if (cache) {
        cache->input = input;
        cache->z1 = std::move(z1);
        cache->a1 = std::move(a1);
        cache->z2 = std::move(z2);
        cache->a2 = std::move(a2);
    }
    return out;
}

namespace {

void check_cache(const MlpParams& p, const MlpCache& cache, const Matrix& out_grad) {
    const std::size_t n = cache.input.rows();
    const bool ok = cache.input.cols() == p.in_width() && cache.z1.rows() == n &&
                    cache.z1.cols() == p.hidden1() && cache.z1.same_shape(cache.a1) &&
                    cache.z2.rows() == n && cache.z2.cols() == p.hidden2() &&
                    cache.z2.same_shape(cache.a2) && out_grad.rows() == n &&
                    out_grad.cols() == p.out_width();
    if (!ok) throw ShapeError("mlp_backward: cache does not match parameters/out_grad");
}

}  // namespace

MlpParams mlp_backward(const MlpParams& p, const MlpCache& cache, const Matrix& out_grad,
                       Matrix* input_grad) {
    p.validate();
    check_cache(p, cache, out_grad);

    MlpParams g = MlpParams::zeros(p.in_width(), p.hidden1(), p.hidden2(), p.out_width());

    // Output layer: out = a2 w3' + b3.
    g.w3 = matmul(transpose(out_grad), cache.a2);
    g.b3 = column_sums(out_grad);
    Matrix da2 = matmul(out_grad, p.w3);

    // Hidden layer 2: a2 = relu(z2), z2 = a1 w2' + b2.
    Matrix dz2 = hadamard(da2, relu_grad(cache.z2));
    g.w2 = matmul(transpose(dz2), cache.a1);
    g.b2 = column_sums(dz2);
    Matrix da1 = matmul(dz2, p.w2);

    // Hidden layer 1: a1 = relu(z1), z1 = input w1' + b1.
    Matrix dz1 = hadamard(da1, relu_grad(cache.z1));
    g.w1 = matmul(transpose(dz1), cache.input);
    g.b1 = column_sums(dz1);
    if (input_grad) *input_grad = matmul(dz1, p.w1);

    return g;
}

}  // namespace dua
