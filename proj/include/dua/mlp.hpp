#pragma once

#include <cstddef>
#include <vector>

#include "dua/matrix.hpp"
#include "dua/rng.hpp"

namespace dua {

/// Parameters of the fixed 3-layer fully connected network: two ReLU hidden
/// layers and a linear output. Weight w_k is (out_k x in_k); biases are rows.
/// The same struct doubles as a gradient container (shapes are identical).
struct MlpParams {
    Matrix w1, b1;  // (h1 x in), (1 x h1)
    Matrix w2, b2;  // (h2 x h1), (1 x h2)
    Matrix w3, b3;  // (out x h2), (1 x out)

    std::size_t in_width() const { return w1.cols(); }
    std::size_t hidden1() const { return w1.rows(); }
    std::size_t hidden2() const { return w2.rows(); }
    std::size_t out_width() const { return w3.rows(); }

    /// Fixed-order traversal of the six parameter arrays.
    std::vector<Matrix*> params();
    std::vector<const Matrix*> params() const;

    static MlpParams zeros(std::size_t in, std::size_t h1, std::size_t h2, std::size_t out);

    /// Gaussian weights with per-layer std sqrt(2 / fan_in); zero biases.
    static MlpParams he_init(std::size_t in, std::size_t h1, std::size_t h2, std::size_t out,
                             Rng& rng);

    void validate() const;
};

/// Pre- and post-activations retained by the forward pass for the backward
/// pass. Tied to the parameter shapes it was produced with.
struct MlpCache {
    Matrix input;   // N x in
    Matrix z1, a1;  // N x h1
    Matrix z2, a2;  // N x h2
};

/// Batched forward map: rows of `input` are independent samples.
/// output = relu(relu(input w1' + b1) w2' + b2) w3' + b3.
Matrix mlp_forward(const MlpParams& p, const Matrix& input, MlpCache* cache = nullptr);

/// Exact reverse-mode gradients of the forward map. `out_grad` holds
/// dLoss/dOutput; returns parameter gradients and, if `input_grad` is
/// non-null, dLoss/dInput. Throws ShapeError if the cache does not match the
/// parameters or the out_grad shape.
MlpParams mlp_backward(const MlpParams& p, const MlpCache& cache, const Matrix& out_grad,
                       Matrix* input_grad = nullptr);

}  // namespace dua
