#pragma once

#include <cstdint>
#include <vector>

#include "dua/matrix.hpp"

namespace dua {

struct AdamConfig {
    double lr = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
};

/// Adam state for one parameter group: first/second moment accumulators with
/// the same shapes as the parameters, plus the step counter used for bias
/// correction.
class AdamState {
public:
    AdamState() = default;
    AdamState(const std::vector<const Matrix*>& shapes, AdamConfig cfg);

    /// One update: m <- b1 m + (1-b1) g, v <- b2 v + (1-b2) g^2,
    /// theta <- theta - lr * mhat / (sqrt(vhat) + eps).
    void step(const std::vector<Matrix*>& params, const std::vector<const Matrix*>& grads);

    std::int64_t step_count() const { return step_; }
    const AdamConfig& config() const { return cfg_; }

    // Exposed for checkpointing.
    std::vector<Matrix>& first_moments() { return m_; }
    std::vector<Matrix>& second_moments() { return v_; }
    const std::vector<Matrix>& first_moments() const { return m_; }
    const std::vector<Matrix>& second_moments() const { return v_; }
    void restore(std::vector<Matrix> m, std::vector<Matrix> v, std::int64_t step);

private:
    AdamConfig cfg_;
    std::int64_t step_ = 0;
    std::vector<Matrix> m_, v_;
};

}  // namespace dua
