#include "dua/adam.hpp"

#include <cmath>
#include <string>

#include "dua/errors.hpp"

namespace dua {

AdamState::AdamState(const std::vector<const Matrix*>& shapes, AdamConfig cfg) : cfg_(cfg) {
    if (cfg.lr <= 0.0) throw ConfigError("Adam: learning rate must be positive");
    m_.reserve(shapes.size());
    v_.reserve(shapes.size());
    for (const Matrix* s : shapes) {
        m_.emplace_back(s->rows(), s->cols());
        v_.emplace_back(s->rows(), s->cols());
    }
}

void AdamState::step(const std::vector<Matrix*>& params, const std::vector<const Matrix*>& grads) {
    if (params.size() != m_.size() || grads.size() != m_.size()) {
        throw ShapeError("Adam: parameter group size mismatch");
    }
    ++step_;
    const double bc1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(step_));
    const double bc2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(step_));
    for (std::size_t k = 0; k < params.size(); ++k) {
        Matrix& p = *params[k];
        const Matrix& g = *grads[k];
        if (!p.same_shape(m_[k]) || !g.same_shape(m_[k])) {
            throw ShapeError("Adam: shape mismatch in group element " + std::to_string(k));
        }
        for (std::size_t i = 0; i < p.size(); ++i) {
            const double gi = g.values()[i];
            double& mi = m_[k].values()[i];
            double& vi = v_[k].values()[i];
            mi = cfg_.beta1 * mi + (1.0 - cfg_.beta1) * gi;
            vi = cfg_.beta2 * vi + (1.0 - cfg_.beta2) * gi * gi;
            const double mhat = mi / bc1;
            const double vhat = vi / bc2;
            p.values()[i] -= cfg_.lr * mhat / (std::sqrt(vhat) + cfg_.eps);
        }
    }
}

void AdamState::restore(std::vector<Matrix> m, std::vector<Matrix> v, std::int64_t step) {
    if (m.size() != m_.size() || v.size() != v_.size()) {
        throw ShapeError("Adam: restore size mismatch");
    }
    for (std::size_t k = 0; k < m.size(); ++k) {
        if (!m[k].same_shape(m_[k]) || !v[k].same_shape(v_[k])) {
            throw ShapeError("Adam: restore shape mismatch");
        }
    }
    m_ = std::move(m);
    v_ = std::move(v);
    step_ = step;
}

}  // namespace dua
