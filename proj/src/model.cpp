#include "dua/model.hpp"

#include <algorithm>
#include <cmath>

#include "dua/errors.hpp"

namespace dua {

std::string to_string(Objective o) {
    return o == Objective::dua ? "dua" : "rnets";
}

Objective objective_from_string(const std::string& s) {
    if (s == "dua") return Objective::dua;
    if (s == "rnets") return Objective::rnets;
    throw ConfigError("unknown objective '" + s + "' (expected dua or rnets)");
}

std::size_t ModelShape::resolved_hidden1() const {
    return hidden1 != 0 ? hidden1 : std::max<std::size_t>(latent_dim, 16);
}

std::size_t ModelShape::resolved_hidden2() const {
    return hidden2 != 0 ? hidden2 : std::max<std::size_t>(2 * latent_dim, 32);
}

std::pair<std::vector<RNet>, LatentTable> init_model(const std::vector<std::size_t>& view_widths,
                                                     const ModelShape& shape, std::size_t samples,
                                                     Rng& rng) {
    if (shape.latent_dim == 0 || samples == 0) {
        throw ConfigError("init_model: latent dim and sample count must be positive");
    }
    if (view_widths.empty()) throw ConfigError("init_model: at least one view required");
    for (std::size_t w : view_widths) {
        if (w == 0) throw ConfigError("init_model: view widths must be positive");
    }
    if (shape.init_scale < 0.0) throw ConfigError("init_model: init_scale must be nonnegative");

    LatentTable latents;
    latents.h = Matrix(samples, shape.latent_dim);
    for (auto& x : latents.h.values()) x = shape.init_scale * rng.normal();

    const std::size_t h1 = shape.resolved_hidden1();
    const std::size_t h2 = shape.resolved_hidden2();
    std::vector<RNet> nets;
    nets.reserve(view_widths.size());
    for (std::size_t w : view_widths) {
        RNet net;
        net.mean_head = MlpParams::he_init(shape.latent_dim, h1, h2, w, rng);
        net.sigma_head = MlpParams::he_init(shape.latent_dim, h1, h2, 1, rng);
        nets.push_back(std::move(net));
    }
    return {std::move(nets), std::move(latents)};
}

namespace {

double clamp_log_sigma(double raw) {
    return std::clamp(raw, kLogSigmaMin, kLogSigmaMax);
}

void check_alignment(const MultiViewDataset& data, const std::vector<ViewPrediction>& preds) {
    if (preds.size() != data.view_count()) {
        throw ShapeError("loss: prediction count " + std::to_string(preds.size()) +
                         " != view count " + std::to_string(data.view_count()));
    }
    for (std::size_t v = 0; v < preds.size(); ++v) {
        if (!preds[v].mu.same_shape(data.views[v]) ||
            preds[v].log_sigma.size() != data.views[v].rows()) {
            throw ShapeError("loss: prediction shape mismatch in view " + std::to_string(v));
        }
        if (!data.views[v].all_finite()) {
            throw DataError("loss: non-finite input in view " + std::to_string(v));
        }
    }
}

double squared_residual(const Matrix& x, const Matrix& mu, std::size_t row) {
    const double* xr = x.row(row);
    const double* mr = mu.row(row);
    double s = 0.0;
    for (std::size_t j = 0; j < x.cols(); ++j) {
        const double d = xr[j] - mr[j];
        s += d * d;
    }
    return s;
}

}  // namespace

ViewPrediction predict_view(const RNet& net, const LatentTable& latents) {
    ViewPrediction pred;
    pred.mu = mlp_forward(net.mean_head, latents.h);
    Matrix raw = mlp_forward(net.sigma_head, latents.h);
    pred.log_sigma.resize(raw.rows());
    for (std::size_t i = 0; i < raw.rows(); ++i) pred.log_sigma[i] = clamp_log_sigma(raw(i, 0));
    return pred;
}

LossBreakdown dua_loss(const MultiViewDataset& data, const std::vector<ViewPrediction>& preds,
                       bool dim_scaled_reg) {
    check_alignment(data, preds);
    LossBreakdown out;
    out.per_view_data_term.resize(preds.size(), 0.0);
    out.per_view_reg_term.resize(preds.size(), 0.0);
    for (std::size_t v = 0; v < preds.size(); ++v) {
        const Matrix& x = data.views[v];
        const double reg_coeff = dim_scaled_reg ? static_cast<double>(x.cols()) : 1.0;
        double data_term = 0.0, reg_term = 0.0;
        for (std::size_t i = 0; i < x.rows(); ++i) {
            const double ls = preds[v].log_sigma[i];
            data_term += 0.5 * squared_residual(x, preds[v].mu, i) * std::exp(-2.0 * ls);
            reg_term += reg_coeff * ls;
        }
        out.per_view_data_term[v] = data_term;
        out.per_view_reg_term[v] = reg_term;
        out.total += data_term + reg_term;
    }
    return out;
}

LossBreakdown rnets_loss(const MultiViewDataset& data, const std::vector<ViewPrediction>& preds) {
    check_alignment(data, preds);
    LossBreakdown out;
    out.per_view_data_term.resize(preds.size(), 0.0);
    out.per_view_reg_term.resize(preds.size(), 0.0);
    for (std::size_t v = 0; v < preds.size(); ++v) {
        const Matrix& x = data.views[v];
        double data_term = 0.0;
        for (std::size_t i = 0; i < x.rows(); ++i) {
            data_term += 0.5 * squared_residual(x, preds[v].mu, i);
        }
        out.per_view_data_term[v] = data_term;
        out.total += data_term;
    }
    return out;
}

BackwardResult loss_gradients(const MultiViewDataset& data, const std::vector<RNet>& nets,
                              const LatentTable& latents, Objective objective,
                              bool dim_scaled_reg, bool freeze_sigma) {
    if (nets.size() != data.view_count()) {
        throw ShapeError("loss_gradients: net count != view count");
    }
    const std::size_t n = latents.sample_count();
    if (n != data.sample_count()) {
        throw ShapeError("loss_gradients: latent rows != dataset samples");
    }
    const bool sigma_active = objective == Objective::dua && !freeze_sigma;

    BackwardResult res;
    res.grads.latent = Matrix(n, latents.dim());
    res.loss.per_view_data_term.resize(nets.size(), 0.0);
    res.loss.per_view_reg_term.resize(nets.size(), 0.0);
    res.preds.resize(nets.size());
    res.grads.nets.resize(nets.size());

    for (std::size_t v = 0; v < nets.size(); ++v) {
        const Matrix& x = data.views[v];
        if (!x.all_finite()) throw DataError("loss_gradients: non-finite input in view " +
                                             std::to_string(v));
        MlpCache mean_cache;
        ViewPrediction& pred = res.preds[v];
        pred.mu = mlp_forward(nets[v].mean_head, latents.h, &mean_cache);

        MlpCache sigma_cache;
        Matrix sigma_raw;
        if (objective == Objective::dua) {
            // Sigma head runs forward even when frozen so predictions stay
            // complete; it only skips the backward pass.
            sigma_raw = mlp_forward(nets[v].sigma_head, latents.h, &sigma_cache);
            pred.log_sigma.resize(n);
            for (std::size_t i = 0; i < n; ++i)
                pred.log_sigma[i] = clamp_log_sigma(sigma_raw(i, 0));
        } else {
            pred.log_sigma.assign(n, 0.0);
        }

        const double reg_coeff = dim_scaled_reg ? static_cast<double>(x.cols()) : 1.0;
        Matrix dmu(x.rows(), x.cols());
        Matrix draw(n, 1);
        double data_term = 0.0, reg_term = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double rsq = squared_residual(x, pred.mu, i);
            double inv_var = 1.0;
            if (sigma_active) {
                const double ls = pred.log_sigma[i];
                inv_var = std::exp(-2.0 * ls);
                reg_term += reg_coeff * ls;
                // d/d(log sigma) of rsq/(2 sigma^2) + c*log sigma, zero
                // outside the clamp interval.
                const double raw = sigma_raw(i, 0);
                if (raw >= kLogSigmaMin && raw <= kLogSigmaMax) {
                    draw(i, 0) = -rsq * inv_var + reg_coeff;
                }
            }
            data_term += 0.5 * rsq * inv_var;  // matches dua_loss/rnets_loss term order
            const double* xr = x.row(i);
            const double* mr = pred.mu.row(i);
            double* dr = dmu.row(i);
            for (std::size_t j = 0; j < x.cols(); ++j) dr[j] = (mr[j] - xr[j]) * inv_var;
        }
        res.loss.per_view_data_term[v] = data_term;
        res.loss.per_view_reg_term[v] = sigma_active ? reg_term : 0.0;
        res.loss.total += data_term + (sigma_active ? reg_term : 0.0);

        Matrix mean_input_grad;
        res.grads.nets[v].mean_head =
            mlp_backward(nets[v].mean_head, mean_cache, dmu, &mean_input_grad);
        axpy(res.grads.latent, 1.0, mean_input_grad);

        if (sigma_active) {
            Matrix sigma_input_grad;
            res.grads.nets[v].sigma_head =
                mlp_backward(nets[v].sigma_head, sigma_cache, draw, &sigma_input_grad);
            axpy(res.grads.latent, 1.0, sigma_input_grad);
        } else {
            res.grads.nets[v].sigma_head =
                MlpParams::zeros(nets[v].sigma_head.in_width(), nets[v].sigma_head.hidden1(),
                                 nets[v].sigma_head.hidden2(), nets[v].sigma_head.out_width());
        }
    }
    return res;
}

Matrix extract_sigma(const std::vector<ViewPrediction>& preds) {
    if (preds.empty()) return Matrix();
    Matrix out(preds.front().log_sigma.size(), preds.size());
    for (std::size_t v = 0; v < preds.size(); ++v) {
        for (std::size_t i = 0; i < preds[v].log_sigma.size(); ++i) {
            out(i, v) = std::exp(preds[v].log_sigma[i]);
        }
    }
    return out;
}

}  // namespace dua
