#include "dua/trainer.hpp"

#include <algorithm>
#include <cmath>

#include <json.hpp>

#include "dua/csv.hpp"
#include "dua/errors.hpp"

namespace dua {

using nlohmann::json;

ModelShape TrainConfig::model_shape() const {
    ModelShape shape;
    shape.latent_dim = latent_dim;
    shape.hidden1 = hidden1;
    shape.hidden2 = hidden2;
    shape.init_scale = init_scale;
    return shape;
}

void TrainConfig::validate() const {
    if (latent_dim < 1) throw ConfigError("config: latent_dim must be >= 1");
    if (epochs < 1) throw ConfigError("config: epochs must be >= 1");
    if (lr <= 0.0) throw ConfigError("config: lr must be positive");
    if (latent_lr < 0.0) throw ConfigError("config: latent_lr must be nonnegative");
    if (convergence_window < 1) throw ConfigError("config: convergence_window must be >= 1");
    if (convergence_tol < 0.0) throw ConfigError("config: convergence_tol must be nonnegative");
    if (init_scale < 0.0) throw ConfigError("config: init_scale must be nonnegative");
}

TrainConfig train_config_from_json_text(const std::string& text, const std::string& origin) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError("malformed config " + origin + ": " + e.what());
    }
    TrainConfig cfg;
    try {
        cfg.latent_dim = j.value("latent_dim", cfg.latent_dim);
        cfg.epochs = j.value("epochs", cfg.epochs);
        cfg.lr = j.value("lr", cfg.lr);
        cfg.latent_lr = j.value("latent_lr", cfg.latent_lr);
        cfg.seed = j.value("seed", cfg.seed);
        if (j.contains("objective")) {
            cfg.objective = objective_from_string(j["objective"].get<std::string>());
        }
        cfg.warm_up_epochs = j.value("warm_up_epochs", cfg.warm_up_epochs);
        cfg.convergence_window = j.value("convergence_window", cfg.convergence_window);
        cfg.convergence_tol = j.value("convergence_tol", cfg.convergence_tol);
        cfg.init_scale = j.value("init_scale", cfg.init_scale);
        cfg.hidden1 = j.value("hidden1", cfg.hidden1);
        cfg.hidden2 = j.value("hidden2", cfg.hidden2);
        cfg.dim_scaled_reg = j.value("dim_scaled_reg", cfg.dim_scaled_reg);
        cfg.beta1 = j.value("beta1", cfg.beta1);
        cfg.beta2 = j.value("beta2", cfg.beta2);
        cfg.adam_eps = j.value("adam_eps", cfg.adam_eps);
    } catch (const json::exception& e) {
        throw ConfigError("bad config value in " + origin + ": " + e.what());
    }
    cfg.validate();
    return cfg;
}

TrainConfig train_config_from_file(const std::filesystem::path& path) {
    return train_config_from_json_text(read_text(path), path.string());
}

std::string train_config_to_json(const TrainConfig& cfg) {
    json j;
    j["latent_dim"] = cfg.latent_dim;
    j["epochs"] = cfg.epochs;
    j["lr"] = cfg.lr;
    j["latent_lr"] = cfg.latent_lr;
    j["seed"] = cfg.seed;
    j["objective"] = to_string(cfg.objective);
    j["warm_up_epochs"] = cfg.warm_up_epochs;
    j["convergence_window"] = cfg.convergence_window;
    j["convergence_tol"] = cfg.convergence_tol;
    j["init_scale"] = cfg.init_scale;
    j["hidden1"] = cfg.hidden1;
    j["hidden2"] = cfg.hidden2;
    j["dim_scaled_reg"] = cfg.dim_scaled_reg;
    j["beta1"] = cfg.beta1;
    j["beta2"] = cfg.beta2;
    j["adam_eps"] = cfg.adam_eps;
    return j.dump(2);
}

namespace {

void check_loss_finite(const LossBreakdown& loss, std::size_t epoch) {
    if (std::isfinite(loss.total)) return;
    for (std::size_t v = 0; v < loss.per_view_data_term.size(); ++v) {
        if (!std::isfinite(loss.per_view_data_term[v]) ||
            !std::isfinite(loss.per_view_reg_term[v])) {
            throw DivergenceError("non-finite loss in view " + std::to_string(v) + " at epoch " +
                                  std::to_string(epoch));
        }
    }
    throw DivergenceError("non-finite total loss at epoch " + std::to_string(epoch));
}

}  // namespace

TrainState train(const MultiViewDataset& data, const TrainConfig& cfg) {
    cfg.validate();
    data.validate();

    TrainState state;
    state.config = cfg;

    std::vector<std::size_t> widths(data.view_count());
    for (std::size_t v = 0; v < data.view_count(); ++v) widths[v] = data.view_width(v);

    Rng rng(cfg.seed);
    auto [nets, latents] = init_model(widths, cfg.model_shape(), data.sample_count(), rng);
    state.nets = std::move(nets);
    state.latents = std::move(latents);

    AdamConfig latent_adam{cfg.latent_lr > 0.0 ? cfg.latent_lr : cfg.lr, cfg.beta1, cfg.beta2,
                           cfg.adam_eps};
    AdamConfig net_adam{cfg.lr, cfg.beta1, cfg.beta2, cfg.adam_eps};

    state.optimizer.emplace_back(std::vector<const Matrix*>{&state.latents.h}, latent_adam);
    for (const RNet& net : state.nets) {
        state.optimizer.emplace_back(net.mean_head.params(), net_adam);
        state.optimizer.emplace_back(net.sigma_head.params(), net_adam);
    }

    state.history.reserve(cfg.epochs);
    for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
        const bool warm_up = epoch < cfg.warm_up_epochs;
        BackwardResult step = loss_gradients(data, state.nets, state.latents, cfg.objective,
                                             cfg.dim_scaled_reg, warm_up);
        check_loss_finite(step.loss, epoch);
        state.history.push_back(step.loss);

        state.optimizer[0].step({&state.latents.h}, {&step.grads.latent});
        const bool update_sigma = cfg.objective == Objective::dua && !warm_up;
        for (std::size_t v = 0; v < state.nets.size(); ++v) {
            const NetGradients& g = step.grads.nets[v];
            state.optimizer[1 + 2 * v].step(state.nets[v].mean_head.params(),
                                            g.mean_head.params());
            if (update_sigma) {
                state.optimizer[2 + 2 * v].step(state.nets[v].sigma_head.params(),
                                                g.sigma_head.params());
            }
        }

        // Early stop on the relative change across the trailing window.
        const std::size_t done = state.history.size();
        if (done > cfg.convergence_window) {
            const double now = state.history[done - 1].total;
            const double before = state.history[done - 1 - cfg.convergence_window].total;
            const double rel = std::fabs(now - before) / std::max(std::fabs(before), 1e-12);
            if (rel < cfg.convergence_tol) break;
        }
    }
    state.epochs_completed = state.history.size();
    return state;
}

std::vector<double> normalized_loss_curve(const TrainState& state) {
    if (state.history.empty()) throw ConfigError("normalized_loss_curve: empty history");
    double lo = state.history.front().total, hi = lo;
    for (const auto& l : state.history) {
        lo = std::min(lo, l.total);
        hi = std::max(hi, l.total);
    }
    std::vector<double> out(state.history.size(), 0.0);
    if (hi == lo) return out;
    for (std::size_t i = 0; i < out.size(); ++i) {
        out[i] = (state.history[i].total - lo) / (hi - lo);
    }
    return out;
}

std::string loss_history_csv(const TrainState& state) {
    std::string csv = "epoch,total,view,data_term,reg_term\n";
    for (std::size_t e = 0; e < state.history.size(); ++e) {
        const LossBreakdown& l = state.history[e];
        for (std::size_t v = 0; v < l.per_view_data_term.size(); ++v) {
            csv += std::to_string(e);
            csv += ',';
            csv += format_double(l.total);
            csv += ',';
            csv += std::to_string(v);
            csv += ',';
            csv += format_double(l.per_view_data_term[v]);
            csv += ',';
            csv += format_double(l.per_view_reg_term[v]);
            csv += '\n';
        }
    }
    return csv;
}

}  // namespace dua
