#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "dua/adam.hpp"
#include "dua/data.hpp"
#include "dua/model.hpp"

namespace dua {

struct TrainConfig {
    std::size_t latent_dim = 50;
    std::size_t epochs = 2000;
    double lr = 1e-3;
    double latent_lr = 0.0;  // 0 means share `lr`
    std::uint64_t seed = 0;
    Objective objective = Objective::dua;
    std::size_t warm_up_epochs = 0;  // epochs trained with sigma frozen at 1
    std::size_t convergence_window = 20;
    double convergence_tol = 1e-6;  // relative total-loss change across the window
    double init_scale = 1.0;
    std::size_t hidden1 = 0;  // 0 = max(latent_dim, 16)
    std::size_t hidden2 = 0;  // 0 = max(2 * latent_dim, 32)
    bool dim_scaled_reg = false;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double adam_eps = 1e-8;

    ModelShape model_shape() const;
    void validate() const;
};

TrainConfig train_config_from_json_text(const std::string& text, const std::string& origin);
TrainConfig train_config_from_file(const std::filesystem::path& path);
std::string train_config_to_json(const TrainConfig& cfg);

/// Everything a run produces: model, optimizer state and the loss history
/// (one breakdown per completed epoch).
struct TrainState {
    TrainConfig config;
    std::vector<RNet> nets;
    LatentTable latents;
    // Parameter groups: [0] latent table, then per view mean head, sigma head.
    std::vector<AdamState> optimizer;
    std::size_t epochs_completed = 0;
    std::vector<LossBreakdown> history;
};

/// Full-batch joint optimization of the latent table and all decoder
/// parameters. Deterministic given cfg.seed; stops early once the relative
/// total-loss change across the trailing window drops below the tolerance.
/// Throws DivergenceError (naming view and epoch) if the loss leaves the
/// finite range.
TrainState train(const MultiViewDataset& data, const TrainConfig& cfg);

/// Min-max normalized total-loss series in [0, 1]; constant histories map to
/// all zeros.
std::vector<double> normalized_loss_curve(const TrainState& state);

/// Long-format per-epoch CSV: epoch,total,view,data_term,reg_term.
std::string loss_history_csv(const TrainState& state);

// JSON checkpoints with doubles stored as lossless hexadecimal float
// literals, so round-trips are bit-exact.
inline constexpr int kCheckpointSchemaVersion = 1;

void checkpoint_save(const TrainState& state, const std::filesystem::path& path);
TrainState checkpoint_load(const std::filesystem::path& path);

}  // namespace dua
