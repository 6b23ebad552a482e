#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "dua/data.hpp"
#include "dua/matrix.hpp"
#include "dua/mlp.hpp"
#include "dua/rng.hpp"

namespace dua {

/// Training objective: `dua` is the heteroscedastic reconstruction loss with
/// per-sample per-view uncertainty; `rnets` is the plain squared-error
/// ablation that ignores the sigma heads.
enum class Objective { dua, rnets };

std::string to_string(Objective o);
Objective objective_from_string(const std::string& s);

// log sigma is clamped to this range, so sigma stays in [e^-6, e^6].
inline constexpr double kLogSigmaMin = -6.0;
inline constexpr double kLogSigmaMax = 6.0;

/// One per-view decoder: a mean head mapping latent -> view features and a
/// sigma head mapping latent -> a single log-uncertainty scalar.
struct RNet {
    MlpParams mean_head;
    MlpParams sigma_head;
};

/// N x d table of per-sample representations, trained directly as parameters.
struct LatentTable {
    Matrix h;

    std::size_t sample_count() const { return h.rows(); }
    std::size_t dim() const { return h.cols(); }
};

struct ViewPrediction {
    Matrix mu;                      // N x D_v reconstruction means
    std::vector<double> log_sigma;  // length N, clamped to [-6, 6]
};

struct LossBreakdown {
    double total = 0.0;
    std::vector<double> per_view_data_term;  // sum_i ||x - mu||^2 / (2 sigma^2)
    std::vector<double> per_view_reg_term;   // sum_i ln sigma
};

struct ModelShape {
    std::size_t latent_dim = 50;
    // 0 means derive from latent_dim: hidden1 = max(d, 16), hidden2 = max(2d, 32).
    std::size_t hidden1 = 0;
    std::size_t hidden2 = 0;
    double init_scale = 1.0;

    std::size_t resolved_hidden1() const;
    std::size_t resolved_hidden2() const;
};

/// Per-view decoders plus the latent table, ready for joint training.
/// Latent entries ~ N(0, init_scale^2); weights use He init; biases zero.
std::pair<std::vector<RNet>, LatentTable> init_model(const std::vector<std::size_t>& view_widths,
                                                     const ModelShape& shape, std::size_t samples,
                                                     Rng& rng);

/// Forward pass of one view's decoder over every latent row.
ViewPrediction predict_view(const RNet& net, const LatentTable& latents);

/// Heteroscedastic objective: sum over samples and views of
/// ||x - mu||^2 / (2 sigma^2) + ln sigma. When `dim_scaled_reg` is set the
/// regularizer is D_v * ln sigma instead (off by default).
LossBreakdown dua_loss(const MultiViewDataset& data, const std::vector<ViewPrediction>& preds,
                       bool dim_scaled_reg = false);

/// Ablation objective: sum of 0.5 * ||x - mu||^2; sigma ignored.
LossBreakdown rnets_loss(const MultiViewDataset& data, const std::vector<ViewPrediction>& preds);

struct NetGradients {
    MlpParams mean_head;
    MlpParams sigma_head;
};

struct ModelGradients {
    std::vector<NetGradients> nets;
    Matrix latent;  // N x d
};

struct BackwardResult {
    LossBreakdown loss;
    std::vector<ViewPrediction> preds;
    ModelGradients grads;
};

/// Loss plus exact gradients of the selected objective with respect to every
/// weight, bias and latent row. With `freeze_sigma` the data term is
/// evaluated at sigma = 1 and sigma heads receive no gradient (warm-up);
/// with Objective::rnets the sigma heads are never touched at all.
BackwardResult loss_gradients(const MultiViewDataset& data, const std::vector<RNet>& nets,
                              const LatentTable& latents, Objective objective,
                              bool dim_scaled_reg = false, bool freeze_sigma = false);

/// N x V matrix of sigma = exp(log_sigma) values.
Matrix extract_sigma(const std::vector<ViewPrediction>& preds);

}  // namespace dua
