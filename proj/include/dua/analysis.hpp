#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "dua/data.hpp"
#include "dua/eval.hpp"
#include "dua/trainer.hpp"

namespace dua {

struct KdeCurve {
    std::vector<double> grid;     // ascending evaluation points
    std::vector<double> density;  // nonnegative
    double bandwidth = 0.0;
    std::string group = "all";  // clean / noisy / all
};

/// Gaussian kernel density estimate with Scott's bandwidth
/// h = std(samples) * n^(-1/5) (population std). Needs >= 2 samples with
/// nonzero spread.
KdeCurve kde_1d(const std::vector<double>& samples, const std::vector<double>& grid);

/// 256 evenly spaced points over [min - 3h, max + 3h].
std::vector<double> kde_default_grid(const std::vector<double>& samples,
                                     std::size_t points = 256);

struct UncertaintySplit {
    KdeCurve clean;
    KdeCurve noisy;
    double mean_clean = 0.0;
    double mean_noisy = 0.0;
};

/// Splits the per-sample sigma values of one view into clean/noisy groups
/// (per the polluted index set used when the training data was built) and
/// density-estimates both on a shared grid. `use_log_sigma` switches the
/// estimated quantity from sigma to ln sigma.
UncertaintySplit uncertainty_split_study(const TrainState& state,
                                         const std::vector<std::size_t>& polluted,
                                         std::size_t view, bool use_log_sigma = false);

struct SweepConfig {
    TrainConfig train;       // per-cell template; seed (and latent_dim for dim sweeps) overridden
    int seeds_per_cell = 3;
    int eval_runs = 10;
    int eval_restarts = 10;
    std::uint64_t seed = 0;
    std::size_t noise_view = 0;
    double noise_fraction = 0.5;
};

struct SweepCellSample {
    MetricValues metrics;
    double sigma_gap = 0.0;  // mean sigma(noisy) - mean sigma(clean), dua cells only
    bool has_sigma_gap = false;
};

struct SweepCell {
    double value = 0.0;  // eta or latent dimension
    std::string variant;
    std::vector<SweepCellSample> per_seed;
    MetricReport report;  // aggregated across seeds

    double median_acc() const;
    double median_sigma_gap() const;
};

struct SweepResult {
    std::string param;  // "eta" or "latent_dim"
    std::vector<SweepCell> cells;

    const SweepCell& cell(double value, const std::string& variant) const;
};

/// For each noise intensity: pollute `noise_fraction` of one view, train each
/// variant, evaluate clustering on the learned latents. The eta grid must
/// include 0 so robustness is measured against the clean baseline; cells
/// share noise and model seeds across variants so comparisons are paired.
SweepResult noise_robustness_sweep(const MultiViewDataset& base, const std::vector<double>& etas,
                                   const std::vector<Objective>& variants,
                                   const SweepConfig& cfg);

/// Clustering quality per latent dimension.
SweepResult dimension_sweep(const MultiViewDataset& data, const std::vector<std::size_t>& dims,
                            const SweepConfig& cfg);

inline const std::vector<std::size_t> kDefaultDimensionGrid = {10, 20, 50, 100, 200};
inline const std::vector<double> kDefaultEtaGrid = {0.1, 0.5, 1.0, 2.0};

/// CSV renderings consumed by external plotting: `grid,density,group` and
/// `param,value,variant,metric,mean,std`.
std::string kde_csv(const std::vector<KdeCurve>& curves);
std::string sweep_csv(const SweepResult& result);

double median(std::vector<double> values);

}  // namespace dua
