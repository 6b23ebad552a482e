#include "dua/analysis.hpp"

#include <algorithm>
#include <cmath>

#include "dua/csv.hpp"
#include "dua/errors.hpp"

namespace dua {

namespace {

constexpr double kInvSqrt2Pi = 0.3989422804014327;

double population_std(const std::vector<double>& xs) {
    const auto n = static_cast<double>(xs.size());
    double mean = 0.0;
    for (double x : xs) mean += x;
    mean /= n;
    double ss = 0.0;
    for (double x : xs) ss += (x - mean) * (x - mean);
    return std::sqrt(ss / n);
}

double scott_bandwidth(const std::vector<double>& samples) {
    if (samples.size() < 2) throw ConfigError("kde: need at least 2 samples");
    const double sd = population_std(samples);
    if (sd == 0.0) throw DataError("kde: samples have zero spread (degenerate distribution)");
    return sd * std::pow(static_cast<double>(samples.size()), -0.2);
}

}  // namespace

KdeCurve kde_1d(const std::vector<double>& samples, const std::vector<double>& grid) {
    KdeCurve curve;
    curve.bandwidth = scott_bandwidth(samples);
    curve.grid = grid;
    curve.density.resize(grid.size(), 0.0);
    const double h = curve.bandwidth;
    const double norm = kInvSqrt2Pi / (h * static_cast<double>(samples.size()));
    for (std::size_t g = 0; g < grid.size(); ++g) {
        double acc = 0.0;
        for (double s : samples) {
            const double z = (grid[g] - s) / h;
            acc += std::exp(-0.5 * z * z);
        }
        curve.density[g] = norm * acc;
    }
    return curve;
}

std::vector<double> kde_default_grid(const std::vector<double>& samples, std::size_t points) {
    if (points < 2) throw ConfigError("kde grid: need at least 2 points");
    const double h = scott_bandwidth(samples);
    const auto [lo_it, hi_it] = std::minmax_element(samples.begin(), samples.end());
    const double lo = *lo_it - 3.0 * h;
    const double hi = *hi_it + 3.0 * h;
    std::vector<double> grid(points);
    const double step = (hi - lo) / static_cast<double>(points - 1);
    for (std::size_t i = 0; i < points; ++i) grid[i] = lo + step * static_cast<double>(i);
    return grid;
}

UncertaintySplit uncertainty_split_study(const TrainState& state,
                                         const std::vector<std::size_t>& polluted,
                                         std::size_t view, bool use_log_sigma) {
    if (view >= state.nets.size()) throw ConfigError("uncertainty study: view out of range");
    const std::size_t n = state.latents.sample_count();

    ViewPrediction pred = predict_view(state.nets[view], state.latents);
    std::vector<char> is_noisy(n, 0);
    for (std::size_t idx : polluted) {
        if (idx >= n) throw ConfigError("uncertainty study: polluted index out of range");
        is_noisy[idx] = 1;
    }

    std::vector<double> clean, noisy;
    for (std::size_t i = 0; i < n; ++i) {
        const double value = use_log_sigma ? pred.log_sigma[i] : std::exp(pred.log_sigma[i]);
        (is_noisy[i] ? noisy : clean).push_back(value);
    }
    if (clean.empty() || noisy.empty()) {
        throw DataError("uncertainty study: clean and noisy groups must both be nonempty");
    }

    // Shared grid wide enough for both groups' kernels.
    const double h_clean = scott_bandwidth(clean);
    const double h_noisy = scott_bandwidth(noisy);
    const double pad = 3.0 * std::max(h_clean, h_noisy);
    double lo = *std::min_element(clean.begin(), clean.end());
    double hi = *std::max_element(clean.begin(), clean.end());
    lo = std::min(lo, *std::min_element(noisy.begin(), noisy.end())) - pad;
    hi = std::max(hi, *std::max_element(noisy.begin(), noisy.end())) + pad;
    std::vector<double> grid(256);
    const double step = (hi - lo) / 255.0;
    for (std::size_t i = 0; i < grid.size(); ++i) grid[i] = lo + step * static_cast<double>(i);

    UncertaintySplit out;
    out.clean = kde_1d(clean, grid);
    out.clean.group = "clean";
    out.noisy = kde_1d(noisy, grid);
    out.noisy.group = "noisy";
    for (double x : clean) out.mean_clean += x;
    out.mean_clean /= static_cast<double>(clean.size());
    for (double x : noisy) out.mean_noisy += x;
    out.mean_noisy /= static_cast<double>(noisy.size());
    return out;
}

double SweepCell::median_acc() const {
    std::vector<double> accs;
    for (const auto& s : per_seed) accs.push_back(s.metrics.acc);
    return median(std::move(accs));
}

double SweepCell::median_sigma_gap() const {
    std::vector<double> gaps;
    for (const auto& s : per_seed) {
        if (s.has_sigma_gap) gaps.push_back(s.sigma_gap);
    }
    if (gaps.empty()) throw ConfigError("sweep cell has no sigma gaps");
    return median(std::move(gaps));
}

const SweepCell& SweepResult::cell(double value, const std::string& variant) const {
    for (const auto& c : cells) {
        if (c.value == value && c.variant == variant) return c;
    }
    throw ConfigError("sweep: no cell for value " + std::to_string(value) + ", variant " +
                      variant);
}

namespace {

MetricReport aggregate_cell(const std::vector<SweepCellSample>& samples) {
    std::vector<double> acc, nm, f, ri;
    for (const auto& s : samples) {
        acc.push_back(s.metrics.acc);
        nm.push_back(s.metrics.nmi);
        f.push_back(s.metrics.f_score);
        ri.push_back(s.metrics.rand_index);
    }
    MetricReport rep;
    rep.acc = aggregate(acc);
    rep.nmi = aggregate(nm);
    rep.f_score = aggregate(f);
    rep.rand_index = aggregate(ri);
    rep.runs = static_cast<int>(samples.size());
    return rep;
}

MetricValues mean_metrics(const Matrix& points, const std::vector<int>& labels,
                          const SweepConfig& cfg, std::uint64_t seed) {
    const MetricReport rep =
        evaluate_clustering(points, labels, cfg.eval_runs, seed, cfg.eval_restarts);
    return MetricValues{rep.acc.mean, rep.nmi.mean, rep.f_score.mean, rep.rand_index.mean};
}

}  // namespace

SweepResult noise_robustness_sweep(const MultiViewDataset& base, const std::vector<double>& etas,
                                   const std::vector<Objective>& variants,
                                   const SweepConfig& cfg) {
    base.validate();
    if (!base.labels) throw ConfigError("noise sweep: dataset needs labels for evaluation");
    if (etas.empty() || variants.empty()) throw ConfigError("noise sweep: empty grid");
    if (std::find(etas.begin(), etas.end(), 0.0) == etas.end()) {
        throw ConfigError("noise sweep: eta grid must include 0 as the clean baseline");
    }
    if (cfg.seeds_per_cell < 1) throw ConfigError("noise sweep: seeds_per_cell must be >= 1");

    SweepResult result;
    result.param = "eta";
    for (std::size_t ei = 0; ei < etas.size(); ++ei) {
        // The polluted data and the model seed for a given (eta, seed index)
        // are shared across variants, so variant comparisons are paired.
        std::vector<NoiseResult> noisy_data;
        std::vector<std::uint64_t> model_seeds;
        for (int s = 0; s < cfg.seeds_per_cell; ++s) {
            NoiseSpec spec;
            spec.view = cfg.noise_view;
            spec.eta = etas[ei];
            spec.fraction = cfg.noise_fraction;
            spec.seed = Rng::derive(cfg.seed, 10000 + ei * 100 + s);
            noisy_data.push_back(inject_noise(base, spec));
            model_seeds.push_back(Rng::derive(cfg.seed, 20000 + ei * 100 + s));
        }

        for (const Objective variant : variants) {
            SweepCell cell;
            cell.value = etas[ei];
            cell.variant = to_string(variant);
            for (int s = 0; s < cfg.seeds_per_cell; ++s) {
                TrainConfig tc = cfg.train;
                tc.objective = variant;
                tc.seed = model_seeds[s];
                TrainState state = train(noisy_data[s].data, tc);

                SweepCellSample sample;
                sample.metrics = mean_metrics(state.latents.h, *base.labels, cfg,
                                              Rng::derive(cfg.seed, 30000 + ei * 100 + s));
                if (variant == Objective::dua && !noisy_data[s].polluted.empty() &&
                    noisy_data[s].polluted.size() < base.sample_count()) {
                    const UncertaintySplit split =
                        uncertainty_split_study(state, noisy_data[s].polluted, cfg.noise_view);
                    sample.sigma_gap = split.mean_noisy - split.mean_clean;
                    sample.has_sigma_gap = true;
                }
                cell.per_seed.push_back(sample);
            }
            cell.report = aggregate_cell(cell.per_seed);
            result.cells.push_back(std::move(cell));
        }
    }
    return result;
}

SweepResult dimension_sweep(const MultiViewDataset& data, const std::vector<std::size_t>& dims,
                            const SweepConfig& cfg) {
    data.validate();
    if (!data.labels) throw ConfigError("dimension sweep: dataset needs labels for evaluation");
    if (dims.empty()) throw ConfigError("dimension sweep: empty dimension grid");
    if (cfg.seeds_per_cell < 1) throw ConfigError("dimension sweep: seeds_per_cell must be >= 1");

    SweepResult result;
    result.param = "latent_dim";
    for (std::size_t di = 0; di < dims.size(); ++di) {
        SweepCell cell;
        cell.value = static_cast<double>(dims[di]);
        cell.variant = to_string(cfg.train.objective);
        for (int s = 0; s < cfg.seeds_per_cell; ++s) {
            TrainConfig tc = cfg.train;
            tc.latent_dim = dims[di];
            tc.seed = Rng::derive(cfg.seed, 40000 + di * 100 + s);
            TrainState state = train(data, tc);
            SweepCellSample sample;
            sample.metrics = mean_metrics(state.latents.h, *data.labels, cfg,
                                          Rng::derive(cfg.seed, 50000 + di * 100 + s));
            cell.per_seed.push_back(sample);
        }
        cell.report = aggregate_cell(cell.per_seed);
        result.cells.push_back(std::move(cell));
    }
    return result;
}

std::string kde_csv(const std::vector<KdeCurve>& curves) {
    std::string csv = "grid,density,group\n";
    for (const KdeCurve& curve : curves) {
        for (std::size_t i = 0; i < curve.grid.size(); ++i) {
            csv += format_double(curve.grid[i]);
            csv += ',';
            csv += format_double(curve.density[i]);
            csv += ',';
            csv += curve.group;
            csv += '\n';
        }
    }
    return csv;
}

std::string sweep_csv(const SweepResult& result) {
    std::string csv = "param,value,variant,metric,mean,std\n";
    auto row = [&](const SweepCell& cell, const std::string& metric, const MetricStats& stats) {
        csv += result.param;
        csv += ',';
        csv += format_double(cell.value);
        csv += ',';
        csv += cell.variant;
        csv += ',';
        csv += metric;
        csv += ',';
        csv += format_double(stats.mean);
        csv += ',';
        csv += format_double(stats.stddev);
        csv += '\n';
    };
    for (const SweepCell& cell : result.cells) {
        row(cell, "acc", cell.report.acc);
        row(cell, "nmi", cell.report.nmi);
        row(cell, "f_score", cell.report.f_score);
        row(cell, "rand_index", cell.report.rand_index);
        std::vector<double> gaps;
        for (const auto& s : cell.per_seed) {
            if (s.has_sigma_gap) gaps.push_back(s.sigma_gap);
        }
        if (!gaps.empty()) row(cell, "sigma_gap", aggregate(gaps));
    }
    return csv;
}

double median(std::vector<double> values) {
    if (values.empty()) throw ConfigError("median of empty set");
    std::sort(values.begin(), values.end());
    const std::size_t mid = values.size() / 2;
    if (values.size() % 2 == 1) return values[mid];
    return 0.5 * (values[mid - 1] + values[mid]);
}

}  // namespace dua
