#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "dua/matrix.hpp"
#include "dua/rng.hpp"

namespace dua {

/// Per-view, per-feature statistics recorded by z-score normalization; enough
/// to invert the transform on nonconstant features.
struct NormalizationInfo {
    std::vector<std::vector<double>> mean;  // [view][feature]
    std::vector<std::vector<double>> std;   // population std, 0 for constant features
};

/// N samples observed as V feature matrices of possibly different widths,
/// with optional ground-truth labels. Immutable by convention: operations
/// return new datasets.
struct MultiViewDataset {
    std::vector<Matrix> views;  // view v is N x D_v
    std::vector<std::string> view_names;
    std::optional<std::vector<int>> labels;  // values in [0, C)
    std::optional<NormalizationInfo> normalization;

    std::size_t sample_count() const { return views.empty() ? 0 : views.front().rows(); }
    std::size_t view_count() const { return views.size(); }
    std::size_t view_width(std::size_t v) const { return views[v].cols(); }
    /// Number of classes (max label + 1); requires labels.
    std::size_t class_count() const;

    /// Checks view alignment, finiteness and label range; throws DataError.
    void validate() const;
};

/// Loads one headerless CSV per view (rows = samples) plus an optional
/// single-column integer labels CSV. Errors name the offending file/row/col.
MultiViewDataset load_views(const std::vector<std::filesystem::path>& view_paths,
                            const std::optional<std::filesystem::path>& labels_path = {});

/// Writes the dataset back to per-view CSVs (and labels, if present) under
/// `dir`, plus a dataset.json manifest. Returns the manifest path.
std::filesystem::path save_dataset(const MultiViewDataset& data,
                                   const std::filesystem::path& dir);

/// Reads a dataset.json manifest and loads the files it lists.
MultiViewDataset load_dataset(const std::filesystem::path& manifest_path);

/// Per view, per feature: subtract mean, divide by population std; features
/// with zero variance map to 0. Requires N >= 2.
MultiViewDataset zscore_normalize(const MultiViewDataset& data);

/// Undoes zscore_normalize using the stored metadata (constant features stay 0).
MultiViewDataset denormalize(const MultiViewDataset& data);

/// Additive Gaussian pollution of one view: x~ = x + eta * eps for a fraction
/// of samples drawn without replacement.
struct NoiseSpec {
    std::size_t view = 0;
    double eta = 0.0;        // intensity, >= 0
    double fraction = 0.5;   // fraction of samples polluted, in [0, 1]
    std::uint64_t seed = 0;
};

struct NoiseResult {
    MultiViewDataset data;
    std::vector<std::size_t> polluted;  // sorted sample indices
};

NoiseResult inject_noise(const MultiViewDataset& data, const NoiseSpec& spec);

/// Desk-scale synthetic multi-view family: C cluster centers in latent space
/// (spread by `separation`), unit within-cluster scatter, and per-view random
/// linear maps with a small ReLU component. Labels are the cluster ids.
struct SyntheticSpec {
    std::size_t samples = 400;
    std::size_t clusters = 4;
    std::size_t latent_dim = 4;
    std::vector<std::size_t> view_widths = {20, 20};
    std::uint64_t map_seed = 1;  // seeds the per-view maps, separate from sample draws
    double separation = 3.0;     // multiplier on the cluster-center draws
};

MultiViewDataset generate_synthetic(const SyntheticSpec& spec, Rng& rng);

/// Disjoint, exhaustive gallery/probe index split; stratified per class when
/// labels are present. `gallery_fraction` in (0, 1).
std::pair<std::vector<std::size_t>, std::vector<std::size_t>> gallery_probe_split(
    const std::optional<std::vector<int>>& labels, std::size_t n, double gallery_fraction,
    std::uint64_t seed);

}  // namespace dua
