#include "dua/data.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <numeric>

#include <json.hpp>

#include "dua/csv.hpp"
#include "dua/errors.hpp"

namespace dua {

using nlohmann::json;

std::size_t MultiViewDataset::class_count() const {
    if (!labels) throw DataError("dataset has no labels");
    int max_label = -1;
    for (int l : *labels) max_label = std::max(max_label, l);
    return static_cast<std::size_t>(max_label + 1);
}

void MultiViewDataset::validate() const {
    if (views.empty()) throw DataError("dataset has no views");
    const std::size_t n = views.front().rows();
    if (n == 0) throw DataError("dataset has no samples");
    for (std::size_t v = 0; v < views.size(); ++v) {
        if (views[v].rows() != n) {
            throw DataError("view " + std::to_string(v) + " has " +
                            std::to_string(views[v].rows()) + " rows, expected " +
                            std::to_string(n));
        }
        if (views[v].cols() == 0) throw DataError("view " + std::to_string(v) + " has no columns");
        if (!views[v].all_finite()) {
            throw DataError("view " + std::to_string(v) + " contains non-finite entries");
        }
    }
    if (labels) {
        if (labels->size() != n) {
            throw DataError("labels length " + std::to_string(labels->size()) +
                            " != sample count " + std::to_string(n));
        }
        for (int l : *labels) {
            if (l < 0) throw DataError("labels must be nonnegative integers");
        }
    }
}

MultiViewDataset load_views(const std::vector<std::filesystem::path>& view_paths,
                            const std::optional<std::filesystem::path>& labels_path) {
    if (view_paths.empty()) throw ConfigError("load_views: no view files given");
    MultiViewDataset data;
    for (const auto& path : view_paths) {
        data.views.push_back(read_csv_matrix(path));
        data.view_names.push_back(path.stem().string());
    }
    if (labels_path) data.labels = read_csv_labels(*labels_path);
    data.validate();
    return data;
}

std::filesystem::path save_dataset(const MultiViewDataset& data,
                                   const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    json manifest;
    manifest["views"] = json::array();
    for (std::size_t v = 0; v < data.view_count(); ++v) {
        const std::string name =
            v < data.view_names.size() ? data.view_names[v] : "view" + std::to_string(v);
        const std::string file = name + ".csv";
        write_csv_matrix(data.views[v], dir / file);
        manifest["views"].push_back({{"name", name}, {"file", file}});
    }
    if (data.labels) {
        write_csv_labels(*data.labels, dir / "labels.csv");
        manifest["labels"] = "labels.csv";
    }
    if (data.normalization) {
        manifest["normalization"] = {{"mean", data.normalization->mean},
                                     {"std", data.normalization->std},
                                     {"std_convention", "population"}};
    }
    const auto manifest_path = dir / "dataset.json";
    atomic_write_text(manifest_path, manifest.dump(2) + "\n");
    return manifest_path;
}

MultiViewDataset load_dataset(const std::filesystem::path& manifest_path) {
    json manifest;
    try {
        manifest = json::parse(read_text(manifest_path));
    } catch (const json::parse_error& e) {
        throw DataError("malformed manifest " + manifest_path.string() + ": " + e.what());
    }
    if (!manifest.contains("views") || !manifest["views"].is_array() ||
        manifest["views"].empty()) {
        throw DataError("manifest " + manifest_path.string() + " lists no views");
    }
    const auto base = manifest_path.parent_path();
    MultiViewDataset data;
    for (const auto& entry : manifest["views"]) {
        data.views.push_back(read_csv_matrix(base / entry.at("file").get<std::string>()));
        data.view_names.push_back(entry.value("name", "view" + std::to_string(data.views.size())));
    }
    if (manifest.contains("labels")) {
        data.labels = read_csv_labels(base / manifest["labels"].get<std::string>());
    }
    if (manifest.contains("normalization")) {
        NormalizationInfo info;
        info.mean = manifest["normalization"].at("mean").get<std::vector<std::vector<double>>>();
        info.std = manifest["normalization"].at("std").get<std::vector<std::vector<double>>>();
        data.normalization = std::move(info);
    }
    data.validate();
    return data;
}

MultiViewDataset zscore_normalize(const MultiViewDataset& data) {
    data.validate();
    const std::size_t n = data.sample_count();
    if (n < 2) throw ConfigError("zscore_normalize: need at least 2 samples");
    MultiViewDataset out = data;
    NormalizationInfo info;
    info.mean.resize(data.view_count());
    info.std.resize(data.view_count());
    for (std::size_t v = 0; v < data.view_count(); ++v) {
        const std::size_t d = data.view_width(v);
        info.mean[v].assign(d, 0.0);
        info.std[v].assign(d, 0.0);
        for (std::size_t j = 0; j < d; ++j) {
            double s = 0.0;
            for (std::size_t i = 0; i < n; ++i) s += data.views[v](i, j);
            const double mean = s / static_cast<double>(n);
            double ss = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                const double c = data.views[v](i, j) - mean;
                ss += c * c;
            }
            const double sd = std::sqrt(ss / static_cast<double>(n));
            info.mean[v][j] = mean;
            info.std[v][j] = sd;
            for (std::size_t i = 0; i < n; ++i) {
                out.views[v](i, j) = sd > 0.0 ? (data.views[v](i, j) - mean) / sd : 0.0;
            }
        }
    }
    out.normalization = std::move(info);
    return out;
}

MultiViewDataset denormalize(const MultiViewDataset& data) {
    if (!data.normalization) throw ConfigError("denormalize: no normalization metadata");
    MultiViewDataset out = data;
    for (std::size_t v = 0; v < data.view_count(); ++v) {
        for (std::size_t j = 0; j < data.view_width(v); ++j) {
            const double mean = data.normalization->mean[v][j];
            const double sd = data.normalization->std[v][j];
            for (std::size_t i = 0; i < data.sample_count(); ++i) {
                out.views[v](i, j) = sd > 0.0 ? data.views[v](i, j) * sd + mean : 0.0;
            }
        }
    }
    out.normalization.reset();
    return out;
}

NoiseResult inject_noise(const MultiViewDataset& data, const NoiseSpec& spec) {
    data.validate();
    if (spec.view >= data.view_count()) {
        throw ConfigError("inject_noise: view " + std::to_string(spec.view) +
                          " out of range (dataset has " + std::to_string(data.view_count()) +
                          " views)");
    }
    if (spec.eta < 0.0) throw ConfigError("inject_noise: eta must be nonnegative");
    if (spec.fraction < 0.0 || spec.fraction > 1.0) {
        throw ConfigError("inject_noise: fraction must be in [0, 1]");
    }
    const std::size_t n = data.sample_count();
    const auto count = static_cast<std::size_t>(
        std::llround(spec.fraction * static_cast<double>(n)));

    NoiseResult result;
    result.data = data;
    if (count == 0) {
        if (spec.fraction > 0.0) {
            std::cerr << "inject_noise: fraction " << spec.fraction << " of " << n
                      << " samples rounds to zero; nothing polluted\n";
        }
        return result;
    }

    // Partial Fisher-Yates draw of `count` distinct indices.
    Rng rng(spec.seed);
    std::vector<std::size_t> pool(n);
    std::iota(pool.begin(), pool.end(), std::size_t{0});
    for (std::size_t i = 0; i < count; ++i) {
        const std::size_t j = i + rng.uniform_index(n - i);
        std::swap(pool[i], pool[j]);
    }
    result.polluted.assign(pool.begin(), pool.begin() + count);
    std::sort(result.polluted.begin(), result.polluted.end());

    Matrix& view = result.data.views[spec.view];
    for (std::size_t idx : result.polluted) {
        for (std::size_t j = 0; j < view.cols(); ++j) {
            view(idx, j) += spec.eta * rng.normal();
        }
    }
    return result;
}

MultiViewDataset generate_synthetic(const SyntheticSpec& spec, Rng& rng) {
    if (spec.samples == 0 || spec.clusters == 0 || spec.latent_dim == 0) {
        throw ConfigError("generate_synthetic: samples, clusters and latent_dim must be positive");
    }
    if (spec.samples < spec.clusters) {
        throw ConfigError("generate_synthetic: need at least one sample per cluster");
    }
    if (spec.view_widths.empty()) throw ConfigError("generate_synthetic: no view widths");

    // Cluster centers, then per-sample latents around them. Labels cycle
    // through clusters so counts are balanced within one.
    Matrix centers = rng.gaussian(spec.clusters, spec.latent_dim);
    for (auto& x : centers.values()) x *= spec.separation;

    std::vector<int> labels(spec.samples);
    Matrix latents(spec.samples, spec.latent_dim);
    for (std::size_t i = 0; i < spec.samples; ++i) {
        const auto c = static_cast<std::size_t>(i % spec.clusters);
        labels[i] = static_cast<int>(c);
        for (std::size_t j = 0; j < spec.latent_dim; ++j) {
            latents(i, j) = centers(c, j) + rng.normal();
        }
    }

    MultiViewDataset data;
    data.labels = std::move(labels);
    const double lin_scale = 1.0 / std::sqrt(static_cast<double>(spec.latent_dim));
    for (std::size_t v = 0; v < spec.view_widths.size(); ++v) {
        Rng map_rng(Rng::derive(spec.map_seed, v));
        Matrix lin = map_rng.gaussian(spec.view_widths[v], spec.latent_dim);
        Matrix bend = map_rng.gaussian(spec.view_widths[v], spec.latent_dim);
        for (auto& x : lin.values()) x *= lin_scale;
        for (auto& x : bend.values()) x *= lin_scale;
        // Linear map plus a small ReLU component.
        Matrix view = matmul(latents, transpose(lin));
        axpy(view, 0.1, relu(matmul(latents, transpose(bend))));
        data.views.push_back(std::move(view));
        data.view_names.push_back("view" + std::to_string(v));
    }
    data.validate();
    return data;
}

std::pair<std::vector<std::size_t>, std::vector<std::size_t>> gallery_probe_split(
    const std::optional<std::vector<int>>& labels, std::size_t n, double gallery_fraction,
    std::uint64_t seed) {
    if (n == 0) throw ConfigError("gallery_probe_split: empty dataset");
    if (gallery_fraction <= 0.0 || gallery_fraction >= 1.0) {
        throw ConfigError("gallery_probe_split: gallery fraction must be in (0, 1)");
    }
    if (labels && labels->size() != n) {
        throw ConfigError("gallery_probe_split: labels length != n");
    }

    Rng rng(seed);
    std::vector<std::size_t> gallery, probe;

    // One stratum per class when labels exist, otherwise a single stratum.
    std::vector<std::vector<std::size_t>> strata;
    if (labels) {
        int max_label = 0;
        for (int l : *labels) max_label = std::max(max_label, l);
        strata.resize(static_cast<std::size_t>(max_label) + 1);
        for (std::size_t i = 0; i < n; ++i) strata[(*labels)[i]].push_back(i);
    } else {
        strata.emplace_back(n);
        std::iota(strata.back().begin(), strata.back().end(), std::size_t{0});
    }

    for (std::size_t c = 0; c < strata.size(); ++c) {
        auto& members = strata[c];
        if (members.empty()) continue;
        const auto take = static_cast<std::size_t>(
            std::llround(gallery_fraction * static_cast<double>(members.size())));
        if (take == 0) {
            throw ConfigError("gallery_probe_split: class " + std::to_string(c) + " has " +
                              std::to_string(members.size()) +
                              " samples; gallery would be empty at this ratio");
        }
        for (std::size_t i = 0; i + 1 < members.size(); ++i) {
            const std::size_t j = i + rng.uniform_index(members.size() - i);
            std::swap(members[i], members[j]);
        }
        gallery.insert(gallery.end(), members.begin(), members.begin() + take);
        probe.insert(probe.end(), members.begin() + take, members.end());
    }
    std::sort(gallery.begin(), gallery.end());
    std::sort(probe.begin(), probe.end());
    return {std::move(gallery), std::move(probe)};
}

}  // namespace dua
