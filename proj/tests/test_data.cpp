#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>
#include <unistd.h>

#include "dua/csv.hpp"
#include "dua/data.hpp"
#include "dua/errors.hpp"
#include "dua/eval.hpp"

using namespace dua;
namespace fs = std::filesystem;

namespace {

struct TempDir {
    fs::path path;
    TempDir() {
        path = fs::temp_directory_path() /
               ("dua_test_" + std::to_string(::getpid()) + "_" +
                std::to_string(reinterpret_cast<std::uintptr_t>(this)));
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
};

void write_file(const fs::path& p, const std::string& content) {
    std::ofstream out(p);
    out << content;
}

}  // namespace

TEST_CASE("load_views reads aligned views and labels") {
    TempDir dir;
    write_file(dir.path / "a.csv", "1,2\n3,4\n5,6\n");
    write_file(dir.path / "b.csv", "1,2,3,4\n5,6,7,8\n9,10,11,12\n");
    write_file(dir.path / "labels.csv", "0\n1\n0\n");

    MultiViewDataset data =
        load_views({dir.path / "a.csv", dir.path / "b.csv"}, dir.path / "labels.csv");
    CHECK(data.sample_count() == 3);
    CHECK(data.view_count() == 2);
    CHECK(data.view_width(0) == 2);
    CHECK(data.view_width(1) == 4);
    CHECK(data.labels.has_value());
    CHECK(data.class_count() == 2);
    CHECK(data.views[1](2, 3) == 12.0);
}

TEST_CASE("load_views errors name the problem") {
    TempDir dir;
    write_file(dir.path / "a.csv", "1,2\n3,4\n5,6\n");
    write_file(dir.path / "short.csv", "1\n2\n");
    CHECK_THROWS_AS(load_views({dir.path / "a.csv", dir.path / "short.csv"}), DataError);

    write_file(dir.path / "bad.csv", "1,2\n3,abc\n");
    try {
        load_views({dir.path / "bad.csv"});
        FAIL("expected DataError");
    } catch (const DataError& e) {
        const std::string msg = e.what();
        CHECK(msg.find("bad.csv") != std::string::npos);
        CHECK(msg.find("row 2") != std::string::npos);
        CHECK(msg.find("col 2") != std::string::npos);
        CHECK(msg.find("abc") != std::string::npos);
    }

    write_file(dir.path / "empty.csv", "");
    CHECK_THROWS_AS(load_views({dir.path / "empty.csv"}), DataError);

    write_file(dir.path / "inf.csv", "1,inf\n");
    CHECK_THROWS_AS(load_views({dir.path / "inf.csv"}), DataError);
}

TEST_CASE("save/load round-trips datasets bit-exactly") {
    TempDir dir;
    Rng rng(99);
    MultiViewDataset data;
    data.views.push_back(rng.gaussian(7, 3));
    data.views.push_back(rng.gaussian(7, 5));
    data.view_names = {"alpha", "beta"};
    data.labels = std::vector<int>{0, 1, 2, 0, 1, 2, 0};

    const fs::path manifest = save_dataset(data, dir.path / "ds");
    MultiViewDataset back = load_dataset(manifest);
    CHECK(back.view_count() == 2);
    CHECK(back.views[0] == data.views[0]);
    CHECK(back.views[1] == data.views[1]);
    CHECK(back.view_names == data.view_names);
    CHECK(*back.labels == *data.labels);

    // Decimal literals survive a load/save/load cycle untouched.
    write_file(dir.path / "dec.csv", "0.1,1.25\n-3.5,1e-3\n");
    MultiViewDataset d1 = load_views({dir.path / "dec.csv"});
    save_dataset(d1, dir.path / "ds2");
    MultiViewDataset d2 = load_dataset(dir.path / "ds2" / "dataset.json");
    CHECK(d1.views[0] == d2.views[0]);
}

TEST_CASE("zscore_normalize uses population std and is idempotent") {
    MultiViewDataset data;
    data.views.push_back(Matrix{{1.0, 7.0}, {3.0, 7.0}});
    data.view_names.push_back("v0");

    MultiViewDataset norm = zscore_normalize(data);
    CHECK(norm.views[0](0, 0) == doctest::Approx(-1.0).epsilon(1e-12));
    CHECK(norm.views[0](1, 0) == doctest::Approx(1.0).epsilon(1e-12));
    // Constant column maps to zeros.
    CHECK(norm.views[0](0, 1) == 0.0);
    CHECK(norm.views[0](1, 1) == 0.0);
    REQUIRE(norm.normalization.has_value());
    CHECK(norm.normalization->mean[0][0] == doctest::Approx(2.0));
    CHECK(norm.normalization->std[0][0] == doctest::Approx(1.0));
    CHECK(norm.normalization->std[0][1] == 0.0);

    MultiViewDataset twice = zscore_normalize(norm);
    for (std::size_t i = 0; i < 2; ++i)
        for (std::size_t j = 0; j < 2; ++j)
            CHECK(std::fabs(twice.views[0](i, j) - norm.views[0](i, j)) <= 1e-12);
}

TEST_CASE("zscore_normalize rejects single-sample datasets") {
    MultiViewDataset data;
    data.views.push_back(Matrix{{1.0, 2.0}});
    data.view_names.push_back("v0");
    CHECK_THROWS_AS(zscore_normalize(data), ConfigError);
}

TEST_CASE("normalization metadata inverts the transform on nonconstant features") {
    Rng rng(123);
    MultiViewDataset data;
    data.views.push_back(rng.gaussian(20, 4));
    data.view_names.push_back("v0");
    for (std::size_t i = 0; i < 20; ++i) data.views[0](i, 2) *= 10.0;

    MultiViewDataset norm = zscore_normalize(data);
    MultiViewDataset back = denormalize(norm);
    for (std::size_t i = 0; i < 20; ++i)
        for (std::size_t j = 0; j < 4; ++j)
            CHECK(std::fabs(back.views[0](i, j) - data.views[0](i, j)) <= 1e-10);
}

TEST_CASE("inject_noise pollutes exactly the recorded block") {
    Rng rng(7);
    MultiViewDataset data;
    data.views.push_back(rng.gaussian(10, 6));
    data.views.push_back(rng.gaussian(10, 4));
    data.view_names = {"v0", "v1"};

    NoiseSpec spec;
    spec.view = 0;
    spec.eta = 1.5;
    spec.fraction = 0.5;
    spec.seed = 11;
    NoiseResult res = inject_noise(data, spec);

    CHECK(res.polluted.size() == 5);
    std::set<std::size_t> polluted(res.polluted.begin(), res.polluted.end());
    CHECK(polluted.size() == 5);

    // Untouched: view 1 entirely, and clean rows of view 0.
    CHECK(res.data.views[1] == data.views[1]);
    for (std::size_t i = 0; i < 10; ++i) {
        bool changed = false;
        for (std::size_t j = 0; j < 6; ++j) {
            if (res.data.views[0](i, j) != data.views[0](i, j)) changed = true;
        }
        CHECK(changed == (polluted.count(i) > 0));
    }

    // Determinism.
    NoiseResult res2 = inject_noise(data, spec);
    CHECK(res2.polluted == res.polluted);
    CHECK(res2.data.views[0] == res.data.views[0]);
}

TEST_CASE("inject_noise with eta 0 changes nothing but records the set") {
    Rng rng(8);
    MultiViewDataset data;
    data.views.push_back(rng.gaussian(10, 3));
    data.view_names.push_back("v0");
    NoiseSpec spec;
    spec.eta = 0.0;
    spec.fraction = 0.3;
    spec.seed = 5;
    NoiseResult res = inject_noise(data, spec);
    CHECK(res.polluted.size() == 3);
    CHECK(res.data.views[0] == data.views[0]);
}

TEST_CASE("inject_noise tiny fraction rounds to an empty set") {
    Rng rng(9);
    MultiViewDataset data;
    data.views.push_back(rng.gaussian(10, 3));
    data.view_names.push_back("v0");
    NoiseSpec spec;
    spec.eta = 1.0;
    spec.fraction = 0.01;  // 0.1 samples, rounds to 0
    NoiseResult res = inject_noise(data, spec);
    CHECK(res.polluted.empty());
    CHECK(res.data.views[0] == data.views[0]);
}

TEST_CASE("inject_noise mean squared perturbation approximates eta^2") {
    Rng rng(10);
    MultiViewDataset data;
    data.views.push_back(rng.gaussian(400, 50));  // polluted block >= 10^4 cells
    data.view_names.push_back("v0");
    NoiseSpec spec;
    spec.eta = 2.0;
    spec.fraction = 0.5;
    spec.seed = 21;
    NoiseResult res = inject_noise(data, spec);
    double ss = 0.0;
    std::size_t cells = 0;
    for (std::size_t idx : res.polluted) {
        for (std::size_t j = 0; j < 50; ++j) {
            const double d = res.data.views[0](idx, j) - data.views[0](idx, j);
            ss += d * d;
            ++cells;
        }
    }
    CHECK(cells >= 10000);
    const double mean_sq = ss / static_cast<double>(cells);
    CHECK(mean_sq > 4.0 * 0.9);
    CHECK(mean_sq < 4.0 * 1.1);
}

TEST_CASE("generate_synthetic is deterministic with balanced labels") {
    SyntheticSpec spec;
    spec.samples = 41;
    spec.clusters = 4;
    spec.latent_dim = 3;
    spec.view_widths = {6, 5};
    Rng r1(33), r2(33);
    MultiViewDataset a = generate_synthetic(spec, r1);
    MultiViewDataset b = generate_synthetic(spec, r2);
    CHECK(a.views[0] == b.views[0]);
    CHECK(a.views[1] == b.views[1]);
    CHECK(*a.labels == *b.labels);

    std::vector<int> counts(4, 0);
    for (int l : *a.labels) counts[l]++;
    const auto [lo, hi] = std::minmax_element(counts.begin(), counts.end());
    CHECK(*hi - *lo <= 1);
}

TEST_CASE("generate_synthetic separation controls cluster recoverability") {
    SyntheticSpec spec;
    spec.samples = 120;
    spec.clusters = 3;
    spec.latent_dim = 4;
    spec.view_widths = {8, 8};
    spec.map_seed = 3;

    auto concat = [](const MultiViewDataset& data) {
        Matrix all(data.sample_count(), 16);
        for (std::size_t i = 0; i < data.sample_count(); ++i)
            for (std::size_t j = 0; j < 8; ++j) {
                all(i, j) = data.views[0](i, j);
                all(i, 8 + j) = data.views[1](i, j);
            }
        return all;
    };

    SUBCASE("well separated blobs cluster perfectly from raw features") {
        spec.separation = 10.0;
        Rng rng(44);
        MultiViewDataset data = generate_synthetic(spec, rng);
        Partition p = kmeans(concat(data), 3, 10, 7);
        CHECK(clustering_accuracy(*data.labels, p.assignments) == doctest::Approx(1.0));
    }

    SUBCASE("zero separation means chance-level clustering") {
        spec.separation = 0.0;
        Rng rng(45);
        MultiViewDataset data = generate_synthetic(spec, rng);
        Partition p = kmeans(concat(data), 3, 10, 7);
        const double acc = clustering_accuracy(*data.labels, p.assignments);
        // Chance is 1/3; allow sampling noise but rule out real structure.
        CHECK(acc < 0.55);
    }
}

TEST_CASE("gallery_probe_split basic contract") {
    auto [gallery, probe] = gallery_probe_split(std::nullopt, 10, 0.8, 3);
    CHECK(gallery.size() == 8);
    CHECK(probe.size() == 2);
    std::set<std::size_t> all(gallery.begin(), gallery.end());
    all.insert(probe.begin(), probe.end());
    CHECK(all.size() == 10);

    auto [g2, p2] = gallery_probe_split(std::nullopt, 10, 0.8, 3);
    CHECK(g2 == gallery);
    CHECK(p2 == probe);
}

TEST_CASE("gallery_probe_split stratifies by label") {
    std::vector<int> labels;
    for (int c = 0; c < 3; ++c)
        for (int i = 0; i < 10; ++i) labels.push_back(c);
    auto [gallery, probe] = gallery_probe_split(labels, labels.size(), 0.7, 9);
    CHECK(gallery.size() + probe.size() == 30);
    std::vector<int> per_class(3, 0);
    for (std::size_t idx : gallery) per_class[labels[idx]]++;
    for (int c = 0; c < 3; ++c) CHECK(per_class[c] == 7);  // exactly round(0.7 * 10)
}

TEST_CASE("gallery_probe_split rejects classes too small for the ratio") {
    std::vector<int> labels = {0, 0, 0, 0, 1};  // class 1 has one sample
    CHECK_THROWS_AS(gallery_probe_split(labels, 5, 0.2, 1), ConfigError);
}
