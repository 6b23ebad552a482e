#pragma once

#include <cstdint>
#include <vector>

#include "dua/matrix.hpp"

namespace dua {

struct Partition {
    std::vector<int> assignments;  // values in [0, k)
    int k = 0;
};

/// k-means++ seeding plus Lloyd iterations to an assignment fixpoint (at most
/// 300 sweeps), best inertia over `restarts` seeded restarts. Empty clusters
/// are repaired by stealing the point farthest from its own centroid.
Partition kmeans(const Matrix& points, int k, int restarts, std::uint64_t seed);

double kmeans_inertia(const Matrix& points, const Partition& p);

/// Fraction of samples matched under the best one-to-one cluster/class
/// matching (optimal assignment on the contingency matrix).
double clustering_accuracy(const std::vector<int>& truth, const std::vector<int>& pred);

/// I(T;P) / sqrt(H(T) H(P)) with natural logs. 1 when both partitions are a
/// single identical cluster, 0 when either entropy is zero and they differ.
double nmi(const std::vector<int>& truth, const std::vector<int>& pred);

/// Fraction of sample pairs on which the partitions agree. Requires N >= 2.
double rand_index(const std::vector<int>& truth, const std::vector<int>& pred);

/// Harmonic mean of pairwise precision and recall on same-cluster pairs.
/// 1 if both partitions are all singletons, 0 when there are no true
/// positives otherwise. Requires N >= 2.
double pairwise_f(const std::vector<int>& truth, const std::vector<int>& pred);

/// Majority vote among the k nearest gallery points (Euclidean); ties broken
/// by smallest mean distance, then smallest label.
std::vector<int> knn_classify(const Matrix& gallery, const std::vector<int>& gallery_labels,
                              const Matrix& probe, int k);

/// Min-cost assignment on a square cost matrix; returns the column matched to
/// each row. Exposed for the metric tests.
std::vector<int> hungarian_min_cost(const std::vector<std::vector<double>>& cost);

struct MetricStats {
    double mean = 0.0;
    double stddev = 0.0;  // population
};

struct MetricValues {
    double acc = 0.0;
    double nmi = 0.0;
    double f_score = 0.0;
    double rand_index = 0.0;
};

struct MetricReport {
    MetricStats acc, nmi, f_score, rand_index;
    int runs = 0;
};

MetricValues clustering_metrics(const std::vector<int>& truth, const std::vector<int>& pred);

MetricStats aggregate(const std::vector<double>& values);

/// Table-style clustering protocol: k = class count, `runs` k-means runs with
/// distinct seeds, mean and population std per metric.
MetricReport evaluate_clustering(const Matrix& points, const std::vector<int>& labels, int runs,
                                 std::uint64_t seed, int restarts = 10);

/// Per-run metric values for callers that need medians or significance
/// re-analysis.
std::vector<MetricValues> clustering_runs(const Matrix& points, const std::vector<int>& labels,
                                          int runs, std::uint64_t seed, int restarts = 10);

struct ClassificationReport {
    double gallery_fraction = 0.8;
    MetricStats acc;
    int runs = 0;
};

/// Gallery/probe KNN protocol: `runs` stratified splits, mean and population
/// std of probe accuracy.
ClassificationReport evaluate_classification(const Matrix& points, const std::vector<int>& labels,
                                             double gallery_fraction, int knn_k, int runs,
                                             std::uint64_t seed);

}  // namespace dua
