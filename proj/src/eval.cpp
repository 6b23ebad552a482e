#include "dua/eval.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "dua/data.hpp"
#include "dua/errors.hpp"
#include "dua/rng.hpp"

namespace dua {

namespace {

constexpr int kMaxLloydIterations = 300;

void require_equal_length(const std::vector<int>& truth, const std::vector<int>& pred) {
    if (truth.size() != pred.size()) {
        throw ShapeError("partition length mismatch: " + std::to_string(truth.size()) + " vs " +
                         std::to_string(pred.size()));
    }
    if (truth.empty()) throw ConfigError("empty partitions");
}

// Dense labels 0..k-1 preserving first-appearance order.
std::vector<int> relabel(const std::vector<int>& labels, int& k_out) {
    std::vector<int> out(labels.size());
    std::vector<int> seen;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        auto it = std::find(seen.begin(), seen.end(), labels[i]);
        if (it == seen.end()) {
            seen.push_back(labels[i]);
            out[i] = static_cast<int>(seen.size()) - 1;
        } else {
            out[i] = static_cast<int>(it - seen.begin());
        }
    }
    k_out = static_cast<int>(seen.size());
    return out;
}

std::vector<std::vector<long long>> contingency(const std::vector<int>& truth,
                                                const std::vector<int>& pred, int kt, int kp) {
    std::vector<std::vector<long long>> table(kt, std::vector<long long>(kp, 0));
    for (std::size_t i = 0; i < truth.size(); ++i) table[truth[i]][pred[i]]++;
    return table;
}

double dist_sq(const double* a, const double* b, std::size_t d) {
    double s = 0.0;
    for (std::size_t j = 0; j < d; ++j) {
        const double diff = a[j] - b[j];
        s += diff * diff;
    }
    return s;
}

Matrix kmeanspp_centers(const Matrix& points, int k, Rng& rng) {
    const std::size_t n = points.rows(), d = points.cols();
    Matrix centers(k, d);
    std::vector<double> best_dist(n, std::numeric_limits<double>::infinity());

    std::size_t first = rng.uniform_index(n);
    for (std::size_t j = 0; j < d; ++j) centers(0, j) = points(first, j);

    for (int c = 1; c < k; ++c) {
        double total = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            best_dist[i] = std::min(best_dist[i], dist_sq(points.row(i), centers.row(c - 1), d));
            total += best_dist[i];
        }
        std::size_t chosen;
        if (total > 0.0) {
            const double target = rng.uniform() * total;
            double cum = 0.0;
            chosen = n - 1;
            for (std::size_t i = 0; i < n; ++i) {
                cum += best_dist[i];
                if (cum > target) {
                    chosen = i;
                    break;
                }
            }
        } else {
            chosen = rng.uniform_index(n);  // all mass on existing centers
        }
        for (std::size_t j = 0; j < d; ++j) centers(c, j) = points(chosen, j);
    }
    return centers;
}

struct LloydResult {
    std::vector<int> assignments;
    double inertia = 0.0;
};

LloydResult lloyd(const Matrix& points, int k, Rng& rng) {
    const std::size_t n = points.rows(), d = points.cols();
    Matrix centers = kmeanspp_centers(points, k, rng);
    std::vector<int> assign(n, -1);
    std::vector<double> assigned_dist(n, 0.0);
    std::vector<std::size_t> counts(k, 0);

    for (int iter = 0; iter < kMaxLloydIterations; ++iter) {
        bool changed = false;
        std::fill(counts.begin(), counts.end(), std::size_t{0});
        for (std::size_t i = 0; i < n; ++i) {
            int best = 0;
            double best_d = dist_sq(points.row(i), centers.row(0), d);
            for (int c = 1; c < k; ++c) {
                const double dd = dist_sq(points.row(i), centers.row(c), d);
                if (dd < best_d) {
                    best_d = dd;
                    best = c;
                }
            }
            if (best != assign[i]) changed = true;
            assign[i] = best;
            assigned_dist[i] = best_d;
            counts[best]++;
        }

        // Repair empty clusters with the point farthest from its centroid.
        for (int c = 0; c < k; ++c) {
            if (counts[c] != 0) continue;
            std::size_t worst = n;
            double worst_d = -1.0;
            for (std::size_t i = 0; i < n; ++i) {
                if (counts[assign[i]] <= 1) continue;
                if (assigned_dist[i] > worst_d) {
                    worst_d = assigned_dist[i];
                    worst = i;
                }
            }
            if (worst == n) break;  // fewer distinct points than clusters
            counts[assign[worst]]--;
            assign[worst] = c;
            counts[c] = 1;
            assigned_dist[worst] = 0.0;
            changed = true;
        }

        centers.fill(0.0);
        for (std::size_t i = 0; i < n; ++i) {
            double* cr = centers.row(assign[i]);
            const double* pr = points.row(i);
            for (std::size_t j = 0; j < d; ++j) cr[j] += pr[j];
        }
        for (int c = 0; c < k; ++c) {
            if (counts[c] == 0) continue;
            double* cr = centers.row(c);
            for (std::size_t j = 0; j < d; ++j) cr[j] /= static_cast<double>(counts[c]);
        }
        if (!changed) break;
    }

    LloydResult res;
    res.assignments = std::move(assign);
    for (std::size_t i = 0; i < n; ++i) {
        res.inertia += dist_sq(points.row(i), centers.row(res.assignments[i]), d);
    }
    return res;
}

}  // namespace

Partition kmeans(const Matrix& points, int k, int restarts, std::uint64_t seed) {
    if (k < 1) throw ConfigError("kmeans: k must be >= 1");
    if (static_cast<std::size_t>(k) > points.rows()) {
        throw ConfigError("kmeans: k = " + std::to_string(k) + " exceeds sample count " +
                          std::to_string(points.rows()));
    }
    if (restarts < 1) throw ConfigError("kmeans: restarts must be >= 1");

    Partition best;
    double best_inertia = std::numeric_limits<double>::infinity();
    for (int r = 0; r < restarts; ++r) {
        Rng rng(Rng::derive(seed, static_cast<std::uint64_t>(r)));
        LloydResult res = lloyd(points, k, rng);
        if (res.inertia < best_inertia) {
            best_inertia = res.inertia;
            best.assignments = std::move(res.assignments);
        }
    }
    best.k = k;
    return best;
}

double kmeans_inertia(const Matrix& points, const Partition& p) {
    const std::size_t n = points.rows(), d = points.cols();
    Matrix centers(p.k, d);
    std::vector<std::size_t> counts(p.k, 0);
    for (std::size_t i = 0; i < n; ++i) {
        counts[p.assignments[i]]++;
        double* cr = centers.row(p.assignments[i]);
        for (std::size_t j = 0; j < d; ++j) cr[j] += points(i, j);
    }
    for (int c = 0; c < p.k; ++c) {
        if (counts[c] == 0) continue;
        for (std::size_t j = 0; j < d; ++j) centers(c, j) /= static_cast<double>(counts[c]);
    }
    double inertia = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        inertia += dist_sq(points.row(i), centers.row(p.assignments[i]), d);
    }
    return inertia;
}

std::vector<int> hungarian_min_cost(const std::vector<std::vector<double>>& cost) {
    const int n = static_cast<int>(cost.size());
    if (n == 0) return {};
    const double inf = std::numeric_limits<double>::infinity();
    // Potentials-based assignment, 1-indexed internally.
    std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0);
    std::vector<int> p(n + 1, 0), way(n + 1, 0);
    for (int i = 1; i <= n; ++i) {
        p[0] = i;
        int j0 = 0;
        std::vector<double> minv(n + 1, inf);
        std::vector<char> used(n + 1, 0);
        do {
            used[j0] = 1;
            const int i0 = p[j0];
            int j1 = 0;
            double delta = inf;
            for (int j = 1; j <= n; ++j) {
                if (used[j]) continue;
                const double cur = cost[i0 - 1][j - 1] - u[i0] - v[j];
                if (cur < minv[j]) {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if (minv[j] < delta) {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for (int j = 0; j <= n; ++j) {
                if (used[j]) {
                    u[p[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
        } while (p[j0] != 0);
        do {
            const int j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
        } while (j0);
    }
    std::vector<int> match(n, -1);
    for (int j = 1; j <= n; ++j) {
        if (p[j] > 0) match[p[j] - 1] = j - 1;
    }
    return match;
}

double clustering_accuracy(const std::vector<int>& truth, const std::vector<int>& pred) {
    require_equal_length(truth, pred);
    int kt = 0, kp = 0;
    const auto t = relabel(truth, kt);
    const auto q = relabel(pred, kp);
    const auto table = contingency(t, q, kt, kp);

    const int side = std::max(kt, kp);
    std::vector<std::vector<double>> cost(side, std::vector<double>(side, 0.0));
    for (int a = 0; a < kt; ++a)
        for (int b = 0; b < kp; ++b) cost[a][b] = -static_cast<double>(table[a][b]);
    const auto match = hungarian_min_cost(cost);

    long long agree = 0;
    for (int a = 0; a < kt; ++a) {
        if (match[a] < kp) agree += table[a][match[a]];
    }
    return static_cast<double>(agree) / static_cast<double>(truth.size());
}

double nmi(const std::vector<int>& truth, const std::vector<int>& pred) {
    require_equal_length(truth, pred);
    int kt = 0, kp = 0;
    const auto t = relabel(truth, kt);
    const auto q = relabel(pred, kp);
    const auto table = contingency(t, q, kt, kp);
    const auto n = static_cast<double>(truth.size());

    std::vector<long long> row(kt, 0), col(kp, 0);
    for (int a = 0; a < kt; ++a)
        for (int b = 0; b < kp; ++b) {
            row[a] += table[a][b];
            col[b] += table[a][b];
        }

    auto entropy = [n](const std::vector<long long>& counts) {
        double h = 0.0;
        for (long long c : counts) {
            if (c == 0) continue;
            const double pr = static_cast<double>(c) / n;
            h -= pr * std::log(pr);
        }
        return h;
    };
    const double ht = entropy(row), hp = entropy(col);
    if (ht == 0.0 && hp == 0.0) return 1.0;  // both a single identical cluster
    if (ht == 0.0 || hp == 0.0) return 0.0;

    double mi = 0.0;
    for (int a = 0; a < kt; ++a) {
        for (int b = 0; b < kp; ++b) {
            if (table[a][b] == 0) continue;
            const double joint = static_cast<double>(table[a][b]) / n;
            const double ratio = (static_cast<double>(table[a][b]) * n) /
                                 (static_cast<double>(row[a]) * static_cast<double>(col[b]));
            mi += joint * std::log(ratio);
        }
    }
    return std::clamp(mi / (std::sqrt(ht) * std::sqrt(hp)), 0.0, 1.0);
}

namespace {

struct PairCounts {
    long long tp = 0;      // same cluster in both
    long long t2 = 0;      // same-truth pairs
    long long p2 = 0;      // same-pred pairs
    long long total = 0;   // N(N-1)/2
};

PairCounts pair_counts(const std::vector<int>& truth, const std::vector<int>& pred) {
    require_equal_length(truth, pred);
    if (truth.size() < 2) throw ConfigError("pair metrics require N >= 2");
    int kt = 0, kp = 0;
    const auto t = relabel(truth, kt);
    const auto q = relabel(pred, kp);
    const auto table = contingency(t, q, kt, kp);
    auto choose2 = [](long long c) { return c * (c - 1) / 2; };

    PairCounts out;
    std::vector<long long> row(kt, 0), col(kp, 0);
    for (int a = 0; a < kt; ++a)
        for (int b = 0; b < kp; ++b) {
            out.tp += choose2(table[a][b]);
            row[a] += table[a][b];
            col[b] += table[a][b];
        }
    for (long long c : row) out.t2 += choose2(c);
    for (long long c : col) out.p2 += choose2(c);
    const auto n = static_cast<long long>(truth.size());
    out.total = choose2(n);
    return out;
}

}  // namespace

double rand_index(const std::vector<int>& truth, const std::vector<int>& pred) {
    const PairCounts c = pair_counts(truth, pred);
    // Agreements: pairs together in both plus pairs apart in both.
    const long long agree = c.total - c.t2 - c.p2 + 2 * c.tp;
    return static_cast<double>(agree) / static_cast<double>(c.total);
}

double pairwise_f(const std::vector<int>& truth, const std::vector<int>& pred) {
    const PairCounts c = pair_counts(truth, pred);
    if (c.tp == 0) {
        // All singletons in both partitions counts as a perfect match.
        return (c.t2 == 0 && c.p2 == 0) ? 1.0 : 0.0;
    }
    return 2.0 * static_cast<double>(c.tp) / static_cast<double>(c.t2 + c.p2);
}

std::vector<int> knn_classify(const Matrix& gallery, const std::vector<int>& gallery_labels,
                              const Matrix& probe, int k) {
    if (gallery.rows() == 0) throw ConfigError("knn_classify: empty gallery");
    if (gallery_labels.size() != gallery.rows()) {
        throw ShapeError("knn_classify: gallery labels length mismatch");
    }
    if (probe.cols() != gallery.cols()) throw ShapeError("knn_classify: feature width mismatch");
    if (k < 1 || static_cast<std::size_t>(k) > gallery.rows()) {
        throw ConfigError("knn_classify: k must be in [1, gallery size]");
    }

    const std::size_t g = gallery.rows(), d = gallery.cols();
    std::vector<int> out(probe.rows());
    std::vector<std::pair<double, std::size_t>> dist(g);
    for (std::size_t i = 0; i < probe.rows(); ++i) {
        for (std::size_t j = 0; j < g; ++j) {
            dist[j] = {dist_sq(probe.row(i), gallery.row(j), d), j};
        }
        std::partial_sort(dist.begin(), dist.begin() + k, dist.end());

        // Vote counts and distance sums per label among the k nearest.
        std::vector<int> labels_seen;
        std::vector<int> votes;
        std::vector<double> dist_sums;
        for (int m = 0; m < k; ++m) {
            const int label = gallery_labels[dist[m].second];
            const double dd = std::sqrt(dist[m].first);
            auto it = std::find(labels_seen.begin(), labels_seen.end(), label);
            if (it == labels_seen.end()) {
                labels_seen.push_back(label);
                votes.push_back(1);
                dist_sums.push_back(dd);
            } else {
                const auto idx = static_cast<std::size_t>(it - labels_seen.begin());
                votes[idx]++;
                dist_sums[idx] += dd;
            }
        }
        std::size_t best = 0;
        for (std::size_t c = 1; c < labels_seen.size(); ++c) {
            if (votes[c] > votes[best]) {
                best = c;
                continue;
            }
            if (votes[c] < votes[best]) continue;
            const double mean_c = dist_sums[c] / votes[c];
            const double mean_b = dist_sums[best] / votes[best];
            if (mean_c < mean_b || (mean_c == mean_b && labels_seen[c] < labels_seen[best])) {
                best = c;
            }
        }
        out[i] = labels_seen[best];
    }
    return out;
}

MetricValues clustering_metrics(const std::vector<int>& truth, const std::vector<int>& pred) {
    MetricValues v;
    v.acc = clustering_accuracy(truth, pred);
    v.nmi = nmi(truth, pred);
    v.f_score = pairwise_f(truth, pred);
    v.rand_index = rand_index(truth, pred);
    return v;
}

MetricStats aggregate(const std::vector<double>& values) {
    MetricStats s;
    if (values.empty()) return s;
    const auto n = static_cast<double>(values.size());
    s.mean = std::accumulate(values.begin(), values.end(), 0.0) / n;
    double ss = 0.0;
    for (double v : values) ss += (v - s.mean) * (v - s.mean);
    s.stddev = std::sqrt(ss / n);
    return s;
}

std::vector<MetricValues> clustering_runs(const Matrix& points, const std::vector<int>& labels,
                                          int runs, std::uint64_t seed, int restarts) {
    if (labels.size() != points.rows()) throw ShapeError("clustering_runs: labels/points mismatch");
    if (runs < 1) throw ConfigError("clustering_runs: runs must be >= 1");
    int k = 0;
    relabel(labels, k);
    std::vector<MetricValues> out;
    out.reserve(runs);
    for (int r = 0; r < runs; ++r) {
        Partition p = kmeans(points, k, restarts, Rng::derive(seed, 1000 + r));
        out.push_back(clustering_metrics(labels, p.assignments));
    }
    return out;
}

MetricReport evaluate_clustering(const Matrix& points, const std::vector<int>& labels, int runs,
                                 std::uint64_t seed, int restarts) {
    const auto values = clustering_runs(points, labels, runs, seed, restarts);
    std::vector<double> acc, nm, f, ri;
    for (const auto& v : values) {
        acc.push_back(v.acc);
        nm.push_back(v.nmi);
        f.push_back(v.f_score);
        ri.push_back(v.rand_index);
    }
    MetricReport rep;
    rep.acc = aggregate(acc);
    rep.nmi = aggregate(nm);
    rep.f_score = aggregate(f);
    rep.rand_index = aggregate(ri);
    rep.runs = runs;
    return rep;
}

ClassificationReport evaluate_classification(const Matrix& points, const std::vector<int>& labels,
                                             double gallery_fraction, int knn_k, int runs,
                                             std::uint64_t seed) {
    if (labels.size() != points.rows()) {
        throw ShapeError("evaluate_classification: labels/points mismatch");
    }
    if (runs < 1) throw ConfigError("evaluate_classification: runs must be >= 1");
    std::vector<double> accs;
    accs.reserve(runs);
    for (int r = 0; r < runs; ++r) {
        const auto [gallery_idx, probe_idx] = gallery_probe_split(
            labels, points.rows(), gallery_fraction, Rng::derive(seed, 2000 + r));
        Matrix gal(gallery_idx.size(), points.cols());
        Matrix prb(probe_idx.size(), points.cols());
        std::vector<int> gal_labels(gallery_idx.size());
        std::vector<int> prb_labels(probe_idx.size());
        for (std::size_t i = 0; i < gallery_idx.size(); ++i) {
            for (std::size_t j = 0; j < points.cols(); ++j) gal(i, j) = points(gallery_idx[i], j);
            gal_labels[i] = labels[gallery_idx[i]];
        }
        for (std::size_t i = 0; i < probe_idx.size(); ++i) {
            for (std::size_t j = 0; j < points.cols(); ++j) prb(i, j) = points(probe_idx[i], j);
            prb_labels[i] = labels[probe_idx[i]];
        }
        const auto pred = knn_classify(gal, gal_labels, prb, knn_k);
        long long correct = 0;
        for (std::size_t i = 0; i < pred.size(); ++i) {
            if (pred[i] == prb_labels[i]) ++correct;
        }
        accs.push_back(probe_idx.empty()
                           ? 1.0
                           : static_cast<double>(correct) / static_cast<double>(probe_idx.size()));
    }
    ClassificationReport rep;
    rep.gallery_fraction = gallery_fraction;
    rep.acc = aggregate(accs);
    rep.runs = runs;
    return rep;
}

}  // namespace dua
