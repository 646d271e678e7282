#include "easics/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

#include "easics/error.hpp"
#include "json_codec.hpp"

namespace easics {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Members per distinct label, ordered by label value.
std::vector<std::vector<Eigen::Index>> group_by_label(const Eigen::MatrixXd& x,
                                                      const Partition& p) {
    if (p.labels.size() != static_cast<std::size_t>(x.rows()))
        throw Error(ErrorCode::LengthMismatch,
                    "partition has " + std::to_string(p.labels.size()) + " labels for " +
                        std::to_string(x.rows()) + " rows");
    std::map<int, std::vector<Eigen::Index>> groups;
    for (std::size_t i = 0; i < p.labels.size(); ++i)
        groups[p.labels[i]].push_back(static_cast<Eigen::Index>(i));
    std::vector<std::vector<Eigen::Index>> out;
    out.reserve(groups.size());
    for (auto& [label, members] : groups) out.push_back(std::move(members));
    return out;
}

Eigen::MatrixXd cluster_centroids(const Eigen::MatrixXd& x,
                                  const std::vector<std::vector<Eigen::Index>>& clusters) {
    Eigen::MatrixXd centroids = Eigen::MatrixXd::Zero(
        static_cast<Eigen::Index>(clusters.size()), x.cols());
    for (std::size_t c = 0; c < clusters.size(); ++c) {
        for (const Eigen::Index i : clusters[c]) centroids.row(static_cast<Eigen::Index>(c)) += x.row(i);
        centroids.row(static_cast<Eigen::Index>(c)) /= static_cast<double>(clusters[c].size());
    }
    return centroids;
}

} // namespace

double silhouette_precomputed(const Eigen::MatrixXd& distances, const Partition& p) {
    const Eigen::Index n = distances.rows();
    if (n < 3) throw Error(ErrorCode::TooFewSamples, "silhouette needs n >= 3");
    const auto clusters = group_by_label(distances, p);
    const std::size_t k = clusters.size();
    if (k < 2) throw Error(ErrorCode::SingleCluster, "silhouette needs >= 2 clusters");

    // cluster index per sample
    std::vector<std::size_t> cluster_of(static_cast<std::size_t>(n));
    for (std::size_t c = 0; c < k; ++c)
        for (const Eigen::Index i : clusters[c]) cluster_of[static_cast<std::size_t>(i)] = c;

    double total = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
        const std::size_t own = cluster_of[static_cast<std::size_t>(i)];
        if (clusters[own].size() == 1) continue;  // singleton contributes 0

        std::vector<double> mean_dist(k, 0.0);
        for (std::size_t c = 0; c < k; ++c) {
            double sum = 0.0;
            for (const Eigen::Index j : clusters[c]) sum += distances(i, j);
            const double denom = (c == own) ? static_cast<double>(clusters[c].size() - 1)
                                            : static_cast<double>(clusters[c].size());
            mean_dist[c] = sum / denom;
        }
        const double a = mean_dist[own];
        double b = kInf;
        for (std::size_t c = 0; c < k; ++c)
            if (c != own) b = std::min(b, mean_dist[c]);
        const double denom = std::max(a, b);
        total += denom > 0.0 ? (b - a) / denom : 0.0;
    }
    return total / static_cast<double>(n);
}

double silhouette(const Eigen::MatrixXd& x, const Partition& p) {
    const Eigen::Index n = x.rows();
    Eigen::MatrixXd distances(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        distances(i, i) = 0.0;
        for (Eigen::Index j = i + 1; j < n; ++j) {
            const double d = (x.row(i) - x.row(j)).norm();
            distances(i, j) = d;
            distances(j, i) = d;
        }
    }
    return silhouette_precomputed(distances, p);
}

double calinski_harabasz(const Eigen::MatrixXd& x, const Partition& p) {
    const Eigen::Index n = x.rows();
    const auto clusters = group_by_label(x, p);
    const auto k = static_cast<Eigen::Index>(clusters.size());
    if (k < 2) throw Error(ErrorCode::SingleCluster, "CH needs >= 2 clusters");

    const Eigen::RowVectorXd global = x.colwise().mean();
    const Eigen::MatrixXd centroids = cluster_centroids(x, clusters);

    double between = 0.0;
    double within = 0.0;
    for (Eigen::Index c = 0; c < k; ++c) {
        const double size = static_cast<double>(clusters[static_cast<std::size_t>(c)].size());
        between += size * (centroids.row(c) - global).squaredNorm();
        for (const Eigen::Index i : clusters[static_cast<std::size_t>(c)])
            within += (x.row(i) - centroids.row(c)).squaredNorm();
    }
    if (within == 0.0) return kInf;
    return (between / static_cast<double>(k - 1)) / (within / static_cast<double>(n - k));
}

double davies_bouldin(const Eigen::MatrixXd& x, const Partition& p) {
    const auto clusters = group_by_label(x, p);
    const auto k = static_cast<Eigen::Index>(clusters.size());
    if (k < 2) throw Error(ErrorCode::SingleCluster, "DB needs >= 2 clusters");

    const Eigen::MatrixXd centroids = cluster_centroids(x, clusters);
    Eigen::VectorXd scatter(k);
    for (Eigen::Index c = 0; c < k; ++c) {
        double sum = 0.0;
        for (const Eigen::Index i : clusters[static_cast<std::size_t>(c)])
            sum += (x.row(i) - centroids.row(c)).norm();
        scatter(c) = sum / static_cast<double>(clusters[static_cast<std::size_t>(c)].size());
    }

    double total = 0.0;
    for (Eigen::Index i = 0; i < k; ++i) {
        double worst = 0.0;
        for (Eigen::Index j = 0; j < k; ++j) {
            if (j == i) continue;
            const double m = (centroids.row(i) - centroids.row(j)).norm();
            const double r = m > 0.0 ? (scatter(i) + scatter(j)) / m : kInf;
            worst = std::max(worst, r);
        }
        total += worst;
    }
    return total / static_cast<double>(k);
}

double ics(const Partition& p, const std::vector<std::string>& subjects) {
    if (p.labels.size() != subjects.size())
        throw Error(ErrorCode::LengthMismatch,
                    std::to_string(p.labels.size()) + " labels vs " +
                        std::to_string(subjects.size()) + " subject ids");
    if (subjects.empty()) throw Error(ErrorCode::LengthMismatch, "no samples");

    // label histogram per subject; majority tie resolves to the smallest label
    std::map<std::string, std::map<int, int>> per_subject;
    for (std::size_t i = 0; i < subjects.size(); ++i) per_subject[subjects[i]][p.labels[i]]++;

    std::size_t mismatches = 0;
    for (const auto& [subject, hist] : per_subject) {
        int majority = hist.begin()->first;
        int best = hist.begin()->second;
        std::size_t total = 0;
        for (const auto& [label, count] : hist) {
            total += static_cast<std::size_t>(count);
            if (count > best) {
                best = count;
                majority = label;
            }
        }
        mismatches += total - static_cast<std::size_t>(hist.at(majority));
    }
    return static_cast<double>(mismatches) / static_cast<double>(subjects.size());
}

ValidityReport evaluate_partition(const Eigen::MatrixXd& x, const Partition& p,
                                  const std::vector<std::string>& subjects) {
    ValidityReport r;
    r.sc = silhouette(x, p);
    r.ch = calinski_harabasz(x, p);
    r.db = davies_bouldin(x, p);
    r.ics = ics(p, subjects);
    r.n_clusters = p.n_clusters();
    return r;
}

std::string to_json(const ValidityReport& report) {
    return detail::validity_json(report).dump(2);
}

} // namespace easics
