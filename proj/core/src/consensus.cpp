#include "easics/consensus.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>

#include "easics/error.hpp"
#include "easics/parallel.hpp"
#include "easics/rng.hpp"
#include "json_codec.hpp"

namespace easics {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct LloydResult {
    std::vector<int> assign;
    double objective = kInf;
    std::vector<double> objective_trace;
};

double within_ss(const Eigen::MatrixXd& x, const Eigen::MatrixXd& centroids,
                 const std::vector<int>& assign) {
    double ss = 0.0;
    for (Eigen::Index i = 0; i < x.rows(); ++i)
        ss += (x.row(i) - centroids.row(assign[static_cast<std::size_t>(i)])).squaredNorm();
    return ss;
}

int nearest_centroid(const Eigen::MatrixXd& centroids, int k,
                     const Eigen::RowVectorXd& point) {
    int best = 0;
    double best_d = (centroids.row(0) - point).squaredNorm();
    for (int c = 1; c < k; ++c) {
        const double d = (centroids.row(c) - point).squaredNorm();
        if (d < best_d) {
            best_d = d;
            best = c;
        }
    }
    return best;
}

// One seeded k-means++ run followed by Lloyd iterations.
LloydResult lloyd_once(const Eigen::MatrixXd& x, int k, Rng& rng) {
    const Eigen::Index n = x.rows();
    Eigen::MatrixXd centroids(k, x.cols());

    // k-means++: next centroid drawn with probability proportional to the
    // squared distance to the nearest one chosen so far.
    std::vector<double> d2(static_cast<std::size_t>(n), kInf);
    centroids.row(0) = x.row(static_cast<Eigen::Index>(rng.uniform_index(static_cast<std::uint64_t>(n))));
    for (int c = 1; c < k; ++c) {
        double total = 0.0;
        for (Eigen::Index i = 0; i < n; ++i) {
            const double d = (x.row(i) - centroids.row(c - 1)).squaredNorm();
            auto& slot = d2[static_cast<std::size_t>(i)];
            slot = std::min(slot, d);
            total += slot;
        }
        Eigen::Index pick = 0;
        if (total > 0.0) {
            double target = rng.uniform01() * total;
            for (Eigen::Index i = 0; i < n; ++i) {
                target -= d2[static_cast<std::size_t>(i)];
                if (target <= 0.0) {
                    pick = i;
                    break;
                }
                if (i == n - 1) pick = i;
            }
        } else {
            pick = static_cast<Eigen::Index>(rng.uniform_index(static_cast<std::uint64_t>(n)));
        }
        centroids.row(c) = x.row(pick);
    }

    LloydResult result;
    result.assign.assign(static_cast<std::size_t>(n), -1);
    constexpr int kMaxIter = 300;
    for (int iter = 0; iter < kMaxIter; ++iter) {
        bool changed = false;
        for (Eigen::Index i = 0; i < n; ++i) {
            const Eigen::RowVectorXd point = x.row(i);
            const int best = nearest_centroid(centroids, k, point);
            if (best != result.assign[static_cast<std::size_t>(i)]) {
                result.assign[static_cast<std::size_t>(i)] = best;
                changed = true;
            }
        }

        // Reseed each empty cluster to the point farthest from its centroid.
        std::vector<Eigen::Index> sizes(static_cast<std::size_t>(k), 0);
        for (const int a : result.assign) ++sizes[static_cast<std::size_t>(a)];
        std::vector<bool> stolen(static_cast<std::size_t>(n), false);
        for (int c = 0; c < k; ++c) {
            if (sizes[static_cast<std::size_t>(c)] > 0) continue;
            double far_d = -1.0;
            Eigen::Index far_i = -1;
            for (Eigen::Index i = 0; i < n; ++i) {
                if (stolen[static_cast<std::size_t>(i)]) continue;
                const int a = result.assign[static_cast<std::size_t>(i)];
                if (sizes[static_cast<std::size_t>(a)] <= 1) continue;  // keep donors nonempty
                const double d = (x.row(i) - centroids.row(a)).squaredNorm();
                if (d > far_d) {
                    far_d = d;
                    far_i = i;
                }
            }
            if (far_i < 0) continue;  // not enough distinct points to fill k clusters
            --sizes[static_cast<std::size_t>(result.assign[static_cast<std::size_t>(far_i)])];
            result.assign[static_cast<std::size_t>(far_i)] = c;
            sizes[static_cast<std::size_t>(c)] = 1;
            stolen[static_cast<std::size_t>(far_i)] = true;
            changed = true;
        }

        if (!changed) break;

        centroids.setZero();
        for (Eigen::Index i = 0; i < n; ++i)
            centroids.row(result.assign[static_cast<std::size_t>(i)]) += x.row(i);
        for (int c = 0; c < k; ++c)
            if (sizes[static_cast<std::size_t>(c)] > 0)
                centroids.row(c) /= static_cast<double>(sizes[static_cast<std::size_t>(c)]);
        result.objective_trace.push_back(within_ss(x, centroids, result.assign));
    }

    result.objective = within_ss(x, centroids, result.assign);
    return result;
}

} // namespace

CoAssociationMatrix co_association(const PartitionSet& ps) {
    if (ps.members.empty()) throw Error(ErrorCode::EmptyPartitionSet, "no member partitions");
    const auto n = static_cast<Eigen::Index>(ps.n_samples);

    CoAssociationMatrix w;
    w.n = n;
    w.m = ps.members.size();
    w.counts = Eigen::MatrixXi::Zero(n, n);
    for (const auto& member : ps.members) {
        const auto& labels = member.partition.labels;
        for (Eigen::Index i = 0; i < n; ++i) {
            const int li = labels[static_cast<std::size_t>(i)];
            for (Eigen::Index j = i; j < n; ++j) {
                if (li == labels[static_cast<std::size_t>(j)]) {
                    w.counts(i, j) += 1;
                    if (i != j) w.counts(j, i) += 1;
                }
            }
        }
    }
    return w;
}

Partition kmeans(const Eigen::MatrixXd& x, int k, std::uint64_t seed, int n_restarts,
                 std::vector<double>* objective_trace) {
    const Eigen::Index n = x.rows();
    if (k < 1 || static_cast<Eigen::Index>(k) > n)
        throw Error(ErrorCode::KTooLarge, "k=" + std::to_string(k) + " with n=" + std::to_string(n));
    if (n_restarts < 1) throw Error(ErrorCode::ConfigInvalid, "n_restarts must be >= 1");

    if (k == 1) {
        Partition p;
        p.labels.assign(static_cast<std::size_t>(n), 0);
        if (objective_trace) objective_trace->clear();
        return p;
    }

    LloydResult best;
    for (int r = 0; r < n_restarts; ++r) {
        Rng rng(mix_seed(seed, static_cast<std::uint64_t>(r)));
        LloydResult run = lloyd_once(x, k, rng);
        if (run.objective < best.objective) best = std::move(run);
    }
    if (objective_trace) *objective_trace = best.objective_trace;

    Partition p;
    p.labels = std::move(best.assign);
    p.canonicalize();
    return p;
}

namespace {

struct SpectralCandidate {
    Partition partition;
    Eigen::MatrixXd coords;  // row-normalized bottom-k eigenvectors
};

SpectralCandidate spectral_embed_cluster(const CoAssociationMatrix& w, int k,
                                         std::uint64_t seed) {
    const Eigen::Index n = w.n;
    if (k < 2 || static_cast<Eigen::Index>(k) >= n)
        throw Error(ErrorCode::KTooLarge,
                    "k=" + std::to_string(k) + " with n=" + std::to_string(n));

    const Eigen::MatrixXd a = w.counts.cast<double>();
    const Eigen::VectorXd degree = a.rowwise().sum();
    for (Eigen::Index i = 0; i < n; ++i)
        if (degree(i) <= 0.0)
            throw Error(ErrorCode::IsolatedNode, "sample " + std::to_string(i) + " has zero degree");

    const Eigen::VectorXd inv_sqrt_deg = degree.array().rsqrt();
    Eigen::MatrixXd lap = Eigen::MatrixXd::Identity(n, n) -
                          inv_sqrt_deg.asDiagonal() * a * inv_sqrt_deg.asDiagonal();
    lap = 0.5 * (lap + lap.transpose()).eval();

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(lap);
    if (es.info() != Eigen::Success)
        throw Error(ErrorCode::EigenFailure, "Laplacian eigendecomposition did not converge");

    SpectralCandidate out;
    out.coords = es.eigenvectors().leftCols(k);
    for (Eigen::Index c = 0; c < out.coords.cols(); ++c) {
        for (Eigen::Index r = 0; r < n; ++r) {
            const double v = out.coords(r, c);
            if (std::abs(v) > 1e-12) {
                if (v < 0.0) out.coords.col(c) = -out.coords.col(c);
                break;
            }
        }
    }
    for (Eigen::Index r = 0; r < n; ++r) {
        const double norm = out.coords.row(r).norm();
        if (norm > 0.0) out.coords.row(r) /= norm;
    }

    out.partition = kmeans(out.coords, k, seed);
    out.partition.canonicalize();
    return out;
}

} // namespace

Partition spectral_partition(const CoAssociationMatrix& w, int k, std::uint64_t seed) {
    return spectral_embed_cluster(w, k, seed).partition;
}

ConsensusResult select_partition(const CoAssociationMatrix& w, const Embedding& x_for_sc,
                                 int k_min, int k_max, std::uint64_t seed,
                                 SelectionSpace sc_space) {
    if (k_min < 2 || k_min > k_max || static_cast<Eigen::Index>(k_max) >= w.n)
        throw Error(ErrorCode::ConfigInvalid,
                    "candidate range [" + std::to_string(k_min) + ", " + std::to_string(k_max) +
                        "] invalid for n=" + std::to_string(w.n));
    if (x_for_sc.rows() != w.n)
        throw Error(ErrorCode::LengthMismatch, "scoring space does not match matrix size");

    const std::size_t n_candidates = static_cast<std::size_t>(k_max - k_min + 1);
    struct Candidate {
        bool valid = false;
        Partition partition;
        PerKReport report;
    };
    std::vector<Candidate> candidates(n_candidates);

    Eigen::MatrixXd consensus_dist;
    if (sc_space == SelectionSpace::kConsensus)
        consensus_dist = Eigen::MatrixXd::Ones(w.n, w.n) -
                         w.counts.cast<double>() / static_cast<double>(w.m);

    parallel_for(n_candidates, [&](std::size_t slot) {
        const int k = k_min + static_cast<int>(slot);
        SpectralCandidate spectral =
            spectral_embed_cluster(w, k, mix_seed(seed, static_cast<std::uint64_t>(k)));
        Candidate& cand = candidates[slot];
        try {
            cand.report.k = k;
            const Partition& p = spectral.partition;
            switch (sc_space) {
                case SelectionSpace::kConsensus:
                    cand.report.report.sc = silhouette_precomputed(consensus_dist, p);
                    break;
                case SelectionSpace::kSpectral:
                    cand.report.report.sc = silhouette(spectral.coords, p);
                    break;
                case SelectionSpace::kEmbedding:
                    cand.report.report.sc = silhouette(x_for_sc.values, p);
                    break;
            }
            cand.report.report.ch = calinski_harabasz(x_for_sc.values, p);
            cand.report.report.db = davies_bouldin(x_for_sc.values, p);
            cand.report.report.ics = ics(p, x_for_sc.subject_ids);
            cand.report.report.n_clusters = p.n_clusters();
            cand.partition = std::move(spectral.partition);
            cand.valid = true;
        } catch (const Error& e) {
            // A candidate that collapses below 2 clusters is skipped, not fatal.
            if (e.code() != ErrorCode::SingleCluster) throw;
        }
    });

    ConsensusResult result;
    const Candidate* best = nullptr;
    for (const auto& cand : candidates) {
        if (!cand.valid) continue;
        result.per_k_reports.push_back(cand.report);
        if (best == nullptr || cand.report.report.sc > best->report.report.sc) best = &cand;
    }
    if (best == nullptr)
        throw Error(ErrorCode::AllCandidatesDegenerate,
                    "no candidate k produced >= 2 clusters");

    result.sample_partition = best->partition;
    result.selected_k = best->report.k;
    result.subject_labels = map_to_subjects(result.sample_partition, x_for_sc.subject_ids);
    return result;
}

std::vector<std::pair<std::string, int>> map_to_subjects(const Partition& p,
                                                         const std::vector<std::string>& subjects) {
    if (p.labels.size() != subjects.size())
        throw Error(ErrorCode::LengthMismatch,
                    std::to_string(p.labels.size()) + " labels vs " +
                        std::to_string(subjects.size()) + " subject ids");

    std::vector<std::string> order;
    std::map<std::string, std::map<int, int>> hist;
    for (std::size_t i = 0; i < subjects.size(); ++i) {
        if (hist.find(subjects[i]) == hist.end()) order.push_back(subjects[i]);
        hist[subjects[i]][p.labels[i]]++;
    }

    std::vector<std::pair<std::string, int>> out;
    out.reserve(order.size());
    for (const auto& subject : order) {
        const auto& counts = hist[subject];
        int modal = counts.begin()->first;
        int best = counts.begin()->second;
        for (const auto& [label, count] : counts) {
            if (count > best) {  // ties keep the smaller label
                best = count;
                modal = label;
            }
        }
        out.emplace_back(subject, modal);
    }
    return out;
}

void write_coassociation_csv(const CoAssociationMatrix& w, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw Error(ErrorCode::IoError, "cannot write " + path);
    for (Eigen::Index i = 0; i < w.n; ++i) {
        for (Eigen::Index j = 0; j < w.n; ++j) {
            if (j > 0) out << ',';
            out << w.counts(i, j);
        }
        out << '\n';
    }
    if (!out) throw Error(ErrorCode::IoError, "write failed for " + path);
}

std::string consensus_to_json(const ConsensusResult& result,
                              const std::vector<std::string>& sample_ids,
                              const std::vector<std::string>& subject_ids) {
    return detail::consensus_json(result, sample_ids, subject_ids).dump(2);
}

} // namespace easics
