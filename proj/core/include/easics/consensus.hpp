#ifndef EASICS_CONSENSUS_HPP
#define EASICS_CONSENSUS_HPP

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "easics/ensemble.hpp"
#include "easics/lle.hpp"
#include "easics/metrics.hpp"
#include "easics/partition.hpp"

namespace easics {

// Symmetric co-occurrence counts: counts(i, j) = number of member partitions
// placing samples i and j in the same cluster. Diagonal equals the member
// count m.
struct CoAssociationMatrix {
    Eigen::Index n = 0;
    std::size_t m = 0;
    Eigen::MatrixXi counts;
};

// Space in which the per-k silhouette used for model selection is computed:
// kConsensus scores against co-association disagreement distances
// (1 - counts/m), kSpectral against the spectral coordinates the candidate
// was clustered in, kEmbedding against the embedding passed as x_for_sc.
enum class SelectionSpace { kConsensus, kSpectral, kEmbedding };

struct PerKReport {
    int k = 0;
    ValidityReport report;  // sc in the selection space; ch/db/ics in the embedding
};

struct ConsensusResult {
    Partition sample_partition;
    std::vector<std::pair<std::string, int>> subject_labels;  // first-appearance order
    std::vector<PerKReport> per_k_reports;
    int selected_k = 0;
};

CoAssociationMatrix co_association(const PartitionSet& ps);

// Lloyd's algorithm with k-means++ seeding, best of n_restarts by
// within-cluster sum of squares. Empty clusters are reseeded to the point
// farthest from its centroid. Deterministic given the seed; labels are
// canonicalized by first occurrence. When objective_trace is given it receives
// the per-iteration within-SS of the winning restart (non-increasing).
Partition kmeans(const Eigen::MatrixXd& x, int k, std::uint64_t seed, int n_restarts = 10,
                 std::vector<double>* objective_trace = nullptr);

// Normalized-Laplacian spectral clustering of the co-association graph:
// L = I - D^(-1/2) A D^(-1/2), eigenvectors of the k smallest eigenvalues,
// rows normalized to unit length, then kmeans in that spectral space.
Partition spectral_partition(const CoAssociationMatrix& w, int k, std::uint64_t seed);

// Runs spectral_partition for every k in [k_min, k_max], scores each candidate
// with the silhouette in the selection space, and returns the partition with
// the largest value (ties go to the smallest k). Candidates that collapse
// below two clusters are skipped; when every k collapses,
// AllCandidatesDegenerate.
ConsensusResult select_partition(const CoAssociationMatrix& w, const Embedding& x_for_sc,
                                 int k_min, int k_max, std::uint64_t seed,
                                 SelectionSpace sc_space = SelectionSpace::kEmbedding);

// Subject label = the modal label among the subject's samples; modal ties
// resolve to the smallest label. Subjects keep their first-appearance order.
std::vector<std::pair<std::string, int>> map_to_subjects(const Partition& p,
                                                         const std::vector<std::string>& subjects);

// Square CSV of integers, no header.
void write_coassociation_csv(const CoAssociationMatrix& w, const std::string& path);

// Assignments keyed by sample and subject id, plus the per-k metric table.
std::string consensus_to_json(const ConsensusResult& result,
                              const std::vector<std::string>& sample_ids,
                              const std::vector<std::string>& subject_ids);

} // namespace easics

#endif
