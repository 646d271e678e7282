#ifndef EASICS_METRICS_HPP
#define EASICS_METRICS_HPP

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "easics/lle.hpp"
#include "easics/partition.hpp"

namespace easics {

struct ValidityReport {
    double sc = 0.0;   // silhouette, in [-1, 1]
    double ch = 0.0;   // Calinski-Harabasz, >= 0, +inf when within-SS is 0
    double db = 0.0;   // Davies-Bouldin, >= 0, +inf when centroids coincide
    double ics = 0.0;  // intra-subject consistency score, in [0, 1]
    int n_clusters = 0;
};

// Mean silhouette over samples: s = (b - a) / max(a, b) with a the mean
// distance inside the own cluster (self excluded) and b the smallest mean
// distance to another cluster. Singleton-cluster samples contribute 0.
double silhouette(const Eigen::MatrixXd& x, const Partition& p);

// Same score on an explicit symmetric pairwise-distance matrix.
double silhouette_precomputed(const Eigen::MatrixXd& distances, const Partition& p);

// (between-SS / (k-1)) / (within-SS / (n-k)). Returns +inf when within-SS is
// zero, so selection loops can skip the degenerate case instead of handling
// an exception.
double calinski_harabasz(const Eigen::MatrixXd& x, const Partition& p);

// Mean over clusters of the worst (S_i + S_j) / M_ij ratio; S is the mean
// distance to the cluster centroid, M the centroid distance. Returns +inf
// when two centroids coincide.
double davies_bouldin(const Eigen::MatrixXd& x, const Partition& p);

// Fraction of samples whose label differs from their subject's majority label
// (majority ties resolve to the smallest label). 0 means every subject's
// samples agree.
double ics(const Partition& p, const std::vector<std::string>& subjects);

// All four indices at once, with distances taken in the given space.
ValidityReport evaluate_partition(const Eigen::MatrixXd& x, const Partition& p,
                                  const std::vector<std::string>& subjects);

inline double silhouette(const Embedding& e, const Partition& p) {
    return silhouette(e.values, p);
}
inline double calinski_harabasz(const Embedding& e, const Partition& p) {
    return calinski_harabasz(e.values, p);
}
inline double davies_bouldin(const Embedding& e, const Partition& p) {
    return davies_bouldin(e.values, p);
}

std::string to_json(const ValidityReport& report);

} // namespace easics

#endif
