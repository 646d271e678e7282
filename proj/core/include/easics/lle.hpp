#ifndef EASICS_LLE_HPP
#define EASICS_LLE_HPP

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "easics/dataset.hpp"

namespace easics {

// k nearest rows per row (self excluded), ascending by Euclidean distance,
// ties broken toward the smaller row index.
struct NeighborGraph {
    std::size_t k = 0;
    std::vector<std::vector<Eigen::Index>> indices;
};

// Row i reconstructs sample i from its neighbors; each weight row sums to 1.
struct ReconstructionWeights {
    Eigen::Index n = 0;
    std::size_t k = 0;
    std::vector<std::vector<Eigen::Index>> indices;  // same layout as the graph
    Eigen::MatrixXd weights;                         // n x k, aligned with indices

    // Expands to the dense n x n matrix (zero outside neighborhoods).
    Eigen::MatrixXd dense() const;
};

// Low-dimensional coordinates with the source ids carried along.
struct Embedding {
    Eigen::MatrixXd values;  // n x d
    std::vector<std::string> sample_ids;
    std::vector<std::string> subject_ids;

    Eigen::Index rows() const { return values.rows(); }
    Eigen::Index dim() const { return values.cols(); }
};

struct LleParams {
    std::size_t k_neighbors = 30;
    Eigen::Index dim = 30;
    double reg = 1e-3;  // local Gram regularization, as a fraction of its trace
};

NeighborGraph knn_graph(const SampleMatrix& x, std::size_t k);

// Solves the constrained least squares per row: w = Z^-1 1 normalized to unit
// sum, where Z is the local Gram matrix of neighbor displacements. With
// reg > 0 the solve uses Z + reg*trace(Z)*I (so rank-deficient neighborhoods,
// k > #features included, stay well-posed); with reg == 0 a numerically
// singular Z throws SingularLocalGram.
ReconstructionWeights reconstruction_weights(const SampleMatrix& x, const NeighborGraph& g,
                                             double reg);

// M = (I-W)^T (I-W); symmetric PSD, with the constant vector in its null space
// whenever weight rows sum to 1.
Eigen::MatrixXd embedding_cost_matrix(const ReconstructionWeights& w);

// Eigenvectors of the d smallest non-trivial eigenvalues of M (the bottom
// constant eigenvector is skipped), scaled by sqrt(n). Column signs are
// canonicalized: first component over 1e-12 in magnitude is made positive.
Embedding embed(const ReconstructionWeights& w, Eigen::Index dim);

// knn_graph + reconstruction_weights + embed, with ids carried through.
Embedding lle(const SampleMatrix& x, const LleParams& params);

// CSV dump, header `sample_id,subject_id,e0,...,e{d-1}`.
void write_embedding_csv(const Embedding& e, const std::string& path);

} // namespace easics

#endif
