#ifndef EASICS_SOM_HPP
#define EASICS_SOM_HPP

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "easics/lle.hpp"
#include "easics/partition.hpp"

namespace easics {

struct SomConfig {
    int grid_rows = 4;
    int grid_cols = 4;
    double lr_init = 0.5;       // in (0, 1]
    double lr_threshold = 0.01; // training stops once the rate decays to this
    double radius_init = 2.0;   // Gaussian neighborhood radius, decays to 0.5
    std::size_t iter_max = 10000;
    std::uint64_t seed = 0;

    int n_nodes() const { return grid_rows * grid_cols; }

    // Full config invariants (including lr_threshold < lr_init). train_som
    // itself tolerates lr_threshold >= lr_init and just performs no updates.
    void validate() const;
};

struct SomModel {
    SomConfig config;
    Eigen::MatrixXd weights;                      // n_nodes x dim
    std::vector<std::pair<int, int>> node_coords; // (grid row, grid col) per node
    std::size_t iterations_run = 0;

    int n_nodes() const { return static_cast<int>(weights.rows()); }
    Eigen::Index dim() const { return weights.cols(); }
};

// Sequential Kohonen training: weights start uniform in the per-dimension data
// range (seeded), then one presentation per iteration in a seeded shuffled
// order. Nodes within grid distance sigma of the winner move toward the sample
// by l * exp(-grid_dist^2 / (2 sigma^2)); l and sigma decay exponentially from
// (lr_init, radius_init) toward (lr_threshold, 0.5), so late training updates
// the winner alone. Identical (data, config) gives a bit-identical model.
SomModel train_som(const Embedding& data, const SomConfig& cfg);

// Index of the node nearest to x (Euclidean); ties go to the lowest index.
int best_matching_unit(const SomModel& model, const Eigen::Ref<const Eigen::RowVectorXd>& x);

// Labels each row with its best matching unit. Labels are raw node indices;
// empty nodes are permitted.
Partition partition_from_som(const SomModel& model, const Embedding& data);

// Debug dump: config, seed and weight matrix.
std::string to_json(const SomModel& model);

} // namespace easics

#endif
