#include "easics/som.hpp"

#include <cmath>
#include <numeric>

#include <json.hpp>

#include "easics/error.hpp"
#include "easics/rng.hpp"

namespace easics {

void SomConfig::validate() const {
    if (grid_rows < 1 || grid_cols < 1 || n_nodes() < 2)
        throw Error(ErrorCode::ConfigInvalid, "SOM grid needs at least 2 nodes");
    if (!(lr_init > 0.0 && lr_init <= 1.0))
        throw Error(ErrorCode::ConfigInvalid, "lr_init must be in (0, 1]");
    if (!(lr_threshold > 0.0))
        throw Error(ErrorCode::ConfigInvalid, "lr_threshold must be > 0");
    if (!(lr_threshold < lr_init))
        throw Error(ErrorCode::ConfigInvalid, "lr_threshold must be below lr_init");
    if (!(radius_init > 0.0))
        throw Error(ErrorCode::ConfigInvalid, "radius_init must be > 0");
    if (iter_max < 1) throw Error(ErrorCode::ConfigInvalid, "iter_max must be >= 1");
}

namespace {

std::vector<std::pair<int, int>> grid_coords(const SomConfig& cfg) {
    std::vector<std::pair<int, int>> coords;
    coords.reserve(static_cast<std::size_t>(cfg.n_nodes()));
    for (int r = 0; r < cfg.grid_rows; ++r)
        for (int c = 0; c < cfg.grid_cols; ++c) coords.emplace_back(r, c);
    return coords;
}

int nearest_node(const Eigen::MatrixXd& weights, const Eigen::RowVectorXd& x) {
    int best = 0;
    double best_d = (weights.row(0) - x).squaredNorm();
    for (Eigen::Index node = 1; node < weights.rows(); ++node) {
        const double d = (weights.row(node) - x).squaredNorm();
        if (d < best_d) {
            best_d = d;
            best = static_cast<int>(node);
        }
    }
    return best;
}

} // namespace

SomModel train_som(const Embedding& data, const SomConfig& cfg) {
    const Eigen::Index n = data.rows();
    const Eigen::Index dim = data.dim();
    if (n == 0 || dim == 0) throw Error(ErrorCode::EmptyInput, "SOM needs a nonempty embedding");
    if (cfg.grid_rows < 1 || cfg.grid_cols < 1 || cfg.n_nodes() < 2)
        throw Error(ErrorCode::ConfigInvalid, "SOM grid needs at least 2 nodes");
    if (!(cfg.lr_init > 0.0 && cfg.lr_init <= 1.0) || !(cfg.lr_threshold > 0.0) ||
        !(cfg.radius_init > 0.0) || cfg.iter_max < 1)
        throw Error(ErrorCode::ConfigInvalid, "SOM rates and iter_max must be positive");

    const int nodes = cfg.n_nodes();
    Rng rng(cfg.seed);

    SomModel model;
    model.config = cfg;
    model.node_coords = grid_coords(cfg);
    model.weights.resize(nodes, dim);

    Eigen::VectorXd lo = data.values.colwise().minCoeff();
    Eigen::VectorXd hi = data.values.colwise().maxCoeff();
    for (int node = 0; node < nodes; ++node)
        for (Eigen::Index d = 0; d < dim; ++d)
            model.weights(node, d) = rng.uniform(lo(d), hi(d));

    // Squared grid distances between node positions.
    Eigen::MatrixXd grid_d2(nodes, nodes);
    for (int a = 0; a < nodes; ++a)
        for (int b = 0; b < nodes; ++b) {
            const double dr = model.node_coords[a].first - model.node_coords[b].first;
            const double dc = model.node_coords[a].second - model.node_coords[b].second;
            grid_d2(a, b) = dr * dr + dc * dc;
        }

    const double lr_ratio = cfg.lr_threshold / cfg.lr_init;
    const double sigma_ratio = 0.5 / cfg.radius_init;
    const double inv_iter_max = 1.0 / static_cast<double>(cfg.iter_max);

    std::vector<std::size_t> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), 0);

    std::size_t iter = 0;
    bool done = false;
    while (!done) {
        rng.shuffle(order);
        for (const std::size_t sample : order) {
            const double frac = static_cast<double>(iter) * inv_iter_max;
            const double lr = cfg.lr_init * std::pow(lr_ratio, frac);
            if (iter >= cfg.iter_max || lr <= cfg.lr_threshold) {
                done = true;
                break;
            }
            const double sigma = cfg.radius_init * std::pow(sigma_ratio, frac);
            const double inv_two_sigma2 = 1.0 / (2.0 * sigma * sigma);
            const double reach2 = sigma * sigma;  // neighborhood size: grid_dist <= sigma

            const Eigen::RowVectorXd x = data.values.row(static_cast<Eigen::Index>(sample));
            const int bmu = nearest_node(model.weights, x);
            for (int node = 0; node < nodes; ++node) {
                if (grid_d2(bmu, node) > reach2) continue;
                const double h = std::exp(-grid_d2(bmu, node) * inv_two_sigma2);
                model.weights.row(node) += lr * h * (x - model.weights.row(node));
            }
            ++iter;
        }
    }
    model.iterations_run = iter;
    return model;
}

int best_matching_unit(const SomModel& model, const Eigen::Ref<const Eigen::RowVectorXd>& x) {
    if (x.cols() != model.dim())
        throw Error(ErrorCode::DimMismatch,
                    "query dim " + std::to_string(x.cols()) + " vs model dim " +
                        std::to_string(model.dim()));
    const Eigen::RowVectorXd row = x;
    return nearest_node(model.weights, row);
}

Partition partition_from_som(const SomModel& model, const Embedding& data) {
    if (data.dim() != model.dim())
        throw Error(ErrorCode::DimMismatch,
                    "embedding dim " + std::to_string(data.dim()) + " vs model dim " +
                        std::to_string(model.dim()));
    Partition p;
    p.labels.resize(static_cast<std::size_t>(data.rows()));
    for (Eigen::Index i = 0; i < data.rows(); ++i) {
        const Eigen::RowVectorXd row = data.values.row(i);
        p.labels[static_cast<std::size_t>(i)] = nearest_node(model.weights, row);
    }
    return p;
}

std::string to_json(const SomModel& model) {
    nlohmann::ordered_json j;
    j["config"] = {{"grid_rows", model.config.grid_rows},
                   {"grid_cols", model.config.grid_cols},
                   {"lr_init", model.config.lr_init},
                   {"lr_threshold", model.config.lr_threshold},
                   {"radius_init", model.config.radius_init},
                   {"iter_max", model.config.iter_max},
                   {"seed", model.config.seed}};
    j["iterations_run"] = model.iterations_run;
    auto weights = nlohmann::ordered_json::array();
    for (Eigen::Index r = 0; r < model.weights.rows(); ++r) {
        auto row = nlohmann::ordered_json::array();
        for (Eigen::Index c = 0; c < model.weights.cols(); ++c) row.push_back(model.weights(r, c));
        weights.push_back(std::move(row));
    }
    j["weights"] = std::move(weights);
    return j.dump(2);
}

} // namespace easics
