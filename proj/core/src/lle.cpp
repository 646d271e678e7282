#include "easics/lle.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>

#include "easics/error.hpp"
#include "easics/parallel.hpp"

namespace easics {

NeighborGraph knn_graph(const SampleMatrix& x, std::size_t k) {
    const Eigen::Index n = x.rows();
    if (n < 2 || k < 1 || static_cast<Eigen::Index>(k) >= n)
        throw Error(ErrorCode::KTooLarge,
                    "k=" + std::to_string(k) + " with n=" + std::to_string(n));

    NeighborGraph g;
    g.k = k;
    g.indices.assign(static_cast<std::size_t>(n), {});

    parallel_for(static_cast<std::size_t>(n), [&](std::size_t iu) {
        const auto i = static_cast<Eigen::Index>(iu);
        std::vector<std::pair<double, Eigen::Index>> dist;
        dist.reserve(static_cast<std::size_t>(n) - 1);
        for (Eigen::Index j = 0; j < n; ++j) {
            if (j == i) continue;
            dist.emplace_back((x.values.row(i) - x.values.row(j)).squaredNorm(), j);
        }
        std::partial_sort(dist.begin(), dist.begin() + static_cast<std::ptrdiff_t>(k),
                          dist.end());
        auto& row = g.indices[iu];
        row.reserve(k);
        for (std::size_t a = 0; a < k; ++a) row.push_back(dist[a].second);
    });
    return g;
}

ReconstructionWeights reconstruction_weights(const SampleMatrix& x, const NeighborGraph& g,
                                             double reg) {
    const Eigen::Index n = x.rows();
    if (g.indices.size() != static_cast<std::size_t>(n))
        throw Error(ErrorCode::LengthMismatch, "graph does not match matrix rows");
    if (reg < 0.0) throw Error(ErrorCode::ConfigInvalid, "reg must be >= 0");

    const auto k = static_cast<Eigen::Index>(g.k);
    ReconstructionWeights w;
    w.n = n;
    w.k = g.k;
    w.indices = g.indices;
    w.weights.resize(n, k);

    parallel_for(static_cast<std::size_t>(n), [&](std::size_t iu) {
        const auto i = static_cast<Eigen::Index>(iu);
        const auto& nbrs = g.indices[iu];

        Eigen::MatrixXd shifts(k, x.cols());
        for (Eigen::Index a = 0; a < k; ++a)
            shifts.row(a) = x.values.row(i) - x.values.row(nbrs[static_cast<std::size_t>(a)]);
        Eigen::MatrixXd gram = shifts * shifts.transpose();
        const double tr = gram.trace();

        if (reg > 0.0) {
            if (tr <= 0.0) {
                // All neighbors coincide with the point; any unit-sum row solves
                // the problem, take the uniform one.
                w.weights.row(i).setConstant(1.0 / static_cast<double>(k));
                return;
            }
            gram.diagonal().array() += reg * tr;
        } else {
            Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(gram,
                                                              Eigen::EigenvaluesOnly);
            const double max_ev = es.eigenvalues().maxCoeff();
            const double min_ev = es.eigenvalues().minCoeff();
            if (max_ev <= 0.0 || min_ev <= max_ev * 1e-12)
                throw Error(ErrorCode::SingularLocalGram,
                            "local Gram singular at row " + std::to_string(i) +
                                " and reg == 0");
        }

        Eigen::VectorXd sol = gram.ldlt().solve(Eigen::VectorXd::Ones(k));
        const double sum = sol.sum();
        if (!std::isfinite(sum) || sum == 0.0)
            throw Error(ErrorCode::SingularLocalGram,
                        "weight solve failed at row " + std::to_string(i));
        w.weights.row(i) = (sol / sum).transpose();
    });
    return w;
}

Eigen::MatrixXd ReconstructionWeights::dense() const {
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const auto& nbrs = indices[static_cast<std::size_t>(i)];
        for (std::size_t a = 0; a < nbrs.size(); ++a)
            m(i, nbrs[a]) = weights(i, static_cast<Eigen::Index>(a));
    }
    return m;
}

Eigen::MatrixXd embedding_cost_matrix(const ReconstructionWeights& w) {
    Eigen::MatrixXd a = Eigen::MatrixXd::Identity(w.n, w.n) - w.dense();
    return a.transpose() * a;
}

Embedding embed(const ReconstructionWeights& w, Eigen::Index dim) {
    if (dim < 1 || dim >= w.n)
        throw Error(ErrorCode::KTooLarge,
                    "embedding dim " + std::to_string(dim) + " with n=" + std::to_string(w.n));

    Eigen::MatrixXd m = embedding_cost_matrix(w);

    // The constant vector spans an exact null direction of M (unit row sums),
    // but it need not come out as eigenvector 0 when the null space is
    // degenerate (disconnected neighbor graphs). Shifting it up by a rank-one
    // term leaves every other mode untouched and makes the bottom dim
    // eigenvectors exactly the non-constant ones, so columns stay centered.
    const double shift = m.trace() / static_cast<double>(w.n) + 1.0;
    m.array() += shift / static_cast<double>(w.n);

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m);
    if (es.info() != Eigen::Success)
        throw Error(ErrorCode::EigenFailure, "eigendecomposition did not converge");

    const double root_n = std::sqrt(static_cast<double>(w.n));
    Embedding e;
    e.values = es.eigenvectors().leftCols(dim) * root_n;
    for (Eigen::Index c = 0; c < dim; ++c) {
        for (Eigen::Index r = 0; r < w.n; ++r) {
            const double v = e.values(r, c);
            if (std::abs(v) > 1e-12) {
                if (v < 0.0) e.values.col(c) = -e.values.col(c);
                break;
            }
        }
    }
    return e;
}

Embedding lle(const SampleMatrix& x, const LleParams& params) {
    if (params.dim > x.cols())
        throw Error(ErrorCode::ConfigInvalid,
                    "embedding dim " + std::to_string(params.dim) + " exceeds feature count " +
                        std::to_string(x.cols()));
    const NeighborGraph g = knn_graph(x, params.k_neighbors);
    const ReconstructionWeights w = reconstruction_weights(x, g, params.reg);
    Embedding e = embed(w, params.dim);
    e.sample_ids = x.sample_ids;
    e.subject_ids = x.subject_ids;
    return e;
}

void write_embedding_csv(const Embedding& e, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw Error(ErrorCode::IoError, "cannot write " + path);
    std::string line = "sample_id,subject_id";
    for (Eigen::Index c = 0; c < e.dim(); ++c) {
        line += ",e";
        line += std::to_string(c);
    }
    out << line << '\n';
    char buf[32];
    for (Eigen::Index r = 0; r < e.rows(); ++r) {
        line.clear();
        line += e.sample_ids[static_cast<std::size_t>(r)];
        line += ',';
        line += e.subject_ids[static_cast<std::size_t>(r)];
        for (Eigen::Index c = 0; c < e.dim(); ++c) {
            line += ',';
            const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), e.values(r, c));
            line.append(buf, ptr);
        }
        out << line << '\n';
    }
    if (!out) throw Error(ErrorCode::IoError, "write failed for " + path);
}

} // namespace easics
