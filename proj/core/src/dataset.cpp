#include "easics/dataset.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <unordered_set>

#include "easics/error.hpp"
#include "easics/rng.hpp"

namespace easics {

namespace {

std::vector<std::string> split_line(const std::string& line) {
    std::vector<std::string> fields;
    std::size_t start = 0;
    for (;;) {
        const std::size_t pos = line.find(',', start);
        if (pos == std::string::npos) {
            fields.push_back(line.substr(start));
            break;
        }
        fields.push_back(line.substr(start, pos - start));
        start = pos + 1;
    }
    return fields;
}

void strip_cr(std::string& line) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
}

double parse_cell(const std::string& cell, std::size_t row, std::size_t col) {
    double value = 0.0;
    const char* first = cell.data();
    const char* last = cell.data() + cell.size();
    const auto [ptr, ec] = std::from_chars(first, last, value);
    if (ec != std::errc{} || ptr != last || !std::isfinite(value)) {
        throw Error(ErrorCode::NonNumericCell,
                    "cell \"" + cell + "\" at data row " + std::to_string(row) +
                        ", feature column " + std::to_string(col));
    }
    return value;
}

void format_cell(std::string& out, double value) {
    char buf[32];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
    out.append(buf, ptr);
}

} // namespace

void SampleMatrix::validate() const {
    const auto n = static_cast<std::size_t>(rows());
    if (sample_ids.size() != n || subject_ids.size() != n)
        throw Error(ErrorCode::LengthMismatch,
                    "id columns do not match row count " + std::to_string(n));
    std::unordered_set<std::string> seen;
    for (const auto& id : sample_ids)
        if (!seen.insert(id).second)
            throw Error(ErrorCode::DuplicateSampleId, "sample_id \"" + id + "\"");
    if (!values.allFinite())
        throw Error(ErrorCode::NonNumericCell, "matrix contains non-finite values");
}

void SyntheticSpec::validate() const {
    if (n_subjects < 1 || samples_per_subject < 1 || n_features < 1 || n_true_clusters < 1)
        throw Error(ErrorCode::InvalidSpec, "all counts must be >= 1");
    if (n_true_clusters > n_subjects)
        throw Error(ErrorCode::InvalidSpec,
                    "n_true_clusters " + std::to_string(n_true_clusters) +
                        " exceeds n_subjects " + std::to_string(n_subjects));
    if (!(cluster_separation >= 0.0))
        throw Error(ErrorCode::InvalidSpec, "cluster_separation must be >= 0");
}

SampleMatrix load_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::IoError, "cannot open " + path);

    std::string line;
    if (!std::getline(in, line)) throw Error(ErrorCode::EmptyFile, path);
    strip_cr(line);

    const auto header = split_line(line);
    if (header.size() < 3 || header[0] != "sample_id" || header[1] != "subject_id")
        throw Error(ErrorCode::MissingHeader,
                    "expected `sample_id,subject_id,f0,...`, got \"" + line + "\"");
    const std::size_t n_features = header.size() - 2;

    std::vector<std::string> sample_ids;
    std::vector<std::string> subject_ids;
    std::vector<double> cells;
    std::size_t data_row = 0;
    while (std::getline(in, line)) {
        strip_cr(line);
        if (line.empty() && in.peek() == std::ifstream::traits_type::eof()) break;
        const auto fields = split_line(line);
        if (fields.size() != header.size())
            throw Error(ErrorCode::RaggedRow,
                        "data row " + std::to_string(data_row) + " has " +
                            std::to_string(fields.size()) + " fields, header has " +
                            std::to_string(header.size()));
        sample_ids.push_back(fields[0]);
        subject_ids.push_back(fields[1]);
        for (std::size_t c = 0; c < n_features; ++c)
            cells.push_back(parse_cell(fields[2 + c], data_row, c));
        ++data_row;
    }
    if (data_row == 0) throw Error(ErrorCode::EmptyFile, path + " has a header but no data rows");

    SampleMatrix m;
    m.values.resize(static_cast<Eigen::Index>(data_row), static_cast<Eigen::Index>(n_features));
    for (std::size_t r = 0; r < data_row; ++r)
        for (std::size_t c = 0; c < n_features; ++c)
            m.values(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) =
                cells[r * n_features + c];
    m.sample_ids = std::move(sample_ids);
    m.subject_ids = std::move(subject_ids);
    m.validate();
    return m;
}

void write_csv(const SampleMatrix& m, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw Error(ErrorCode::IoError, "cannot write " + path);

    std::string line = "sample_id,subject_id";
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
        line += ",f";
        line += std::to_string(c);
    }
    out << line << '\n';

    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        line.clear();
        line += m.sample_ids[static_cast<std::size_t>(r)];
        line += ',';
        line += m.subject_ids[static_cast<std::size_t>(r)];
        for (Eigen::Index c = 0; c < m.cols(); ++c) {
            line += ',';
            format_cell(line, m.values(r, c));
        }
        out << line << '\n';
    }
    if (!out) throw Error(ErrorCode::IoError, "write failed for " + path);
}

SyntheticData generate_synthetic(const SyntheticSpec& spec) {
    spec.validate();

    const auto n_subjects = static_cast<Eigen::Index>(spec.n_subjects);
    const auto per_subject = static_cast<Eigen::Index>(spec.samples_per_subject);
    const auto f = static_cast<Eigen::Index>(spec.n_features);
    const auto k = static_cast<Eigen::Index>(spec.n_true_clusters);
    const Eigen::Index n = n_subjects * per_subject;

    Rng rng(spec.seed);

    // Centroids sit on random orthonormal directions (pairwise distance
    // exactly cluster_separation), dense across features so per-feature
    // standardization cannot wipe out the separation. Falls back to plain
    // random unit directions when k exceeds the feature dimension.
    const double scale = spec.cluster_separation / std::sqrt(2.0);
    Eigen::MatrixXd directions = Eigen::MatrixXd::Zero(k, f);
    for (Eigen::Index c = 0; c < k; ++c) {
        Eigen::VectorXd dir(f);
        for (;;) {
            for (Eigen::Index j = 0; j < f; ++j) dir(j) = rng.normal();
            if (c < f)  // Gram-Schmidt against the previous directions
                for (Eigen::Index prev = 0; prev < c; ++prev)
                    dir -= directions.row(prev).dot(dir) * directions.row(prev).transpose();
            if (dir.norm() > 1e-8) break;
        }
        directions.row(c) = dir.transpose() / dir.norm();
    }
    const Eigen::MatrixXd centroids = scale * directions;

    // Unit within-cluster spread measured radially (E||x - centroid||^2 = 1),
    // split between subject placement and replicate jitter so the replicate
    // std is 0.25 of the total. Per-dimension sigmas follow from dividing by
    // sqrt(f).
    const double root_f = std::sqrt(static_cast<double>(f));
    const double subject_std = std::sqrt(1.0 - 0.25 * 0.25) / root_f;
    const double replicate_std = 0.25 / root_f;

    SyntheticData out;
    out.data.values.resize(n, f);
    out.data.sample_ids.reserve(static_cast<std::size_t>(n));
    out.data.subject_ids.reserve(static_cast<std::size_t>(n));
    out.true_labels.reserve(spec.n_subjects);

    Eigen::VectorXd subject_mean(f);
    Eigen::Index row = 0;
    for (Eigen::Index s = 0; s < n_subjects; ++s) {
        const Eigen::Index cluster = s % k;
        out.true_labels.push_back(static_cast<int>(cluster));
        for (Eigen::Index j = 0; j < f; ++j)
            subject_mean(j) = centroids(cluster, j) + subject_std * rng.normal();
        const std::string subject_id = "subj" + std::to_string(s);
        for (Eigen::Index r = 0; r < per_subject; ++r, ++row) {
            for (Eigen::Index j = 0; j < f; ++j)
                out.data.values(row, j) = subject_mean(j) + replicate_std * rng.normal();
            out.data.sample_ids.push_back(subject_id + "_r" + std::to_string(r));
            out.data.subject_ids.push_back(subject_id);
        }
    }
    return out;
}

SampleMatrix standardize_features(const SampleMatrix& m) {
    SampleMatrix out = m;
    const double n = static_cast<double>(m.rows());
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
        const double mean = m.values.col(c).mean();
        const double var = (m.values.col(c).array() - mean).square().sum() / n;
        const double sd = std::sqrt(var);
        if (sd > 0.0)
            out.values.col(c) = (m.values.col(c).array() - mean) / sd;
        else
            out.values.col(c).setZero();
    }
    return out;
}

} // namespace easics
