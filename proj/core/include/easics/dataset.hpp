#ifndef EASICS_DATASET_HPP
#define EASICS_DATASET_HPP

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace easics {

// A feature table: one row per sample, with parallel id columns. Rows from the
// same subject share a subject_id (three replicate samples per subject in the
// cohorts this targets).
struct SampleMatrix {
    Eigen::MatrixXd values;                // n x f
    std::vector<std::string> sample_ids;   // unique, one per row
    std::vector<std::string> subject_ids;  // one per row, repeats allowed

    Eigen::Index rows() const { return values.rows(); }
    Eigen::Index cols() const { return values.cols(); }

    // Checks id lengths, sample_id uniqueness and finiteness; throws on violation.
    void validate() const;
};

struct SyntheticSpec {
    std::size_t n_subjects = 57;
    std::size_t samples_per_subject = 3;
    std::size_t n_features = 40;
    std::size_t n_true_clusters = 4;
    // Distance between cluster centroids, in units of the within-cluster std.
    double cluster_separation = 10.0;
    std::uint64_t seed = 0;

    void validate() const;
};

struct SyntheticData {
    SampleMatrix data;
    std::vector<int> true_labels;  // per subject, in row-block order
};

// CSV format: UTF-8, comma separated, header `sample_id,subject_id,f0,f1,...`.
// Scientific notation accepted on read; writes use shortest round-trip decimals
// so load_csv(write_csv(m)) reproduces m bit-exactly.
SampleMatrix load_csv(const std::string& path);
void write_csv(const SampleMatrix& m, const std::string& path);

// Seeded Gaussian cohort: subjects are assigned to clusters round-robin, each
// subject's mean is drawn around its cluster centroid (unit std) and the
// replicates around the subject mean with std 0.25, so replicates of a subject
// almost always co-cluster. Identical spec => bit-identical output.
SyntheticData generate_synthetic(const SyntheticSpec& spec);

// Per-feature z-score (population std). Constant features become all-zero.
SampleMatrix standardize_features(const SampleMatrix& m);

} // namespace easics

#endif
