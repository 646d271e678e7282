#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <map>

#include "easics/consensus.hpp"
#include "easics/dataset.hpp"
#include "easics/error.hpp"
#include "easics/rng.hpp"
#include "test_oracles.hpp"

using namespace easics;

namespace {

std::filesystem::path temp_file(const std::string& name) {
    return std::filesystem::temp_directory_path() / ("easics_dataset_" + name);
}

void write_file(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path);
    out << text;
}

} // namespace

TEST_CASE("load_csv parses a plain file") {
    const auto path = temp_file("plain.csv");
    write_file(path, "sample_id,subject_id,f0,f1,f2\n"
                     "a,s1,1.0,2.5,-3e-2\n"
                     "b,s1,4,5,6\n");
    const SampleMatrix m = load_csv(path.string());
    CHECK(m.rows() == 2);
    CHECK(m.cols() == 3);
    CHECK(m.values(0, 2) == doctest::Approx(-0.03));
    CHECK(m.sample_ids == std::vector<std::string>{"a", "b"});
    CHECK(m.subject_ids == std::vector<std::string>{"s1", "s1"});
}

TEST_CASE("load_csv error paths") {
    const auto path = temp_file("bad.csv");

    SUBCASE("NaN cell") {
        write_file(path, "sample_id,subject_id,f0\na,s1,NaN\n");
        try {
            load_csv(path.string());
            FAIL("expected NonNumericCell");
        } catch (const Error& e) {
            CHECK(e.code() == ErrorCode::NonNumericCell);
        }
    }
    SUBCASE("non-numeric cell reports coordinates") {
        write_file(path, "sample_id,subject_id,f0,f1\na,s1,1.0,x7\n");
        try {
            load_csv(path.string());
            FAIL("expected NonNumericCell");
        } catch (const Error& e) {
            CHECK(e.code() == ErrorCode::NonNumericCell);
            CHECK(std::string(e.what()).find("row 0") != std::string::npos);
            CHECK(std::string(e.what()).find("column 1") != std::string::npos);
        }
    }
    SUBCASE("duplicate sample id") {
        write_file(path, "sample_id,subject_id,f0\ns1,a,1\ns1,b,2\n");
        try {
            load_csv(path.string());
            FAIL("expected DuplicateSampleId");
        } catch (const Error& e) {
            CHECK(e.code() == ErrorCode::DuplicateSampleId);
        }
    }
    SUBCASE("missing header") {
        write_file(path, "id,subject,f0\na,s1,1\n");
        try {
            load_csv(path.string());
            FAIL("expected MissingHeader");
        } catch (const Error& e) {
            CHECK(e.code() == ErrorCode::MissingHeader);
        }
    }
    SUBCASE("ragged row") {
        write_file(path, "sample_id,subject_id,f0,f1\na,s1,1\n");
        try {
            load_csv(path.string());
            FAIL("expected RaggedRow");
        } catch (const Error& e) {
            CHECK(e.code() == ErrorCode::RaggedRow);
        }
    }
    SUBCASE("empty file") {
        write_file(path, "");
        try {
            load_csv(path.string());
            FAIL("expected EmptyFile");
        } catch (const Error& e) {
            CHECK(e.code() == ErrorCode::EmptyFile);
        }
    }
    SUBCASE("header without data rows") {
        write_file(path, "sample_id,subject_id,f0\n");
        try {
            load_csv(path.string());
            FAIL("expected EmptyFile");
        } catch (const Error& e) {
            CHECK(e.code() == ErrorCode::EmptyFile);
        }
    }
}

TEST_CASE("write_csv then load_csv is the identity") {
    Rng rng(99);
    SampleMatrix m;
    m.values.resize(7, 5);
    for (Eigen::Index r = 0; r < 7; ++r)
        for (Eigen::Index c = 0; c < 5; ++c) {
            // Mix of magnitudes, including values that need full precision.
            const double v = rng.normal() * std::pow(10.0, static_cast<double>(c * 3) - 6.0);
            m.values(r, c) = v;
        }
    m.values(0, 0) = 1.0 / 3.0;
    m.values(1, 1) = 1e-300;
    m.values(2, 2) = -12345678.900000001;
    for (int r = 0; r < 7; ++r) {
        m.sample_ids.push_back("s" + std::to_string(r));
        m.subject_ids.push_back("subj" + std::to_string(r / 3));
    }

    const auto path = temp_file("roundtrip.csv");
    write_csv(m, path.string());
    const SampleMatrix back = load_csv(path.string());
    REQUIRE(back.rows() == m.rows());
    REQUIRE(back.cols() == m.cols());
    for (Eigen::Index r = 0; r < m.rows(); ++r)
        for (Eigen::Index c = 0; c < m.cols(); ++c)
            CHECK(back.values(r, c) == m.values(r, c));  // bit-exact
    CHECK(back.sample_ids == m.sample_ids);
    CHECK(back.subject_ids == m.subject_ids);
}

TEST_CASE("generate_synthetic shape and determinism") {
    SyntheticSpec spec;
    spec.n_subjects = 57;
    spec.samples_per_subject = 3;
    spec.n_features = 40;
    spec.n_true_clusters = 4;
    spec.cluster_separation = 10.0;
    spec.seed = 11;

    const SyntheticData a = generate_synthetic(spec);
    CHECK(a.data.rows() == 171);
    CHECK(a.data.cols() == 40);
    CHECK(a.true_labels.size() == 57);

    const SyntheticData b = generate_synthetic(spec);
    CHECK(a.data.values == b.data.values);  // bit-identical
    CHECK(a.data.sample_ids == b.data.sample_ids);
    CHECK(a.true_labels == b.true_labels);

    spec.seed = 12;
    const SyntheticData c = generate_synthetic(spec);
    CHECK(c.data.rows() == a.data.rows());
    CHECK(c.data.values != a.data.values);
    CHECK(c.data.subject_ids == a.data.subject_ids);
}

TEST_CASE("generate_synthetic satisfies SampleMatrix invariants for random specs") {
    Rng rng(5);
    for (int trial = 0; trial < 25; ++trial) {
        SyntheticSpec spec;
        spec.n_subjects = 1 + rng.uniform_index(12);
        spec.samples_per_subject = 1 + rng.uniform_index(4);
        spec.n_features = 1 + rng.uniform_index(20);
        spec.n_true_clusters = 1 + rng.uniform_index(spec.n_subjects);
        spec.cluster_separation = rng.uniform(0.0, 12.0);
        spec.seed = rng.next_u64();

        const SyntheticData d = generate_synthetic(spec);
        CHECK_NOTHROW(d.data.validate());
        CHECK(d.data.rows() ==
              static_cast<Eigen::Index>(spec.n_subjects * spec.samples_per_subject));
        // exactly samples_per_subject rows per subject
        std::map<std::string, int> counts;
        for (const auto& s : d.data.subject_ids) counts[s]++;
        for (const auto& [subject, count] : counts)
            CHECK(count == static_cast<int>(spec.samples_per_subject));
        for (int label : d.true_labels) {
            CHECK(label >= 0);
            CHECK(label < static_cast<int>(spec.n_true_clusters));
        }
    }
}

TEST_CASE("k-means on subject means recovers the generator labels") {
    SyntheticSpec spec;
    spec.n_subjects = 20;
    spec.samples_per_subject = 3;
    spec.n_features = 12;
    spec.n_true_clusters = 4;
    spec.cluster_separation = 10.0;
    spec.seed = 3;
    const SyntheticData d = generate_synthetic(spec);

    Eigen::MatrixXd means(20, 12);
    for (int s = 0; s < 20; ++s) {
        means.row(s) = (d.data.values.row(3 * s) + d.data.values.row(3 * s + 1) +
                        d.data.values.row(3 * s + 2)) /
                       3.0;
    }
    const Partition p = kmeans(means, 4, 77);
    CHECK(oracle::same_partition(p.labels, d.true_labels));
}

TEST_CASE("invalid specs are rejected") {
    SyntheticSpec spec;
    spec.n_subjects = 3;
    spec.n_true_clusters = 5;  // more clusters than subjects
    CHECK_THROWS_AS(generate_synthetic(spec), Error);

    SyntheticSpec zero;
    zero.n_features = 0;
    CHECK_THROWS_AS(generate_synthetic(zero), Error);

    SyntheticSpec negative;
    negative.cluster_separation = -1.0;
    CHECK_THROWS_AS(generate_synthetic(negative), Error);
}

TEST_CASE("standardize_features centers and scales") {
    SampleMatrix m;
    m.values.resize(4, 2);
    m.values << 1, 7, 2, 7, 3, 7, 4, 7;  // second column constant
    m.sample_ids = {"a", "b", "c", "d"};
    m.subject_ids = {"s", "s", "t", "t"};

    const SampleMatrix z = standardize_features(m);
    CHECK(z.values.col(0).mean() == doctest::Approx(0.0).epsilon(1e-12));
    const double var = z.values.col(0).array().square().mean();
    CHECK(var == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(z.values.col(1).cwiseAbs().maxCoeff() == 0.0);
}
