#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <fstream>
#include <utility>

#include "easics/dataset.hpp"
#include "easics/ensemble.hpp"
#include "easics/error.hpp"
#include "easics/lle.hpp"
#include "easics/metrics.hpp"
#include "easics/rng.hpp"

using namespace easics;

namespace {

// n_subjects subjects x 4 samples, with `flips` samples moved off the
// majority label, at most two per subject (a 2-2 tie references label 0, so
// both flips still count): ICS is exactly flips / (4*n_subjects).
std::pair<std::vector<EnsembleMember>, std::vector<std::string>> constructed_candidates(
    std::initializer_list<int> flip_counts, std::size_t n_subjects) {
    std::vector<std::string> subjects;
    for (std::size_t s = 0; s < n_subjects; ++s)
        for (int r = 0; r < 4; ++r) subjects.push_back("subj" + std::to_string(s));

    std::vector<EnsembleMember> members;
    std::size_t index = 0;
    for (int flips : flip_counts) {
        REQUIRE(flips <= static_cast<int>(2 * n_subjects));
        EnsembleMember member;
        member.run_index = index++;
        member.seed = 1000 + member.run_index;
        member.partition.labels.assign(subjects.size(), 0);
        for (int f = 0; f < flips; ++f) {
            const std::size_t subject = static_cast<std::size_t>(f) % n_subjects;
            const std::size_t slot = static_cast<std::size_t>(f) / n_subjects;
            member.partition.labels[4 * subject + slot] = 1;
        }
        members.push_back(std::move(member));
    }
    return {members, subjects};
}

Embedding blob_embedding(std::size_t n_subjects, std::uint64_t seed) {
    SyntheticSpec spec;
    spec.n_subjects = n_subjects;
    spec.samples_per_subject = 3;
    spec.n_features = 10;
    spec.n_true_clusters = 2;
    spec.cluster_separation = 10.0;
    spec.seed = seed;
    const SampleMatrix data = generate_synthetic(spec).data;
    return lle(data, LleParams{6, 3, 1e-3});
}

SomConfig fast_config() {
    SomConfig cfg;
    cfg.grid_rows = 2;
    cfg.grid_cols = 2;
    cfg.iter_max = 1500;
    return cfg;
}

} // namespace

TEST_CASE("filter boundary is strict at the threshold") {
    // 250 subjects x 4 samples = 1000 samples: flips of 98/99/100 give ICS of
    // exactly 0.098 / 0.099 / 0.100.
    auto [members, subjects] = constructed_candidates({98, 99, 100}, 250);
    REQUIRE(ics(members[0].partition, subjects) == 98.0 / 1000.0);
    REQUIRE(ics(members[1].partition, subjects) == 99.0 / 1000.0);
    REQUIRE(ics(members[2].partition, subjects) == 100.0 / 1000.0);

    const PartitionSet ps = filter_by_consistency(members, subjects, 0.099, members.size());
    REQUIRE(ps.members.size() == 1);
    CHECK(ps.members[0].run_index == 0);
    CHECK(ps.members[0].ics == 98.0 / 1000.0);
}

TEST_CASE("a shuffled-label partition is excluded") {
    auto [members, subjects] = constructed_candidates({0}, 25);
    // inject a partition with labels scattered across subjects
    EnsembleMember shuffled;
    shuffled.run_index = 1;
    Rng rng(4);
    shuffled.partition.labels.resize(subjects.size());
    for (auto& l : shuffled.partition.labels) l = static_cast<int>(rng.uniform_index(4));
    members.push_back(shuffled);
    REQUIRE(ics(members[1].partition, subjects) >= 0.099);

    const PartitionSet ps = filter_by_consistency(members, subjects, 0.099, 2);
    REQUIRE(ps.members.size() == 1);
    CHECK(ps.members[0].run_index == 0);
}

TEST_CASE("empty result throws EmptyEnsemble") {
    auto [members, subjects] = constructed_candidates({200, 300}, 250);
    CHECK_THROWS_AS(filter_by_consistency(members, subjects, 0.099, 2), Error);
    try {
        filter_by_consistency(members, subjects, 0.099, 2);
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::EmptyEnsemble);
    }
}

TEST_CASE("separable data passes every run") {
    const Embedding embedding = blob_embedding(20, 9);
    const PartitionSet ps =
        run_ensemble(embedding, embedding.subject_ids, 50, 0.099, fast_config(), 31);
    CHECK(ps.members.size() == 50);  // all pass
    for (const auto& member : ps.members) CHECK(member.ics == 0.0);
}

TEST_CASE("run_ensemble is deterministic and respects run-count bounds") {
    const Embedding embedding = blob_embedding(12, 5);
    const PartitionSet a =
        run_ensemble(embedding, embedding.subject_ids, 16, 0.5, fast_config(), 77);
    const PartitionSet b =
        run_ensemble(embedding, embedding.subject_ids, 16, 0.5, fast_config(), 77);

    CHECK(a.members.size() <= 16);
    REQUIRE(a.members.size() == b.members.size());
    for (std::size_t i = 0; i < a.members.size(); ++i) {
        CHECK(a.members[i].run_index == b.members[i].run_index);
        CHECK(a.members[i].seed == b.members[i].seed);
        CHECK(a.members[i].partition == b.members[i].partition);
        CHECK(a.members[i].ics == b.members[i].ics);
        CHECK(a.members[i].ics < 0.5);  // re-check the filter predicate
    }
}

TEST_CASE("result is independent of the parallelism degree") {
    const Embedding embedding = blob_embedding(10, 6);

    setenv("CONSENSUS_THREADS", "1", 1);
    const PartitionSet serial =
        run_ensemble(embedding, embedding.subject_ids, 12, 0.8, fast_config(), 13);
    setenv("CONSENSUS_THREADS", "3", 1);
    const PartitionSet parallel =
        run_ensemble(embedding, embedding.subject_ids, 12, 0.8, fast_config(), 13);
    unsetenv("CONSENSUS_THREADS");

    REQUIRE(serial.members.size() == parallel.members.size());
    for (std::size_t i = 0; i < serial.members.size(); ++i) {
        CHECK(serial.members[i].seed == parallel.members[i].seed);
        CHECK(serial.members[i].partition == parallel.members[i].partition);
    }
}

TEST_CASE("per-run seeds follow the documented derivation") {
    const Embedding embedding = blob_embedding(10, 6);
    const PartitionSet ps =
        run_ensemble(embedding, embedding.subject_ids, 8, 1.0, fast_config(), 99);
    for (const auto& member : ps.members)
        CHECK(member.seed == mix_seed(99, member.run_index));
}

TEST_CASE("canonicalization makes renamed partitions equal") {
    Partition a;
    a.labels = {4, 4, 9, 2, 9};
    Partition b;
    b.labels = {1, 1, 0, 7, 0};
    CHECK(a.canonicalized() == b.canonicalized());
    CHECK(a.canonicalized().labels == std::vector<int>{0, 0, 1, 2, 1});
    CHECK(a.n_clusters() == 3);
}

TEST_CASE("invalid arguments are rejected") {
    const Embedding embedding = blob_embedding(6, 1);
    CHECK_THROWS_AS(
        run_ensemble(embedding, embedding.subject_ids, 0, 0.1, fast_config(), 1), Error);
    CHECK_THROWS_AS(
        run_ensemble(embedding, embedding.subject_ids, 4, 0.0, fast_config(), 1), Error);
    CHECK_THROWS_AS(
        run_ensemble(embedding, embedding.subject_ids, 4, 1.5, fast_config(), 1), Error);
    std::vector<std::string> wrong(3, "x");
    CHECK_THROWS_AS(run_ensemble(embedding, wrong, 4, 0.1, fast_config(), 1), Error);
}

TEST_CASE("partition set CSV dump") {
    auto [members, subjects] = constructed_candidates({0, 1}, 5);
    const PartitionSet ps = filter_by_consistency(members, subjects, 0.9, 2);
    std::vector<std::string> sample_ids;
    for (std::size_t i = 0; i < subjects.size(); ++i) sample_ids.push_back("s" + std::to_string(i));
    const auto path = std::string("/tmp/easics_test_partitions.csv");
    write_partition_set_csv(ps, sample_ids, path);

    std::ifstream in(path);
    std::string header;
    std::getline(in, header);
    CHECK(header == "sample_id,run_0,run_1");
}
