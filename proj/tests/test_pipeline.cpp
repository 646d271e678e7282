#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <numeric>

#include <json.hpp>

#include "easics/error.hpp"
#include "easics/pipeline.hpp"
#include "easics/rng.hpp"

using namespace easics;

namespace {

// Small but non-trivial: 18 subjects x 3 samples, 2 well-separated clusters.
PipelineConfig tiny_config() {
    PipelineConfig cfg;
    SyntheticSpec spec;
    spec.n_subjects = 18;
    spec.samples_per_subject = 3;
    spec.n_features = 10;
    spec.n_true_clusters = 2;
    spec.cluster_separation = 10.0;
    spec.seed = 41;
    cfg.synthetic = spec;
    cfg.lle.k_neighbors = 8;
    cfg.lle.dim = 4;
    cfg.som.grid_rows = 2;
    cfg.som.grid_cols = 2;
    cfg.som.iter_max = 1500;
    cfg.ensemble.n_p = 12;
    cfg.consensus.k_min = 2;
    cfg.consensus.k_max = 5;
    cfg.master_seed = 7;
    cfg.n_stability_reruns = 2;
    return cfg;
}

} // namespace

TEST_CASE("config validation rejects bad ranges before any compute") {
    PipelineConfig cfg = tiny_config();
    cfg.consensus.k_min = 9;
    cfg.consensus.k_max = 4;
    try {
        run_pipeline(cfg);
        FAIL("expected ConfigInvalid");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::ConfigInvalid);
    }

    PipelineConfig both = tiny_config();
    both.input_csv = "also.csv";  // both sources set
    CHECK_THROWS_AS(run_pipeline(both), Error);

    PipelineConfig neither;
    CHECK_THROWS_AS(run_pipeline(neither), Error);

    PipelineConfig bad_som = tiny_config();
    bad_som.som.lr_threshold = bad_som.som.lr_init;  // invariant: threshold < init
    CHECK_THROWS_AS(run_pipeline(bad_som), Error);
}

TEST_CASE("config JSON round trip preserves every field") {
    PipelineConfig cfg = tiny_config();
    cfg.standardize = false;
    cfg.consensus.sc_space = ScSpace::kSpectral;
    cfg.ensemble.ics_threshold = 0.25;

    const PipelineConfig back = config_from_json(config_to_json(cfg));
    CHECK(back.synthetic->n_subjects == 18);
    CHECK(back.synthetic->seed == 41);
    CHECK(back.standardize == false);
    CHECK(back.lle.k_neighbors == 8);
    CHECK(back.lle.dim == 4);
    CHECK(back.som.grid_rows == 2);
    CHECK(back.som.iter_max == 1500);
    CHECK(back.ensemble.n_p == 12);
    CHECK(back.ensemble.ics_threshold == 0.25);
    CHECK(back.consensus.k_min == 2);
    CHECK(back.consensus.k_max == 5);
    CHECK(back.consensus.sc_space == ScSpace::kSpectral);
    CHECK(back.master_seed == 7);
    CHECK(back.n_stability_reruns == 2);
}

TEST_CASE("config JSON rejects unknown keys and bad values") {
    CHECK_THROWS_AS(config_from_json("{\"wat\": 1}"), Error);
    CHECK_THROWS_AS(config_from_json("{\"lle\": {\"neighbors\": 3}}"), Error);
    CHECK_THROWS_AS(config_from_json("{\"consensus\": {\"sc_space\": \"bogus\"}}"), Error);
    CHECK_THROWS_AS(config_from_json("not json"), Error);
    CHECK(config_from_json("{}").lle.k_neighbors == 30);  // defaults apply
}

TEST_CASE("defaults match the documented values") {
    const PipelineConfig cfg;
    CHECK(cfg.standardize == true);
    CHECK(cfg.lle.k_neighbors == 30);
    CHECK(cfg.lle.dim == 30);
    CHECK(cfg.lle.reg == 1e-3);
    CHECK(cfg.som.grid_rows == 4);
    CHECK(cfg.som.grid_cols == 4);
    CHECK(cfg.som.lr_init == 0.5);
    CHECK(cfg.som.lr_threshold == 0.01);
    CHECK(cfg.som.radius_init == 2.0);
    CHECK(cfg.som.iter_max == 10000);
    CHECK(cfg.ensemble.n_p == 1000);
    CHECK(cfg.ensemble.ics_threshold == 0.099);
    CHECK(cfg.consensus.k_min == 2);
    CHECK(cfg.consensus.k_max == 20);
}

TEST_CASE("tiny pipeline run produces a coherent report") {
    const PipelineConfig cfg = tiny_config();
    const RunReport report = run_pipeline(cfg);

    CHECK(report.sample_ids.size() == 54);
    CHECK(report.n_subjects == 18);
    CHECK(report.ensemble_runs == 12);
    CHECK(report.ensemble_retained >= 1);
    CHECK(report.consensus.selected_k == 2);  // two separated blobs
    CHECK(report.consensus_metrics.ics == 0.0);
    CHECK(report.kmeans_baseline_k == report.consensus.selected_k);
    CHECK(report.som_baseline.n_clusters >= 1);
    CHECK(!report.stability.has_value());

    SUBCASE("stage timings cover the total wall clock") {
        double sum = 0.0;
        for (const auto& t : report.timings) sum += t.seconds;
        CHECK(report.total_seconds > 0.0);
        CHECK(sum <= report.total_seconds);
        CHECK(sum >= 0.95 * report.total_seconds);
    }
    SUBCASE("report JSON is deterministic and excludes timings") {
        const std::string a = report_to_json(report);
        const RunReport again = run_pipeline(cfg);
        CHECK(a == report_to_json(again));
        CHECK(a.find("timing") == std::string::npos);
        CHECK(a.find("\"schema\": \"easics-report/1\"") != std::string::npos);
    }
    SUBCASE("assignments CSV") {
        const auto path =
            (std::filesystem::temp_directory_path() / "easics_test_assign.csv").string();
        write_assignments_csv(report, path);
        std::ifstream in(path);
        std::string header;
        std::getline(in, header);
        CHECK(header == "sample_id,subject_id,cluster");
        std::size_t rows = 0;
        std::string line;
        while (std::getline(in, line))
            if (!line.empty()) ++rows;
        CHECK(rows == 54);
    }
}

TEST_CASE("three-blob cohort selects k = 3 over the range [2, 8]") {
    PipelineConfig cfg;
    SyntheticSpec spec;
    spec.n_subjects = 24;
    spec.samples_per_subject = 3;
    spec.n_features = 16;
    spec.n_true_clusters = 3;
    spec.cluster_separation = 10.0;
    spec.seed = 19;
    cfg.synthetic = spec;
    cfg.lle.k_neighbors = 10;
    cfg.lle.dim = 6;
    cfg.som.iter_max = 3000;
    cfg.ensemble.n_p = 40;
    cfg.consensus.k_min = 2;
    cfg.consensus.k_max = 8;
    cfg.master_seed = 19;

    const RunReport report = run_pipeline(cfg);
    CHECK(report.consensus.selected_k == 3);
    CHECK(report.consensus_metrics.ics == 0.0);
}

TEST_CASE("pipeline is independent of the parallelism degree") {
    const PipelineConfig cfg = tiny_config();
    setenv("CONSENSUS_THREADS", "1", 1);
    const std::string serial = report_to_json(run_pipeline(cfg));
    setenv("CONSENSUS_THREADS", "2", 1);
    const std::string two = report_to_json(run_pipeline(cfg));
    setenv("CONSENSUS_THREADS", "0", 1);
    const std::string all = report_to_json(run_pipeline(cfg));
    unsetenv("CONSENSUS_THREADS");
    CHECK(serial == two);
    CHECK(serial == all);
}

TEST_CASE("stage errors carry the stage name") {
    PipelineConfig cfg = tiny_config();
    cfg.lle.k_neighbors = 100;  // more neighbors than samples
    try {
        run_pipeline(cfg);
        FAIL("expected a wrapped lle error");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::KTooLarge);
        CHECK(std::string(e.what()).find("lle:") != std::string::npos);
    }
}

TEST_CASE("stability study shape and zero-variance behavior") {
    PipelineConfig cfg = tiny_config();
    cfg.n_stability_reruns = 3;
    const StabilityBlock block = stability_study(cfg);
    CHECK(block.n_reruns == 3);
    CHECK(block.easics.std_sc >= 0.0);
    CHECK(block.easics.std_ch >= 0.0);
    CHECK(block.easics.std_db >= 0.0);
    CHECK(block.single_som.std_sc >= 0.0);

    // Degenerate case: a single candidate k and a 1-D embedding of two exact
    // point masses, so every rerun recovers the identical partition and all
    // stds collapse to 0.
    PipelineConfig frozen = tiny_config();
    frozen.synthetic->cluster_separation = 50.0;
    frozen.lle.dim = 1;
    frozen.consensus.k_min = 2;
    frozen.consensus.k_max = 2;
    frozen.n_stability_reruns = 2;
    const StabilityBlock zero = stability_study(frozen);
    CHECK(zero.easics.std_sc == 0.0);
    CHECK(zero.easics.std_ch == 0.0);
    CHECK(zero.easics.std_db == 0.0);

    PipelineConfig bad = cfg;
    bad.n_stability_reruns = 1;
    CHECK_THROWS_AS(stability_study(bad), Error);
}

TEST_CASE("report JSON keeps its schema over random tiny configs") {
    Rng rng(202);
    for (int trial = 0; trial < 5; ++trial) {
        PipelineConfig cfg;
        SyntheticSpec spec;
        spec.n_subjects = 10 + rng.uniform_index(8);
        spec.samples_per_subject = 2 + rng.uniform_index(2);
        spec.n_features = 6 + rng.uniform_index(8);
        spec.n_true_clusters = 2 + rng.uniform_index(2);
        spec.cluster_separation = 8.0 + rng.uniform(0.0, 6.0);
        spec.seed = rng.next_u64();
        cfg.synthetic = spec;
        cfg.lle.k_neighbors = 4 + rng.uniform_index(4);
        cfg.lle.dim = 2 + static_cast<Eigen::Index>(rng.uniform_index(3));
        cfg.som.grid_rows = 2;
        cfg.som.grid_cols = 2 + static_cast<int>(rng.uniform_index(2));
        cfg.som.iter_max = 800;
        cfg.ensemble.n_p = 6 + rng.uniform_index(8);
        cfg.consensus.k_min = 2;
        cfg.consensus.k_max = 4;
        cfg.master_seed = rng.next_u64();

        const RunReport report = run_pipeline(cfg);
        const auto j = nlohmann::ordered_json::parse(report_to_json(report));
        CHECK(j.at("schema") == "easics-report/1");
        CHECK(j.at("config").contains("input"));
        CHECK(j.at("dataset").at("n_samples").get<std::size_t>() ==
              spec.n_subjects * spec.samples_per_subject);
        const auto& consensus = j.at("consensus");
        CHECK(consensus.contains("selected_k"));
        CHECK(consensus.contains("per_k"));
        CHECK(consensus.at("assignments").size() == report.sample_ids.size());
        CHECK(consensus.at("subject_labels").size() == spec.n_subjects);
        CHECK(consensus.at("metrics").contains("sc"));
        CHECK(j.at("baselines").contains("kmeans"));
        CHECK(j.at("baselines").contains("som"));
        CHECK(j.at("stability").is_null());
    }
}

TEST_CASE("stability block serializes with exactly two methods x three stds") {
    PipelineConfig cfg = tiny_config();
    RunReport report = run_pipeline(cfg);
    report.stability = stability_study(cfg);
    const std::string text = report_to_json(report);
    CHECK(text.find("\"stability\"") != std::string::npos);
    CHECK(text.find("\"easics\"") != std::string::npos);
    CHECK(text.find("\"som\"") != std::string::npos);
    // three std fields per method
    std::size_t count = 0;
    for (std::size_t pos = text.find("\"std_"); pos != std::string::npos;
         pos = text.find("\"std_", pos + 1))
        ++count;
    CHECK(count == 6);
}
