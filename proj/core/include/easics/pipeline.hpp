#ifndef EASICS_PIPELINE_HPP
#define EASICS_PIPELINE_HPP

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "easics/consensus.hpp"
#include "easics/dataset.hpp"
#include "easics/ensemble.hpp"
#include "easics/lle.hpp"
#include "easics/metrics.hpp"
#include "easics/som.hpp"

namespace easics {

struct EnsembleParams {
    std::size_t n_p = 1000;
    double ics_threshold = 0.099;
};

// Space of the silhouette that drives cluster-count selection. kInput scores
// candidates against the (standardized) feature matrix, the space where
// cluster geometry is independent of the embedding's local-structure bias;
// the other three are passed through to select_partition.
enum class ScSpace { kInput, kEmbedding, kSpectral, kConsensus };

struct ConsensusParams {
    int k_min = 2;
    int k_max = 20;  // clamped to n-1 at run time
    ScSpace sc_space = ScSpace::kInput;
};

struct PipelineConfig {
    // Exactly one input source.
    std::string input_csv;
    std::optional<SyntheticSpec> synthetic;

    bool standardize = true;  // z-score features before the embedding
    LleParams lle;
    SomConfig som;  // seed is ignored; per-run seeds derive from master_seed
    EnsembleParams ensemble;
    ConsensusParams consensus;
    std::uint64_t master_seed = 0;
    std::size_t n_stability_reruns = 10;

    void validate() const;
};

struct StageTiming {
    std::string stage;
    double seconds = 0.0;
};

struct MethodStd {
    double std_sc = 0.0;
    double std_ch = 0.0;
    double std_db = 0.0;
};

// Sample standard deviations of the validity indices over seeded reruns, for
// the consensus pipeline and for a single SOM on the same embedding.
struct StabilityBlock {
    std::size_t n_reruns = 0;
    MethodStd easics;
    MethodStd single_som;
};

struct RunReport {
    PipelineConfig config;
    std::vector<std::string> sample_ids;
    std::vector<std::string> subject_ids;
    Eigen::Index n_features = 0;
    std::size_t n_subjects = 0;

    ConsensusResult consensus;
    ValidityReport consensus_metrics;  // selected partition scored in the embedding
    std::size_t ensemble_runs = 0;
    std::size_t ensemble_retained = 0;

    ValidityReport kmeans_baseline;  // k-means at selected_k on the embedding
    int kmeans_baseline_k = 0;
    ValidityReport som_baseline;  // one SOM, same grid, seeded from master

    std::optional<StabilityBlock> stability;

    // Wall-clock, not serialized into the report JSON (which is byte-stable
    // for a given config + seed).
    std::vector<StageTiming> timings;
    double total_seconds = 0.0;
};

// load/generate -> optional standardize -> lle -> SOM ensemble -> consensus ->
// subject mapping -> baselines. Deterministic given config + master_seed,
// independent of the parallelism degree. Stage errors are rethrown with the
// stage name prefixed.
RunReport run_pipeline(const PipelineConfig& cfg);

// Reruns the consensus pipeline and a single SOM n_stability_reruns times with
// distinct derived seeds and reports the spread of SC/CH/DB for each method.
// The embedding is deterministic across reruns and computed once.
StabilityBlock stability_study(const PipelineConfig& cfg);

PipelineConfig config_from_json(const std::string& text);
std::string config_to_json(const PipelineConfig& cfg);

// Deterministic report serialization (timings excluded; they go to stderr in
// the CLI).
std::string report_to_json(const RunReport& report);

// `sample_id,subject_id,cluster` rows for the consensus partition.
void write_assignments_csv(const RunReport& report, const std::string& path);

} // namespace easics

#endif
