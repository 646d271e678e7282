#include "easics/pipeline.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <set>
#include <unordered_set>

#include "easics/error.hpp"
#include "easics/rng.hpp"
#include "json_codec.hpp"

namespace easics {

namespace {

// Fixed stream tags for seed derivation; ensemble run indices use the plain
// [0, n_p) streams, so these stay out of that range.
constexpr std::uint64_t kStreamSyntheticData = 0x6561736963734459ull;
constexpr std::uint64_t kStreamConsensus = 0x65617369637343ull;
constexpr std::uint64_t kStreamBaselineKmeans = 0x656173696373424bull;
constexpr std::uint64_t kStreamBaselineSom = 0x6561736963734253ull;
constexpr std::uint64_t kStreamStability = 0x65617369637353ull;

constexpr int kKmeansRestarts = 10;

class StageClock {
public:
    explicit StageClock(RunReport* report) : report_(report) {}

    template <typename F>
    auto run(const std::string& stage, F&& fn) -> decltype(fn()) {
        const auto start = std::chrono::steady_clock::now();
        try {
            auto result = fn();
            record(stage, start);
            return result;
        } catch (const Error& e) {
            record(stage, start);
            throw Error(e.code(), stage + ": " + e.message());
        }
    }

private:
    void record(const std::string& stage, std::chrono::steady_clock::time_point start) {
        if (report_ == nullptr) return;
        const std::chrono::duration<double> elapsed = std::chrono::steady_clock::now() - start;
        report_->timings.push_back({stage, elapsed.count()});
    }

    RunReport* report_;
};

double sample_std(const std::vector<double>& values) {
    const auto n = static_cast<double>(values.size());
    double mean = 0.0;
    for (const double v : values) mean += v;
    mean /= n;
    double ss = 0.0;
    for (const double v : values) ss += (v - mean) * (v - mean);
    return std::sqrt(ss / (n - 1.0));
}

SampleMatrix resolve_input(const PipelineConfig& cfg) {
    if (!cfg.input_csv.empty()) return load_csv(cfg.input_csv);
    return generate_synthetic(*cfg.synthetic).data;
}

ValidityReport score_som_baseline(const Embedding& embedding, const SomConfig& base_cfg,
                                  std::uint64_t seed) {
    SomConfig cfg = base_cfg;
    cfg.seed = seed;
    const SomModel model = train_som(embedding, cfg);
    const Partition p = partition_from_som(model, embedding).canonicalized();
    return evaluate_partition(embedding.values, p, embedding.subject_ids);
}

int clamp_k_max(const ConsensusParams& params, Eigen::Index n) {
    return std::min(params.k_max, static_cast<int>(n) - 1);
}

// The space candidate partitions are scored in during selection.
Embedding scoring_space(ScSpace space, const SampleMatrix& data, const Embedding& embedding) {
    if (space == ScSpace::kInput) {
        Embedding x;
        x.values = data.values;
        x.sample_ids = data.sample_ids;
        x.subject_ids = data.subject_ids;
        return x;
    }
    return embedding;
}

SelectionSpace to_selection_space(ScSpace space) {
    switch (space) {
        case ScSpace::kSpectral: return SelectionSpace::kSpectral;
        case ScSpace::kConsensus: return SelectionSpace::kConsensus;
        default: return SelectionSpace::kEmbedding;
    }
}

} // namespace

void PipelineConfig::validate() const {
    const bool has_csv = !input_csv.empty();
    const bool has_synth = synthetic.has_value();
    if (has_csv == has_synth)
        throw Error(ErrorCode::ConfigInvalid,
                    "exactly one of input_csv and synthetic must be set");
    if (has_synth) synthetic->validate();

    if (lle.k_neighbors < 1) throw Error(ErrorCode::ConfigInvalid, "lle.k_neighbors must be >= 1");
    if (lle.dim < 1) throw Error(ErrorCode::ConfigInvalid, "lle.dim must be >= 1");
    if (lle.reg < 0.0) throw Error(ErrorCode::ConfigInvalid, "lle.reg must be >= 0");
    som.validate();
    if (ensemble.n_p < 1) throw Error(ErrorCode::ConfigInvalid, "ensemble.n_p must be >= 1");
    if (!(ensemble.ics_threshold > 0.0 && ensemble.ics_threshold <= 1.0))
        throw Error(ErrorCode::ConfigInvalid, "ensemble.ics_threshold must be in (0, 1]");
    if (consensus.k_min < 2)
        throw Error(ErrorCode::ConfigInvalid, "consensus.k_min must be >= 2");
    if (consensus.k_min > consensus.k_max)
        throw Error(ErrorCode::ConfigInvalid, "consensus.k_min must be <= k_max");
}

RunReport run_pipeline(const PipelineConfig& cfg) {
    cfg.validate();
    const auto total_start = std::chrono::steady_clock::now();

    RunReport report;
    report.config = cfg;
    StageClock clock(&report);

    SampleMatrix data = clock.run("dataset", [&] {
        SampleMatrix m = resolve_input(cfg);
        m.validate();
        return cfg.standardize ? standardize_features(m) : std::move(m);
    });
    report.sample_ids = data.sample_ids;
    report.subject_ids = data.subject_ids;
    report.n_features = data.cols();
    report.n_subjects =
        std::unordered_set<std::string>(data.subject_ids.begin(), data.subject_ids.end()).size();

    const Embedding embedding = clock.run("lle", [&] { return lle(data, cfg.lle); });

    const PartitionSet ps = clock.run("ensemble", [&] {
        return run_ensemble(embedding, embedding.subject_ids, cfg.ensemble.n_p,
                            cfg.ensemble.ics_threshold, cfg.som, cfg.master_seed);
    });
    report.ensemble_runs = ps.n_runs;
    report.ensemble_retained = ps.members.size();

    report.consensus = clock.run("consensus", [&] {
        const CoAssociationMatrix w = co_association(ps);
        const Embedding x_for_sc = scoring_space(cfg.consensus.sc_space, data, embedding);
        return select_partition(w, x_for_sc, cfg.consensus.k_min,
                                clamp_k_max(cfg.consensus, embedding.rows()),
                                mix_seed(cfg.master_seed, kStreamConsensus),
                                to_selection_space(cfg.consensus.sc_space));
    });
    report.consensus_metrics = evaluate_partition(
        embedding.values, report.consensus.sample_partition, embedding.subject_ids);

    clock.run("baselines", [&] {
        report.kmeans_baseline_k = report.consensus.selected_k;
        const Partition km =
            kmeans(embedding.values, report.kmeans_baseline_k,
                   mix_seed(cfg.master_seed, kStreamBaselineKmeans), kKmeansRestarts);
        report.kmeans_baseline = evaluate_partition(embedding.values, km, embedding.subject_ids);
        report.som_baseline = score_som_baseline(embedding, cfg.som,
                                                 mix_seed(cfg.master_seed, kStreamBaselineSom));
        return 0;
    });

    const std::chrono::duration<double> total = std::chrono::steady_clock::now() - total_start;
    report.total_seconds = total.count();
    return report;
}

StabilityBlock stability_study(const PipelineConfig& cfg) {
    cfg.validate();
    if (cfg.n_stability_reruns < 2)
        throw Error(ErrorCode::ConfigInvalid, "n_stability_reruns must be >= 2");

    StageClock clock(nullptr);
    SampleMatrix data = clock.run("dataset", [&] {
        SampleMatrix m = resolve_input(cfg);
        m.validate();
        return cfg.standardize ? standardize_features(m) : std::move(m);
    });
    // The embedding has no random state, so reruns share it.
    const Embedding embedding = clock.run("lle", [&] { return lle(data, cfg.lle); });

    const std::size_t n = cfg.n_stability_reruns;
    std::vector<double> easics_sc(n), easics_ch(n), easics_db(n);
    std::vector<double> som_sc(n), som_ch(n), som_db(n);

    const Embedding x_for_sc = scoring_space(cfg.consensus.sc_space, data, embedding);
    for (std::size_t rerun = 0; rerun < n; ++rerun) {
        const std::uint64_t rerun_master = mix_seed(cfg.master_seed, kStreamStability + rerun);

        const PartitionSet ps =
            run_ensemble(embedding, embedding.subject_ids, cfg.ensemble.n_p,
                         cfg.ensemble.ics_threshold, cfg.som, rerun_master);
        const CoAssociationMatrix w = co_association(ps);
        const ConsensusResult consensus =
            select_partition(w, x_for_sc, cfg.consensus.k_min,
                             clamp_k_max(cfg.consensus, embedding.rows()),
                             mix_seed(rerun_master, kStreamConsensus),
                             to_selection_space(cfg.consensus.sc_space));
        const ValidityReport easics_report = evaluate_partition(
            embedding.values, consensus.sample_partition, embedding.subject_ids);
        easics_sc[rerun] = easics_report.sc;
        easics_ch[rerun] = easics_report.ch;
        easics_db[rerun] = easics_report.db;

        const ValidityReport som_report = score_som_baseline(
            embedding, cfg.som, mix_seed(rerun_master, kStreamBaselineSom));
        som_sc[rerun] = som_report.sc;
        som_ch[rerun] = som_report.ch;
        som_db[rerun] = som_report.db;
    }

    StabilityBlock block;
    block.n_reruns = n;
    block.easics = {sample_std(easics_sc), sample_std(easics_ch), sample_std(easics_db)};
    block.single_som = {sample_std(som_sc), sample_std(som_ch), sample_std(som_db)};
    return block;
}

namespace {

using nlohmann::ordered_json;

void require_keys(const ordered_json& obj, const std::set<std::string>& allowed,
                  const std::string& where) {
    for (const auto& [key, value] : obj.items())
        if (allowed.find(key) == allowed.end())
            throw Error(ErrorCode::ConfigInvalid, "unknown key \"" + key + "\" in " + where);
}

template <typename T>
void read_field(const ordered_json& obj, const char* key, T& into) {
    if (const auto it = obj.find(key); it != obj.end()) into = it->get<T>();
}

ordered_json config_json(const PipelineConfig& cfg) {
    ordered_json input;
    if (!cfg.input_csv.empty()) {
        input["csv"] = cfg.input_csv;
    } else if (cfg.synthetic) {
        input["synthetic"] = ordered_json{{"n_subjects", cfg.synthetic->n_subjects},
                                          {"samples_per_subject", cfg.synthetic->samples_per_subject},
                                          {"n_features", cfg.synthetic->n_features},
                                          {"n_true_clusters", cfg.synthetic->n_true_clusters},
                                          {"cluster_separation", cfg.synthetic->cluster_separation},
                                          {"seed", cfg.synthetic->seed}};
    }
    return ordered_json{
        {"input", std::move(input)},
        {"standardize", cfg.standardize},
        {"lle",
         {{"k_neighbors", cfg.lle.k_neighbors}, {"dim", cfg.lle.dim}, {"reg", cfg.lle.reg}}},
        {"som",
         {{"grid_rows", cfg.som.grid_rows},
          {"grid_cols", cfg.som.grid_cols},
          {"lr_init", cfg.som.lr_init},
          {"lr_threshold", cfg.som.lr_threshold},
          {"radius_init", cfg.som.radius_init},
          {"iter_max", cfg.som.iter_max}}},
        {"ensemble", {{"n_p", cfg.ensemble.n_p}, {"ics_threshold", cfg.ensemble.ics_threshold}}},
        {"consensus",
         {{"k_min", cfg.consensus.k_min},
          {"k_max", cfg.consensus.k_max},
          {"sc_space", cfg.consensus.sc_space == ScSpace::kInput       ? "input"
                       : cfg.consensus.sc_space == ScSpace::kEmbedding ? "embedding"
                       : cfg.consensus.sc_space == ScSpace::kSpectral  ? "spectral"
                                                                       : "consensus"}}},
        {"master_seed", cfg.master_seed},
        {"n_stability_reruns", cfg.n_stability_reruns},
    };
}

} // namespace

PipelineConfig config_from_json(const std::string& text) {
    ordered_json j;
    try {
        j = ordered_json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw Error(ErrorCode::ConfigInvalid, std::string("config is not valid JSON: ") + e.what());
    }

    PipelineConfig cfg;
    require_keys(j, {"input", "standardize", "lle", "som", "ensemble", "consensus", "master_seed",
                     "n_stability_reruns"},
                 "config");

    read_field(j, "standardize", cfg.standardize);
    read_field(j, "master_seed", cfg.master_seed);
    read_field(j, "n_stability_reruns", cfg.n_stability_reruns);

    if (j.contains("input")) {
        const auto& input = j.at("input");
        require_keys(input, {"csv", "synthetic"}, "input");
        if (input.contains("csv")) cfg.input_csv = input.at("csv").get<std::string>();
        if (input.contains("synthetic")) {
            const auto& synth = input.at("synthetic");
            require_keys(synth,
                         {"n_subjects", "samples_per_subject", "n_features", "n_true_clusters",
                          "cluster_separation", "seed"},
                         "input.synthetic");
            SyntheticSpec spec;
            read_field(synth, "n_subjects", spec.n_subjects);
            read_field(synth, "samples_per_subject", spec.samples_per_subject);
            read_field(synth, "n_features", spec.n_features);
            read_field(synth, "n_true_clusters", spec.n_true_clusters);
            read_field(synth, "cluster_separation", spec.cluster_separation);
            if (synth.contains("seed"))
                spec.seed = synth.at("seed").get<std::uint64_t>();
            else
                spec.seed = mix_seed(cfg.master_seed, kStreamSyntheticData);
            cfg.synthetic = spec;
        }
    }
    if (j.contains("lle")) {
        const auto& lle_j = j.at("lle");
        require_keys(lle_j, {"k_neighbors", "dim", "reg"}, "lle");
        read_field(lle_j, "k_neighbors", cfg.lle.k_neighbors);
        read_field(lle_j, "dim", cfg.lle.dim);
        read_field(lle_j, "reg", cfg.lle.reg);
    }
    if (j.contains("som")) {
        const auto& som_j = j.at("som");
        require_keys(som_j,
                     {"grid_rows", "grid_cols", "lr_init", "lr_threshold", "radius_init",
                      "iter_max"},
                     "som");
        read_field(som_j, "grid_rows", cfg.som.grid_rows);
        read_field(som_j, "grid_cols", cfg.som.grid_cols);
        read_field(som_j, "lr_init", cfg.som.lr_init);
        read_field(som_j, "lr_threshold", cfg.som.lr_threshold);
        read_field(som_j, "radius_init", cfg.som.radius_init);
        read_field(som_j, "iter_max", cfg.som.iter_max);
    }
    if (j.contains("ensemble")) {
        const auto& ens = j.at("ensemble");
        require_keys(ens, {"n_p", "ics_threshold"}, "ensemble");
        read_field(ens, "n_p", cfg.ensemble.n_p);
        read_field(ens, "ics_threshold", cfg.ensemble.ics_threshold);
    }
    if (j.contains("consensus")) {
        const auto& cons = j.at("consensus");
        require_keys(cons, {"k_min", "k_max", "sc_space"}, "consensus");
        read_field(cons, "k_min", cfg.consensus.k_min);
        read_field(cons, "k_max", cfg.consensus.k_max);
        if (cons.contains("sc_space")) {
            const auto space = cons.at("sc_space").get<std::string>();
            if (space == "input")
                cfg.consensus.sc_space = ScSpace::kInput;
            else if (space == "embedding")
                cfg.consensus.sc_space = ScSpace::kEmbedding;
            else if (space == "spectral")
                cfg.consensus.sc_space = ScSpace::kSpectral;
            else if (space == "consensus")
                cfg.consensus.sc_space = ScSpace::kConsensus;
            else
                throw Error(ErrorCode::ConfigInvalid,
                            "sc_space must be one of \"input\", \"embedding\", \"spectral\", "
                            "\"consensus\"; got \"" + space + "\"");
        }
    }
    return cfg;
}

std::string config_to_json(const PipelineConfig& cfg) { return config_json(cfg).dump(2); }

std::string report_to_json(const RunReport& report) {
    ordered_json j;
    j["schema"] = "easics-report/1";
    j["config"] = config_json(report.config);
    j["dataset"] = {{"n_samples", report.sample_ids.size()},
                    {"n_subjects", report.n_subjects},
                    {"n_features", report.n_features}};

    ordered_json consensus =
        detail::consensus_json(report.consensus, report.sample_ids, report.subject_ids);
    consensus["metrics"] = detail::validity_json(report.consensus_metrics);
    consensus["ensemble"] =
        ordered_json{{"runs", report.ensemble_runs}, {"retained", report.ensemble_retained}};
    j["consensus"] = std::move(consensus);

    ordered_json kmeans_j{{"k", report.kmeans_baseline_k}};
    const auto kmeans_metrics = detail::validity_json(report.kmeans_baseline);
    for (const auto& [key, value] : kmeans_metrics.items()) kmeans_j[key] = value;
    j["baselines"] =
        ordered_json{{"kmeans", std::move(kmeans_j)},
                     {"som", detail::validity_json(report.som_baseline)}};

    if (report.stability) {
        const StabilityBlock& block = *report.stability;
        j["stability"] = ordered_json{
            {"n_reruns", block.n_reruns},
            {"easics",
             {{"std_sc", block.easics.std_sc},
              {"std_ch", block.easics.std_ch},
              {"std_db", block.easics.std_db}}},
            {"som",
             {{"std_sc", block.single_som.std_sc},
              {"std_ch", block.single_som.std_ch},
              {"std_db", block.single_som.std_db}}},
        };
    } else {
        j["stability"] = nullptr;
    }
    return j.dump(2);
}

void write_assignments_csv(const RunReport& report, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw Error(ErrorCode::IoError, "cannot write " + path);
    out << "sample_id,subject_id,cluster\n";
    for (std::size_t i = 0; i < report.sample_ids.size(); ++i)
        out << report.sample_ids[i] << ',' << report.subject_ids[i] << ','
            << report.consensus.sample_partition.labels[i] << '\n';
    if (!out) throw Error(ErrorCode::IoError, "write failed for " + path);
}

} // namespace easics
