// Command-line front end: generate synthetic cohorts, run the embedding, the
// full consensus pipeline, the stability study, or score an existing labeling.
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <unordered_map>

#include <CLI11.hpp>

#include "easics/consensus.hpp"
#include "easics/dataset.hpp"
#include "easics/error.hpp"
#include "easics/lle.hpp"
#include "easics/metrics.hpp"
#include "easics/pipeline.hpp"
#include "easics/rng.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitValidation = 1;
constexpr int kExitRuntime = 2;

struct GenerateOptions {
    easics::SyntheticSpec spec;
    std::string out;
    std::string labels_out;
};

struct EmbedOptions {
    std::string input;
    bool standardize = false;  // unit op: off unless asked
    easics::LleParams lle;
    std::string out;
};

struct MetricsOptions {
    std::string input;
    std::string assignments;
    bool standardize = false;
    std::string out;
};

// cluster/stability share the config + override surface.
struct PipelineOptions {
    std::string config_path;
    std::string input;
    bool use_synthetic = false;
    easics::SyntheticSpec synth;
    bool synth_seed_given = false;

    std::uint64_t seed = 0;
    std::string out = "report.json";
    std::string assignments_out;
    std::string coassoc_out;
    std::string embedding_out;
    std::string partitions_out;
};

void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path);
    if (!out) throw easics::Error(easics::ErrorCode::IoError, "cannot write " + path);
    out << text << '\n';
    if (!out) throw easics::Error(easics::ErrorCode::IoError, "write failed for " + path);
}

std::string read_text(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw easics::Error(easics::ErrorCode::IoError, "cannot open " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

void add_synthetic_flags(CLI::App* cmd, PipelineOptions& opt) {
    cmd->add_flag("--synthetic", opt.use_synthetic, "Generate a synthetic cohort instead of reading a CSV");
    cmd->add_option("--synth-subjects", opt.synth.n_subjects, "Synthetic: number of subjects");
    cmd->add_option("--synth-samples", opt.synth.samples_per_subject, "Synthetic: samples per subject");
    cmd->add_option("--synth-features", opt.synth.n_features, "Synthetic: feature count");
    cmd->add_option("--synth-clusters", opt.synth.n_true_clusters, "Synthetic: true cluster count");
    cmd->add_option("--synth-separation", opt.synth.cluster_separation,
                    "Synthetic: centroid distance in within-cluster std units");
    cmd->add_option("--synth-seed", opt.synth.seed, "Synthetic: generator seed (default: derived from --seed)")
        ->each([&](const std::string&) { opt.synth_seed_given = true; });
}

// Config file first, explicit flags on top.
easics::PipelineConfig assemble_config(const CLI::App* cmd, const PipelineOptions& opt) {
    easics::PipelineConfig cfg;
    if (!opt.config_path.empty()) cfg = easics::config_from_json(read_text(opt.config_path));

    auto given = [&](const std::string& flag) { return cmd->count(flag) > 0; };

    if (given("--input")) {
        cfg.input_csv = opt.input;
        cfg.synthetic.reset();
    }
    if (opt.use_synthetic) {
        cfg.input_csv.clear();
        easics::SyntheticSpec spec = opt.synth;
        cfg.synthetic = spec;
    }
    if (given("--seed")) cfg.master_seed = opt.seed;
    if (cfg.synthetic && !opt.synth_seed_given && opt.use_synthetic)
        cfg.synthetic->seed = easics::mix_seed(cfg.master_seed, 0x6561736963734459ull);

    if (given("--standardize")) cfg.standardize = true;
    if (given("--no-standardize")) cfg.standardize = false;

    const auto* lle_k = cmd->get_option_no_throw("--lle-k");
    if (lle_k && lle_k->count() > 0) cfg.lle.k_neighbors = lle_k->as<std::size_t>();
    const auto* lle_dim = cmd->get_option_no_throw("--lle-dim");
    if (lle_dim && lle_dim->count() > 0) cfg.lle.dim = lle_dim->as<Eigen::Index>();
    const auto* lle_reg = cmd->get_option_no_throw("--lle-reg");
    if (lle_reg && lle_reg->count() > 0) cfg.lle.reg = lle_reg->as<double>();

    const auto* grid_rows = cmd->get_option_no_throw("--som-grid-rows");
    if (grid_rows && grid_rows->count() > 0) cfg.som.grid_rows = grid_rows->as<int>();
    const auto* grid_cols = cmd->get_option_no_throw("--som-grid-cols");
    if (grid_cols && grid_cols->count() > 0) cfg.som.grid_cols = grid_cols->as<int>();
    const auto* lr_init = cmd->get_option_no_throw("--som-lr-init");
    if (lr_init && lr_init->count() > 0) cfg.som.lr_init = lr_init->as<double>();
    const auto* lr_thr = cmd->get_option_no_throw("--som-lr-threshold");
    if (lr_thr && lr_thr->count() > 0) cfg.som.lr_threshold = lr_thr->as<double>();
    const auto* radius = cmd->get_option_no_throw("--som-radius");
    if (radius && radius->count() > 0) cfg.som.radius_init = radius->as<double>();
    const auto* iter_max = cmd->get_option_no_throw("--som-iter-max");
    if (iter_max && iter_max->count() > 0) cfg.som.iter_max = iter_max->as<std::size_t>();

    const auto* n_p = cmd->get_option_no_throw("--ensemble-size");
    if (n_p && n_p->count() > 0) cfg.ensemble.n_p = n_p->as<std::size_t>();
    const auto* ics_thr = cmd->get_option_no_throw("--ics-threshold");
    if (ics_thr && ics_thr->count() > 0) cfg.ensemble.ics_threshold = ics_thr->as<double>();

    const auto* k_min = cmd->get_option_no_throw("--k-min");
    if (k_min && k_min->count() > 0) cfg.consensus.k_min = k_min->as<int>();
    const auto* k_max = cmd->get_option_no_throw("--k-max");
    if (k_max && k_max->count() > 0) cfg.consensus.k_max = k_max->as<int>();
    const auto* sc_space = cmd->get_option_no_throw("--sc-space");
    if (sc_space && sc_space->count() > 0) {
        const auto space = sc_space->as<std::string>();
        if (space == "input")
            cfg.consensus.sc_space = easics::ScSpace::kInput;
        else if (space == "embedding")
            cfg.consensus.sc_space = easics::ScSpace::kEmbedding;
        else if (space == "spectral")
            cfg.consensus.sc_space = easics::ScSpace::kSpectral;
        else if (space == "consensus")
            cfg.consensus.sc_space = easics::ScSpace::kConsensus;
        else
            throw easics::Error(easics::ErrorCode::ConfigInvalid,
                                "--sc-space must be input, embedding, spectral or consensus");
    }

    const auto* reruns = cmd->get_option_no_throw("--reruns");
    if (reruns && reruns->count() > 0) cfg.n_stability_reruns = reruns->as<std::size_t>();

    return cfg;
}

void add_pipeline_flags(CLI::App* cmd, PipelineOptions& opt, bool stability) {
    cmd->add_option("--config", opt.config_path, "JSON config file (flags override it)");
    cmd->add_option("--input", opt.input, "Dataset CSV (sample_id,subject_id,f0,...)");
    add_synthetic_flags(cmd, opt);
    cmd->add_option("--seed", opt.seed, "Master seed; all randomness derives from it")->required();
    cmd->add_option("--out", opt.out, "Report JSON path (default report.json)");
    cmd->add_option("--assignments-out", opt.assignments_out, "Write sample assignments CSV");
    cmd->add_option("--coassoc-out", opt.coassoc_out, "Write the co-association matrix CSV");
    cmd->add_option("--embedding-out", opt.embedding_out, "Write the embedding CSV");
    cmd->add_option("--partitions-out", opt.partitions_out, "Write retained ensemble partitions CSV");
    cmd->add_flag("--standardize", "Z-score features before the embedding (default on)");
    cmd->add_flag("--no-standardize", "Keep features as loaded");
    cmd->add_option("--lle-k", "LLE neighbor count (default 30)");
    cmd->add_option("--lle-dim", "LLE output dimension (default 30)");
    cmd->add_option("--lle-reg", "LLE local Gram regularization (default 1e-3)");
    cmd->add_option("--som-grid-rows", "SOM grid rows (default 4)");
    cmd->add_option("--som-grid-cols", "SOM grid cols (default 4)");
    cmd->add_option("--som-lr-init", "SOM initial learning rate (default 0.5)");
    cmd->add_option("--som-lr-threshold", "SOM learning-rate stop threshold (default 0.01)");
    cmd->add_option("--som-radius", "SOM initial neighborhood radius (default 2.0)");
    cmd->add_option("--som-iter-max", "SOM max sample presentations (default 10000)");
    cmd->add_option("--ensemble-size", "Number of SOM runs in the ensemble (default 1000)");
    cmd->add_option("--ics-threshold", "Consistency filter threshold (default 0.099)");
    cmd->add_option("--k-min", "Smallest candidate cluster count (default 2)");
    cmd->add_option("--k-max", "Largest candidate cluster count (default 20)");
    cmd->add_option("--sc-space",
                    "Silhouette space for k selection: input|embedding|spectral|consensus (default input)");
    if (stability)
        cmd->add_option("--reruns", "Stability reruns (default 10)");
}

void print_timings(const easics::RunReport& report) {
    std::fprintf(stderr, "timings:\n");
    for (const auto& t : report.timings)
        std::fprintf(stderr, "  %-10s %.3fs\n", t.stage.c_str(), t.seconds);
    std::fprintf(stderr, "  %-10s %.3fs\n", "total", report.total_seconds);
}

// Side outputs shared by cluster and stability.
void write_side_outputs(const easics::PipelineConfig& cfg, const PipelineOptions& opt) {
    if (opt.coassoc_out.empty() && opt.embedding_out.empty() && opt.partitions_out.empty())
        return;
    easics::SampleMatrix data =
        cfg.input_csv.empty() ? easics::generate_synthetic(*cfg.synthetic).data
                              : easics::load_csv(cfg.input_csv);
    if (cfg.standardize) data = easics::standardize_features(data);
    const easics::Embedding embedding = easics::lle(data, cfg.lle);
    if (!opt.embedding_out.empty()) easics::write_embedding_csv(embedding, opt.embedding_out);
    if (!opt.coassoc_out.empty() || !opt.partitions_out.empty()) {
        const easics::PartitionSet ps =
            easics::run_ensemble(embedding, embedding.subject_ids, cfg.ensemble.n_p,
                                 cfg.ensemble.ics_threshold, cfg.som, cfg.master_seed);
        if (!opt.partitions_out.empty())
            easics::write_partition_set_csv(ps, embedding.sample_ids, opt.partitions_out);
        if (!opt.coassoc_out.empty())
            easics::write_coassociation_csv(easics::co_association(ps), opt.coassoc_out);
    }
}

int run_generate(const GenerateOptions& opt) {
    const easics::SyntheticData generated = easics::generate_synthetic(opt.spec);
    easics::write_csv(generated.data, opt.out);
    if (!opt.labels_out.empty()) {
        std::ofstream out(opt.labels_out);
        if (!out) throw easics::Error(easics::ErrorCode::IoError, "cannot write " + opt.labels_out);
        out << "subject_id,true_cluster\n";
        for (std::size_t s = 0; s < generated.true_labels.size(); ++s)
            out << "subj" << s << ',' << generated.true_labels[s] << '\n';
    }
    std::fprintf(stderr, "wrote %s (%lld rows x %lld features)\n", opt.out.c_str(),
                 static_cast<long long>(generated.data.rows()),
                 static_cast<long long>(generated.data.cols()));
    return kExitOk;
}

int run_embed(const EmbedOptions& opt) {
    easics::SampleMatrix data = easics::load_csv(opt.input);
    if (opt.standardize) data = easics::standardize_features(data);
    const easics::Embedding embedding = easics::lle(data, opt.lle);
    easics::write_embedding_csv(embedding, opt.out);
    std::fprintf(stderr, "wrote %s (%lld rows x %lld dims)\n", opt.out.c_str(),
                 static_cast<long long>(embedding.rows()),
                 static_cast<long long>(embedding.dim()));
    return kExitOk;
}

int run_metrics(const MetricsOptions& opt) {
    easics::SampleMatrix data = easics::load_csv(opt.input);
    if (opt.standardize) data = easics::standardize_features(data);

    // assignments: sample_id,subject_id,cluster (subject column optional on read)
    std::ifstream in(opt.assignments);
    if (!in) throw easics::Error(easics::ErrorCode::IoError, "cannot open " + opt.assignments);
    std::string line;
    if (!std::getline(in, line))
        throw easics::Error(easics::ErrorCode::EmptyFile, opt.assignments);
    std::unordered_map<std::string, int> by_sample;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const auto first = line.find(',');
        const auto last = line.rfind(',');
        if (first == std::string::npos)
            throw easics::Error(easics::ErrorCode::RaggedRow, "assignments row \"" + line + "\"");
        by_sample[line.substr(0, first)] = std::stoi(line.substr(last + 1));
    }

    easics::Partition p;
    p.labels.reserve(data.sample_ids.size());
    for (const auto& id : data.sample_ids) {
        const auto it = by_sample.find(id);
        if (it == by_sample.end())
            throw easics::Error(easics::ErrorCode::LengthMismatch,
                                "no assignment for sample \"" + id + "\"");
        p.labels.push_back(it->second);
    }

    const easics::ValidityReport report =
        easics::evaluate_partition(data.values, p, data.subject_ids);
    const std::string text = easics::to_json(report);
    if (opt.out.empty())
        std::printf("%s\n", text.c_str());
    else
        write_text(opt.out, text);
    return kExitOk;
}

int run_cluster(const CLI::App* cmd, const PipelineOptions& opt) {
    const easics::PipelineConfig cfg = assemble_config(cmd, opt);
    easics::RunReport report = easics::run_pipeline(cfg);
    write_text(opt.out, easics::report_to_json(report));
    if (!opt.assignments_out.empty()) easics::write_assignments_csv(report, opt.assignments_out);
    write_side_outputs(cfg, opt);
    print_timings(report);
    std::fprintf(stderr, "selected_k=%d retained=%zu/%zu -> %s\n", report.consensus.selected_k,
                 report.ensemble_retained, report.ensemble_runs, opt.out.c_str());
    return kExitOk;
}

int run_stability(const CLI::App* cmd, const PipelineOptions& opt) {
    const easics::PipelineConfig cfg = assemble_config(cmd, opt);
    easics::RunReport report = easics::run_pipeline(cfg);
    report.stability = easics::stability_study(cfg);
    write_text(opt.out, easics::report_to_json(report));
    if (!opt.assignments_out.empty()) easics::write_assignments_csv(report, opt.assignments_out);
    write_side_outputs(cfg, opt);
    print_timings(report);
    std::fprintf(stderr, "stability over %zu reruns -> %s\n", report.stability->n_reruns,
                 opt.out.c_str());
    return kExitOk;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"EasiCS consensus clustering pipeline"};
    app.require_subcommand(1);

    GenerateOptions gen;
    auto* generate = app.add_subcommand("generate", "Write a seeded synthetic cohort CSV");
    generate->add_option("--subjects", gen.spec.n_subjects, "Number of subjects (default 57)");
    generate->add_option("--samples-per-subject", gen.spec.samples_per_subject, "Replicates per subject (default 3)");
    generate->add_option("--features", gen.spec.n_features, "Feature count (default 40)");
    generate->add_option("--clusters", gen.spec.n_true_clusters, "True cluster count (default 4)");
    generate->add_option("--separation", gen.spec.cluster_separation,
                         "Centroid distance in within-cluster std units (default 10)");
    generate->add_option("--seed", gen.spec.seed, "Generator seed")->required();
    generate->add_option("--out", gen.out, "Output CSV path")->required();
    generate->add_option("--labels-out", gen.labels_out, "Also write subject_id,true_cluster CSV");

    EmbedOptions emb;
    auto* embed = app.add_subcommand("embed", "Run the locally linear embedding only");
    embed->add_option("--input", emb.input, "Dataset CSV")->required();
    embed->add_flag("--standardize", emb.standardize, "Z-score features first (default off here)");
    embed->add_option("--lle-k", emb.lle.k_neighbors, "Neighbor count (default 30)");
    embed->add_option("--lle-dim", emb.lle.dim, "Output dimension (default 30)");
    embed->add_option("--lle-reg", emb.lle.reg, "Local Gram regularization (default 1e-3)");
    embed->add_option("--out", emb.out, "Embedding CSV path")->required();

    PipelineOptions clu;
    auto* cluster = app.add_subcommand("cluster", "Run the full consensus pipeline");
    add_pipeline_flags(cluster, clu, false);

    PipelineOptions stab;
    auto* stability = app.add_subcommand("stability", "Rerun the pipeline and report metric spread");
    add_pipeline_flags(stability, stab, true);

    MetricsOptions met;
    auto* metrics = app.add_subcommand("metrics", "Score an existing labeling");
    metrics->add_option("--input", met.input, "Dataset CSV")->required();
    metrics->add_option("--assignments", met.assignments, "Assignments CSV (sample_id,...,cluster)")->required();
    metrics->add_flag("--standardize", met.standardize, "Z-score features first (default off here)");
    metrics->add_option("--out", met.out, "Report path (stdout when omitted)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? kExitOk : kExitValidation;
    }

    try {
        if (generate->parsed()) return run_generate(gen);
        if (embed->parsed()) return run_embed(emb);
        if (cluster->parsed()) return run_cluster(cluster, clu);
        if (stability->parsed()) return run_stability(stability, stab);
        if (metrics->parsed()) return run_metrics(met);
    } catch (const easics::Error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return easics::is_validation_error(e.code()) ? kExitValidation : kExitRuntime;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitRuntime;
    }
    return kExitOk;
}
