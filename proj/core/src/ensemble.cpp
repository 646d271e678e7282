#include "easics/ensemble.hpp"

#include <fstream>

#include "easics/error.hpp"
#include "easics/metrics.hpp"
#include "easics/parallel.hpp"
#include "easics/rng.hpp"

namespace easics {

PartitionSet filter_by_consistency(std::vector<EnsembleMember> candidates,
                                   const std::vector<std::string>& subjects,
                                   double ics_threshold, std::size_t n_runs) {
    if (!(ics_threshold > 0.0 && ics_threshold <= 1.0))
        throw Error(ErrorCode::ConfigInvalid, "ics_threshold must be in (0, 1]");

    PartitionSet ps;
    ps.n_samples = subjects.size();
    ps.n_runs = n_runs;
    ps.ics_threshold = ics_threshold;
    for (auto& member : candidates) {
        if (member.partition.n_samples() != subjects.size())
            throw Error(ErrorCode::LengthMismatch,
                        "run " + std::to_string(member.run_index) + " has " +
                            std::to_string(member.partition.n_samples()) + " labels for " +
                            std::to_string(subjects.size()) + " samples");
        member.ics = ics(member.partition, subjects);
        if (member.ics < ics_threshold) ps.members.push_back(std::move(member));
    }
    if (ps.members.empty())
        throw Error(ErrorCode::EmptyEnsemble,
                    "no partition passed the consistency filter at " +
                        std::to_string(ics_threshold));
    return ps;
}

PartitionSet run_ensemble(const Embedding& data, const std::vector<std::string>& subjects,
                          std::size_t n_p, double ics_threshold, const SomConfig& base_cfg,
                          std::uint64_t master_seed) {
    if (n_p < 1) throw Error(ErrorCode::ConfigInvalid, "n_p must be >= 1");
    if (subjects.size() != static_cast<std::size_t>(data.rows()))
        throw Error(ErrorCode::LengthMismatch, "subject ids do not match embedding rows");

    std::vector<EnsembleMember> candidates(n_p);
    parallel_for(n_p, [&](std::size_t run) {
        SomConfig cfg = base_cfg;
        cfg.seed = mix_seed(master_seed, run);
        const SomModel model = train_som(data, cfg);
        EnsembleMember& member = candidates[run];
        member.run_index = run;
        member.seed = cfg.seed;
        member.partition = partition_from_som(model, data).canonicalized();
    });
    return filter_by_consistency(std::move(candidates), subjects, ics_threshold, n_p);
}

void write_partition_set_csv(const PartitionSet& ps, const std::vector<std::string>& sample_ids,
                             const std::string& path) {
    if (sample_ids.size() != ps.n_samples)
        throw Error(ErrorCode::LengthMismatch, "sample ids do not match partition set");
    std::ofstream out(path);
    if (!out) throw Error(ErrorCode::IoError, "cannot write " + path);

    out << "sample_id";
    for (const auto& member : ps.members) out << ",run_" << member.run_index;
    out << '\n';
    for (std::size_t i = 0; i < ps.n_samples; ++i) {
        out << sample_ids[i];
        for (const auto& member : ps.members) out << ',' << member.partition.labels[i];
        out << '\n';
    }
    if (!out) throw Error(ErrorCode::IoError, "write failed for " + path);
}

} // namespace easics
