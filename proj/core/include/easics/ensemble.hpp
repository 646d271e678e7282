#ifndef EASICS_ENSEMBLE_HPP
#define EASICS_ENSEMBLE_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "easics/lle.hpp"
#include "easics/partition.hpp"
#include "easics/som.hpp"

namespace easics {

struct EnsembleMember {
    std::size_t run_index = 0;
    std::uint64_t seed = 0;
    Partition partition;  // canonicalized
    double ics = 0.0;
};

// The filtered partition set: members ordered by run_index, each with its
// consistency score strictly under the threshold used to build the set.
struct PartitionSet {
    std::size_t n_samples = 0;
    std::size_t n_runs = 0;  // runs attempted, >= members.size()
    double ics_threshold = 0.0;
    std::vector<EnsembleMember> members;
};

// Scores every candidate with ics() and keeps those strictly below the
// threshold, preserving run_index order. Throws EmptyEnsemble when nothing
// survives (the caller decides whether to relax the threshold).
PartitionSet filter_by_consistency(std::vector<EnsembleMember> candidates,
                                   const std::vector<std::string>& subjects,
                                   double ics_threshold, std::size_t n_runs);

// Trains n_p SOMs that differ only by seed (seed_i derived from master_seed
// and the run index), partitions the data with each, and filters by the
// consistency score. Members may be trained in parallel; the result is
// identical to a sequential run.
PartitionSet run_ensemble(const Embedding& data, const std::vector<std::string>& subjects,
                          std::size_t n_p, double ics_threshold, const SomConfig& base_cfg,
                          std::uint64_t master_seed);

// Wide CSV dump: `sample_id,run_<i>,...` with one column per retained member.
void write_partition_set_csv(const PartitionSet& ps, const std::vector<std::string>& sample_ids,
                             const std::string& path);

} // namespace easics

#endif
