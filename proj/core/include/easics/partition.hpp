#ifndef EASICS_PARTITION_HPP
#define EASICS_PARTITION_HPP

#include <cstddef>
#include <vector>

namespace easics {

// Cluster labels, one per sample. Labels are non-negative ints; they are only
// guaranteed contiguous from 0 after canonicalize().
struct Partition {
    std::vector<int> labels;

    std::size_t n_samples() const { return labels.size(); }

    // Number of distinct labels.
    int n_clusters() const;

    // Relabels by first occurrence: the first sample gets 0, the next new
    // label 1, and so on. Two partitions equal up to label renaming
    // canonicalize to identical label arrays.
    void canonicalize();
    Partition canonicalized() const;

    bool operator==(const Partition&) const = default;
};

} // namespace easics

#endif
