#include "easics/partition.hpp"

#include <unordered_map>

namespace easics {

int Partition::n_clusters() const {
    std::unordered_map<int, int> seen;
    for (int l : labels) seen.emplace(l, 0);
    return static_cast<int>(seen.size());
}

void Partition::canonicalize() {
    std::unordered_map<int, int> remap;
    int next = 0;
    for (int& l : labels) {
        auto [it, inserted] = remap.emplace(l, next);
        if (inserted) ++next;
        l = it->second;
    }
}

Partition Partition::canonicalized() const {
    Partition p = *this;
    p.canonicalize();
    return p;
}

} // namespace easics
