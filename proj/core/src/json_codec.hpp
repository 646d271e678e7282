// Internal JSON builders shared by the serialization entry points. Not
// installed; public headers stay free of the JSON dependency.
#ifndef EASICS_SRC_JSON_CODEC_HPP
#define EASICS_SRC_JSON_CODEC_HPP

#include <string>
#include <vector>

#include <json.hpp>

#include "easics/consensus.hpp"
#include "easics/metrics.hpp"

namespace easics::detail {

// Non-finite values (the documented +inf sentinels) serialize as null.
inline nlohmann::ordered_json validity_json(const ValidityReport& r) {
    return nlohmann::ordered_json{{"sc", r.sc},
                                  {"ch", r.ch},
                                  {"db", r.db},
                                  {"ics", r.ics},
                                  {"n_clusters", r.n_clusters}};
}

inline nlohmann::ordered_json consensus_json(const ConsensusResult& result,
                                             const std::vector<std::string>& sample_ids,
                                             const std::vector<std::string>& subject_ids) {
    nlohmann::ordered_json j;
    j["selected_k"] = result.selected_k;

    auto per_k = nlohmann::ordered_json::array();
    for (const auto& entry : result.per_k_reports) {
        nlohmann::ordered_json row{{"k", entry.k}};
        const auto metrics = validity_json(entry.report);
        for (const auto& [key, value] : metrics.items()) row[key] = value;
        per_k.push_back(std::move(row));
    }
    j["per_k"] = std::move(per_k);

    auto assignments = nlohmann::ordered_json::array();
    for (std::size_t i = 0; i < result.sample_partition.labels.size(); ++i)
        assignments.push_back({{"sample_id", sample_ids[i]},
                               {"subject_id", subject_ids[i]},
                               {"cluster", result.sample_partition.labels[i]}});
    j["assignments"] = std::move(assignments);

    auto subjects = nlohmann::ordered_json::array();
    for (const auto& [subject, label] : result.subject_labels)
        subjects.push_back({{"subject_id", subject}, {"cluster", label}});
    j["subject_labels"] = std::move(subjects);
    return j;
}

} // namespace easics::detail

#endif
