#pragma once

#include <filesystem>
#include <string>

#include <json.hpp>

#include "multigroup/decision_list.hpp"
#include "multigroup/types.hpp"

namespace multigroup {

// JSON formats
//   distribution:  {"points": m, "mass": [...], "labels": [...], "label_dist": [[...], ...]}
//   hypotheses:    {"hypotheses": [output vectors...], "names": [...]} when
//                  names are set, else a bare array; loader accepts both
//   groups:        {"groups": [0/1 indicator vectors...], "names": [...]}
//                  when names are set, else a bare array; loader accepts both
//   decision list: {"rules": [[group, hyp], ...], "default": hyp}
//
// Doubles survive a dump/parse round trip bit-exactly.

nlohmann::json to_json(const FiniteDistribution& dist);
FiniteDistribution distribution_from_json(const nlohmann::json& j);

nlohmann::json to_json(const HypothesisClass& H);
HypothesisClass hypotheses_from_json(const nlohmann::json& j);

nlohmann::json to_json(const GroupFamily& G);
GroupFamily groups_from_json(const nlohmann::json& j);

nlohmann::json to_json(const DecisionList& list);
DecisionList decision_list_from_json(const nlohmann::json& j);

// File helpers; errors carry the path in the message.
void save_json(const nlohmann::json& j, const std::filesystem::path& path);
nlohmann::json load_json(const std::filesystem::path& path);

// Sample files: CSV with header "index,point_id,label_id". Weighted samples
// have no CSV form and are rejected.
void save_sample_csv(const Sample& s, const std::filesystem::path& path);
Sample load_sample_csv(const std::filesystem::path& path);

}  // namespace multigroup
