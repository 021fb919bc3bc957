#pragma once

#include <filesystem>
#include <string>

#include <json.hpp>

#include "acqlab/model.hpp"

namespace acqlab {

using json = nlohmann::json;

json constraint_to_json(const Constraint& c);
Constraint constraint_from_json(const json& j);
json relation_to_json(const RelationTemplate& r);
RelationTemplate relation_from_json(const json& j);

// Instance document: variables, domains, language, target, optional bias/learned.
json instance_to_json(const Instance& inst);
Instance instance_from_json(const json& j);
Instance parse_instance(const std::string& text);

Instance load_instance(const std::filesystem::path& path);
void save_instance(const Instance& inst, const std::filesystem::path& path);

// Every variable listed, unassigned ones as null.
json assignment_to_json(const Assignment& e);
Assignment assignment_from_json(const json& j, std::size_t num_vars);

}  // namespace acqlab
