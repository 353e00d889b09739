#pragma once

// JSON shapes shared by the HTTP API and the CLI's --json output. All maps
// serialize with sorted keys and all lists in a stable order.

#include <json.hpp>

#include "dive/catalog.hpp"
#include "dive/propagate.hpp"

namespace dive::api {

using nlohmann::json;

json to_json(const Violation& v);
json violations_to_json(const std::vector<Violation>& violations);
json error_to_json(const Error& e);

// {"nodes": [...], "edges": [...], "targets": [...]} in dive/1 conventions.
json subgraph_to_json(const Subgraph& subgraph);

json justifications_to_json(const JustificationGraph& graph);

// {"assumptions": {id: class}, "environments": {id: [[member...]...]}}
json labels_to_json(const Labels& labels);

// Per node: environment count; targets get their environments in full.
json labels_summary(const Labels& labels, const std::set<NodeId>& targets);

json factor_to_json(const FactorRef& f);
json catalog_to_json(const Catalog& catalog, const FactorIndex& index);
json factor_index_to_json(const FactorIndex& index);

json isolation_to_json(const std::string& element, const ElementIsolation& isolation);

json statuses_to_json(const WhatIfState& state);
json whatif_to_json(const WhatIfState& state);

json policy_to_json(const PolicyConfig& cfg);

// Throws BadRequest on unknown policy names or a non-numeric defaultSeed;
// absent fields keep their value from base.
PolicyConfig policy_from_json(const json& j, PolicyConfig base = {});

json confidence_to_json(const ConfidenceMap& conf, const WhatIfState& state,
                        const PolicyConfig& cfg);

}  // namespace dive::api
