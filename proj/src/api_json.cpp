#include "dive/api_json.hpp"

#include "dive/document_io.hpp"

namespace dive::api {

json to_json(const Violation& v) {
  return json{{"rule", std::string(to_string(v.rule))}, {"ids", v.ids}, {"message", v.message}};
}

json violations_to_json(const std::vector<Violation>& violations) {
  json out = json::array();
  for (const auto& v : violations) out.push_back(to_json(v));
  return out;
}

json error_to_json(const Error& e) {
  json j{{"error", std::string(to_string(e.code()))}, {"message", e.what()}};
  if (!e.ids().empty()) j["ids"] = e.ids();
  if (!e.violations().empty()) j["violations"] = violations_to_json(e.violations());
  return j;
}

json subgraph_to_json(const Subgraph& subgraph) {
  json nodes = json::array();
  for (const auto& [_, n] : subgraph.nodes) nodes.push_back(node_to_json(n));
  json edges = json::array();
  for (const auto& e : subgraph.edges) edges.push_back(edge_to_json(e));
  return json{{"targets", subgraph.targets}, {"nodes", std::move(nodes)},
              {"edges", std::move(edges)}};
}

json justifications_to_json(const JustificationGraph& graph) {
  json out = json::array();
  for (const auto& j : graph.justifications)
    out.push_back(json{{"consequent", j.consequent}, {"via", j.via},
                       {"antecedents", j.antecedents}});
  return out;
}

json labels_to_json(const Labels& labels) {
  json assumptions = json::object();
  for (const auto& [id, c] : labels.assumptions()) assumptions[id] = std::string(to_string(c));
  json environments = json::object();
  for (const auto& [id, envs] : labels.all()) environments[id] = envs;
  return json{{"assumptions", std::move(assumptions)}, {"environments", std::move(environments)}};
}

json labels_summary(const Labels& labels, const std::set<NodeId>& targets) {
  json counts = json::object();
  for (const auto& [id, envs] : labels.all()) counts[id] = envs.size();
  json target_envs = json::object();
  for (const auto& t : targets)
    if (labels.contains(t)) target_envs[t] = labels.of(t);
  json assumptions = json::object();
  for (const auto& [id, c] : labels.assumptions()) assumptions[id] = std::string(to_string(c));
  return json{{"environmentCounts", std::move(counts)},
              {"targetEnvironments", std::move(target_envs)},
              {"assumptions", std::move(assumptions)}};
}

json factor_to_json(const FactorRef& f) {
  return json{{"kind", std::string(to_string(f.kind))}, {"key", f.key}, {"ref", f.str()}};
}

json catalog_to_json(const Catalog& catalog, const FactorIndex& index) {
  json out = json::array();
  for (const auto& f : catalog.all()) {
    auto j = factor_to_json(f);
    const auto& members = catalog.membership.at(f);
    j["members"] = members;
    j["memberCount"] = members.size();
    auto mentions = index.environment_mentions.find(f);
    j["environmentMentionCount"] =
        mentions == index.environment_mentions.end() ? 0 : mentions->second;
    out.push_back(std::move(j));
  }
  return out;
}

json factor_index_to_json(const FactorIndex& index) {
  json by_node = json::object();
  for (const auto& [id, factors] : index.by_node) {
    json refs = json::array();
    for (const auto& f : factors) refs.push_back(f.str());
    by_node[id] = std::move(refs);
  }
  json by_factor = json::object();
  for (const auto& [f, nodes] : index.by_factor) by_factor[f.str()] = nodes;
  return json{{"byNode", std::move(by_node)}, {"byFactor", std::move(by_factor)}};
}

json isolation_to_json(const std::string& element, const ElementIsolation& isolation) {
  json factors = json::array();
  for (const auto& f : isolation.factors) factors.push_back(f.str());
  return json{{"element", element},
              {"emphasized", isolation.view.emphasized},
              {"deemphasized", isolation.view.deemphasized},
              {"factors", std::move(factors)}};
}

json statuses_to_json(const WhatIfState& state) {
  json out = json::object();
  for (const auto& [id, s] : state.statuses) out[id] = std::string(to_string(s));
  return out;
}

json whatif_to_json(const WhatIfState& state) {
  return json{{"disabled", state.disabled},
              {"blocked", state.blocked},
              {"statuses", statuses_to_json(state)}};
}

json policy_to_json(const PolicyConfig& cfg) {
  return json{{"andPolicy", std::string(to_string(cfg.and_policy))},
              {"orPolicy", std::string(to_string(cfg.or_policy))},
              {"appraisalAggregator", std::string(to_string(cfg.appraisal_aggregator))},
              {"defaultSeed", cfg.default_seed}};
}

PolicyConfig policy_from_json(const json& j, PolicyConfig base) {
  if (!j.is_object()) throw Error(ErrorCode::BadRequest, "policy must be a JSON object");
  auto read_policy = [&](const char* key, Policy& slot) {
    auto it = j.find(key);
    if (it == j.end()) return;
    if (!it->is_string())
      throw Error(ErrorCode::BadRequest, std::string(key) + " must be min, max or avg");
    auto p = parse_policy(it->get<std::string>());
    if (!p)
      throw Error(ErrorCode::BadRequest, std::string(key) + " must be min, max or avg, got '" +
                                             it->get<std::string>() + "'");
    slot = *p;
  };
  for (const auto& [key, _] : j.items())
    if (key != "andPolicy" && key != "orPolicy" && key != "appraisalAggregator" &&
        key != "defaultSeed" && key != "version")
      throw Error(ErrorCode::BadRequest, "unknown policy field '" + key + "'");
  read_policy("andPolicy", base.and_policy);
  read_policy("orPolicy", base.or_policy);
  read_policy("appraisalAggregator", base.appraisal_aggregator);
  if (auto it = j.find("defaultSeed"); it != j.end()) {
    if (!it->is_number()) throw Error(ErrorCode::BadRequest, "defaultSeed must be a number");
    base.default_seed = it->get<double>();
  }
  check_policy(base);
  return base;
}

json confidence_to_json(const ConfidenceMap& conf, const WhatIfState& state,
                        const PolicyConfig& cfg) {
  return json{{"values", conf.values},
              {"seeds", conf.seeds},
              {"statuses", statuses_to_json(state)},
              {"disabled", state.disabled},
              {"policy", policy_to_json(cfg)}};
}

}  // namespace dive::api
