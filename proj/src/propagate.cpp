#include "dive/propagate.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

namespace dive {

std::string_view to_string(Policy policy) {
  switch (policy) {
    case Policy::Min: return "min";
    case Policy::Max: return "max";
    case Policy::Avg: return "avg";
  }
  return "";
}

std::optional<Policy> parse_policy(std::string_view text) {
  for (auto p : {Policy::Min, Policy::Max, Policy::Avg})
    if (to_string(p) == text) return p;
  return std::nullopt;
}

JunctionRule builtin_rule(Policy policy) {
  switch (policy) {
    case Policy::Min:
      return [](std::span<const double> v) { return *std::min_element(v.begin(), v.end()); };
    case Policy::Max:
      return [](std::span<const double> v) { return *std::max_element(v.begin(), v.end()); };
    case Policy::Avg:
      return [](std::span<const double> v) {
        return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
      };
  }
  return {};
}

void check_policy(const PolicyConfig& cfg) {
  if (!std::isfinite(cfg.default_seed) || cfg.default_seed < 0.0 || cfg.default_seed > 1.0)
    throw Error(ErrorCode::RangeError,
                "defaultSeed " + std::to_string(cfg.default_seed) + " is outside [0,1]");
}

SeedMap seed_confidences(const ProvDocument& doc, const Subgraph& subgraph,
                         const PolicyConfig& cfg) {
  check_policy(cfg);
  std::map<NodeId, std::vector<double>> judgments;
  for (const auto& [_, a] : doc.appraisals())
    if (subgraph.contains(a.appraised)) judgments[a.appraised].push_back(a.confidence);
  for (const auto& [_, n] : doc.nexuses())
    for (const auto& m : n.members)
      if (subgraph.contains(m)) judgments[m].push_back(n.joint_likelihood);

  auto aggregate = builtin_rule(cfg.appraisal_aggregator);
  SeedMap seeds;
  for (const auto& [id, _] : subgraph.nodes) {
    auto it = judgments.find(id);
    seeds[id] = it == judgments.end() ? cfg.default_seed : aggregate(it->second);
  }
  return seeds;
}

namespace {

double seed_or(const SeedMap& seeds, const NodeId& id, double fallback) {
  auto it = seeds.find(id);
  return it == seeds.end() ? fallback : it->second;
}

[[noreturn]] void inconsistent(const std::string& why) {
  throw Error(ErrorCode::InconsistentState, why);
}

}  // namespace

ConfidenceMap propagate_with(const Labels& labels, const JustificationGraph& graph,
                             const SeedMap& seeds, double default_seed,
                             const JunctionRule& and_rule, const JunctionRule& or_rule,
                             const WhatIfState& state) {
  if (state.labels_fingerprint != labels.fingerprint())
    inconsistent("what-if state was computed from different labels");
  if (state.statuses.size() != labels.all().size())
    inconsistent("what-if state does not cover the labeled nodes");
  if (graph.topological_order.size() != labels.all().size())
    inconsistent("justification graph does not match the labels");

  auto refuted = [&](const NodeId& id) {
    auto it = state.statuses.find(id);
    if (it == state.statuses.end()) inconsistent("no status for '" + id + "'");
    return it->second == Status::Refuted;
  };

  ConfidenceMap out;
  for (const auto& [id, _] : labels.all()) out.seeds[id] = seed_or(seeds, id, default_seed);

  std::vector<double> terms;
  for (const auto& node : graph.topological_order) {
    if (!labels.contains(node)) inconsistent("'" + node + "' has no label");
    if (refuted(node)) continue;
    const double seed = out.seeds.at(node);
    auto assumption = graph.assumptions.find(node);

    if (assumption != graph.assumptions.end() &&
        assumption->second != AssumptionClass::Activity) {
      out.values[node] = seed;
      continue;
    }

    if (assumption != graph.assumptions.end()) {
      terms.assign(1, seed);
      if (auto inputs = graph.activity_inputs.find(node); inputs != graph.activity_inputs.end())
        for (const auto& input : inputs->second)
          if (!refuted(input)) terms.push_back(out.values.at(input));
      out.values[node] = and_rule(terms);
      continue;
    }

    std::vector<double> alternatives;
    for (const auto* j : graph.justifications_of(node)) {
      if (refuted(j->via) ||
          std::any_of(j->antecedents.begin(), j->antecedents.end(), refuted))
        continue;
      terms.assign(1, out.values.at(j->via));
      for (const auto& a : j->antecedents) terms.push_back(out.values.at(a));
      alternatives.push_back(and_rule(terms));
    }
    if (alternatives.empty())
      inconsistent("'" + node + "' has no live justification but is not refuted");
    double derived = or_rule(alternatives);
    terms = {seed, derived};
    out.values[node] = and_rule(terms);
  }
  return out;
}

ConfidenceMap propagate(const Labels& labels, const JustificationGraph& graph,
                        const SeedMap& seeds, const PolicyConfig& cfg,
                        const WhatIfState& state) {
  check_policy(cfg);
  return propagate_with(labels, graph, seeds, cfg.default_seed,
                        builtin_rule(cfg.and_policy), builtin_rule(cfg.or_policy), state);
}

ConfidenceMap closed_form_check(const Labels& labels, const SeedMap& seeds,
                                const PolicyConfig& cfg) {
  if (cfg.and_policy != Policy::Min || cfg.or_policy != Policy::Max)
    throw Error(ErrorCode::PreconditionViolated,
                "closed form holds only for and=min, or=max");
  check_policy(cfg);

  ConfidenceMap out;
  for (const auto& [id, envs] : labels.all()) {
    double seed = seed_or(seeds, id, cfg.default_seed);
    out.seeds[id] = seed;
    if (!labels.is_assumption(id) && seed != 1.0)
      throw Error(ErrorCode::PreconditionViolated,
                  "derived node '" + id + "' carries seed " + std::to_string(seed) +
                      "; the closed form needs seeds on assumptions only",
                  {id});
    double best = 0.0;
    for (const auto& env : envs) {
      double weakest = 1.0;
      for (const auto& a : env) weakest = std::min(weakest, seed_or(seeds, a, cfg.default_seed));
      best = std::max(best, weakest);
    }
    out.values[id] = best;
  }
  return out;
}

}  // namespace dive
