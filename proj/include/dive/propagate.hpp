#pragma once

// Confidence seeding from appraisals and forward propagation through the
// AND/OR justification structure.

#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string_view>

#include "dive/tms.hpp"

namespace dive {

enum class Policy { Min, Max, Avg };

std::string_view to_string(Policy policy);   // "min", "max", "avg"
std::optional<Policy> parse_policy(std::string_view text);

// Combines a non-empty list of confidences at a junction.
using JunctionRule = std::function<double(std::span<const double>)>;

JunctionRule builtin_rule(Policy policy);

struct PolicyConfig {
  Policy and_policy = Policy::Min;
  Policy or_policy = Policy::Max;
  Policy appraisal_aggregator = Policy::Avg;
  double default_seed = 1.0;

  bool operator==(const PolicyConfig&) const = default;
};

// Throws RangeError when default_seed is outside [0,1].
void check_policy(const PolicyConfig& cfg);

using SeedMap = std::map<NodeId, double>;

struct ConfidenceMap {
  std::map<NodeId, double> values;  // refuted nodes are absent
  SeedMap seeds;

  bool operator==(const ConfidenceMap&) const = default;
};

// Per subgraph node: the appraisal confidences targeting it plus the joint
// likelihood of every nexus it belongs to, combined by the aggregator.
// Nodes with neither get cfg.default_seed.
SeedMap seed_confidences(const ProvDocument& doc, const Subgraph& subgraph,
                         const PolicyConfig& cfg);

// Forward propagation in dependency order. A justification is dropped when
// any participant is refuted in the state; a derived node with no remaining
// justification is left out of the result. Missing seeds default to
// cfg.default_seed. Throws InconsistentState if the state was computed from
// other labels.
ConfidenceMap propagate(const Labels& labels, const JustificationGraph& graph,
                        const SeedMap& seeds, const PolicyConfig& cfg,
                        const WhatIfState& state);

// Same as propagate with caller-supplied junction rules.
ConfidenceMap propagate_with(const Labels& labels, const JustificationGraph& graph,
                             const SeedMap& seeds, double default_seed,
                             const JunctionRule& and_rule, const JunctionRule& or_rule,
                             const WhatIfState& state);

// Independent closed form for and=min / or=max without refutation:
// conf(n) = max over environments of min over members of seed. Requires seeds
// on non-assumption nodes to be 1 (or absent with default 1); otherwise
// throws PreconditionViolated, as it does for any other policy pair.
ConfidenceMap closed_form_check(const Labels& labels, const SeedMap& seeds,
                                const PolicyConfig& cfg = {});

}  // namespace dive
