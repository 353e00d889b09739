#pragma once

// Assumption-based truth maintenance over provenance.
//
// Activities act as justifications: each (entity, generating activity) pair
// joins the activity's used entities and associated agents to the entity.
// Several generating activities for one entity are alternative derivations,
// so the structure is an AND/OR graph. Assumptions are premise entities
// (nothing generates them), agents and activities. A node's label is the set
// of minimal assumption sets (environments) from which it can be derived.

#include <cstddef>
#include <cstdint>
#include <map>
#include <set>
#include <string_view>
#include <vector>

#include "dive/model.hpp"

namespace dive {

// Upstream closure of a set of targets, with the induced edges.
struct Subgraph {
  std::set<NodeId> targets;
  std::map<NodeId, ProvNode> nodes;
  std::set<ProvEdge> edges;

  bool contains(const NodeId& id) const { return nodes.count(id) > 0; }
};

// Walks wasGeneratedBy and wasAttributedTo from entities and used and
// wasAssociatedWith from activities. Throws UnknownNode for missing targets.
Subgraph retrieve_upstream(const ProvDocument& doc, const std::set<NodeId>& targets);

struct Justification {
  NodeId consequent;
  NodeId via;
  std::set<NodeId> antecedents;

  auto operator<=>(const Justification&) const = default;
};

enum class AssumptionClass { PremiseEntity, Agent, Activity };

std::string_view to_string(AssumptionClass c);

struct JustificationGraph {
  std::vector<Justification> justifications;  // sorted by (consequent, via)
  // Inputs (used entities and associated agents) of every activity in the
  // subgraph, including activities that generate nothing.
  std::map<NodeId, std::set<NodeId>> activity_inputs;
  std::map<NodeId, AssumptionClass> assumptions;
  // Every node in dependency order: inputs before the nodes they feed.
  std::vector<NodeId> topological_order;

  std::vector<const Justification*> justifications_of(const NodeId& consequent) const;
};

// Throws CyclicProvenance if used/wasGeneratedBy form a cycle.
JustificationGraph build_justifications(const Subgraph& subgraph);

// Sorted, duplicate-free assumption ids.
using Environment = std::vector<NodeId>;

struct LabelOptions {
  std::size_t max_environments = 10'000;
};

class Labels {
 public:
  Labels() = default;
  Labels(std::map<NodeId, std::vector<Environment>> environments,
         std::map<NodeId, AssumptionClass> assumptions);

  bool contains(const NodeId& node) const { return environments_.count(node) > 0; }

  // Throws UnknownNode.
  const std::vector<Environment>& of(const NodeId& node) const;

  bool is_assumption(const NodeId& node) const { return assumptions_.count(node) > 0; }

  const std::map<NodeId, std::vector<Environment>>& all() const { return environments_; }
  const std::map<NodeId, AssumptionClass>& assumptions() const { return assumptions_; }

  // Content hash; used to detect what-if state computed against other labels.
  std::uint64_t fingerprint() const { return fingerprint_; }

  bool operator==(const Labels& other) const {
    return environments_ == other.environments_ && assumptions_ == other.assumptions_;
  }

 private:
  std::map<NodeId, std::vector<Environment>> environments_;
  std::map<NodeId, AssumptionClass> assumptions_;
  std::uint64_t fingerprint_ = 0;
};

// Throws CyclicProvenance, or LabelExplosion when a node would carry more
// than options.max_environments environments.
Labels compute_labels(const JustificationGraph& graph, LabelOptions options = {});

// Removes duplicates and every environment that is a strict superset of
// another; result sorted lexicographically.
std::vector<Environment> minimize(std::vector<Environment> environments);

// Union of all environment members of the node.
std::set<NodeId> upstream_of(const Labels& labels, const NodeId& node);

// The node itself plus every node with the given node in one of its
// environments.
std::set<NodeId> downstream_of(const Labels& labels, const NodeId& node);

struct IsolationView {
  std::set<NodeId> emphasized;
  std::set<NodeId> deemphasized;
};

// Emphasizes upstream and downstream of every focus node.
IsolationView isolate_nodes(const Labels& labels, const Subgraph& subgraph,
                            const std::set<NodeId>& focus);

// Nodes reachable from `from` along edges in the upstream direction within
// the subgraph, including `from` itself. Unlike upstream_of this also yields
// intermediate derived entities and attributed agents.
std::set<NodeId> upstream_closure(const Subgraph& subgraph, const std::set<NodeId>& from);

// Ordered by severity.
enum class Status { Active = 0, PartiallyAffected = 1, Refuted = 2 };

std::string_view to_string(Status status);

struct WhatIfState {
  std::vector<std::string> disabled;  // elements as requested, wire syntax
  std::set<NodeId> blocked;           // resolved assumption ids
  std::map<NodeId, Status> statuses;
  std::uint64_t labels_fingerprint = 0;

  bool operator==(const WhatIfState&) const = default;
};

// Three-valued status of every labeled node with the given assumptions
// disabled: Refuted when every environment meets the blocked set,
// PartiallyAffected when only some do. Throws UnknownElement for ids that
// are not assumptions.
WhatIfState refute_assumptions(const Labels& labels, const std::set<NodeId>& blocked);

}  // namespace dive
