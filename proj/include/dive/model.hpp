#pragma once

// PROV subset (Entity / Activity / Agent with four relations) plus the DIVE
// annotation layer (Appraisal, Evidence, Preference, Nexus).

#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "dive/error.hpp"

namespace dive {

using NodeId = std::string;

enum class NodeKind { Entity, Activity, Agent };

enum class Relation { Used, WasGeneratedBy, WasAssociatedWith, WasAttributedTo };

enum class Polarity { Supporting, Counter };

std::string_view to_string(NodeKind kind);
std::string_view to_string(Relation relation);
std::string_view to_string(Polarity polarity);
std::optional<NodeKind> parse_node_kind(std::string_view text);
std::optional<Relation> parse_relation(std::string_view text);
std::optional<Polarity> parse_polarity(std::string_view text);

// Endpoint kinds required by a relation: {from kind, to kind}.
std::pair<NodeKind, NodeKind> endpoint_kinds(Relation relation);

// True for the relations that make up the derivation order
// (used, wasGeneratedBy), which must stay acyclic.
constexpr bool is_derivation(Relation relation) {
  return relation == Relation::Used || relation == Relation::WasGeneratedBy;
}

struct ProvNode {
  NodeId id;
  NodeKind kind = NodeKind::Entity;
  std::string label;
  std::map<std::string, std::string> attrs;
  std::optional<std::string> source_class;     // Entities only
  std::optional<std::string> source_id;        // Entities only
  std::optional<std::string> operation_class;  // Activities only

  bool operator==(const ProvNode&) const = default;
};

ProvNode make_entity(NodeId id, std::string label);
ProvNode make_activity(NodeId id, std::string label);
ProvNode make_agent(NodeId id, std::string label);

struct ProvEdge {
  NodeId from;
  NodeId to;
  Relation relation = Relation::Used;

  auto operator<=>(const ProvEdge&) const = default;
};

// A PROV relation outside the modeled subset. Kept so documents round-trip;
// reasoning ignores it.
struct OpaqueRelation {
  NodeId from;
  NodeId to;
  std::string relation;

  auto operator<=>(const OpaqueRelation&) const = default;
};

struct Appraisal {
  NodeId id;
  NodeId appraiser;
  NodeId appraised;
  double confidence = 0.0;
  std::optional<double> likelihood;
  std::optional<std::string> rationale;

  bool operator==(const Appraisal&) const = default;
};

struct Evidence {
  NodeId id;
  NodeId agent;
  NodeId related;
  NodeId indicated;
  Polarity polarity = Polarity::Supporting;
  std::optional<double> strength;

  bool operator==(const Evidence&) const = default;
};

struct Preference {
  NodeId id;
  NodeId agent;
  NodeId preferred;
  NodeId dispreferred;

  bool operator==(const Preference&) const = default;
};

struct Nexus {
  NodeId id;
  NodeId agent;
  std::set<NodeId> members;
  double joint_likelihood = 0.0;

  bool operator==(const Nexus&) const = default;
};

// A provenance document. Checked mutators enforce every invariant at the
// point of insertion and leave the document untouched when they throw. The
// insert_unchecked overloads exist for bulk loaders, which must call
// validate() afterwards.
class ProvDocument {
 public:
  void add_node(ProvNode node);
  void add_edge(ProvEdge edge);
  void add_opaque_relation(OpaqueRelation relation);
  void attach(Appraisal appraisal);
  void attach(Evidence evidence);
  void attach(Preference preference);
  void attach(Nexus nexus);

  // Returns false when the id/edge was already present.
  bool insert_unchecked(ProvNode node);
  bool insert_unchecked(ProvEdge edge);
  bool insert_unchecked(OpaqueRelation relation);
  bool insert_unchecked(Appraisal appraisal);
  bool insert_unchecked(Evidence evidence);
  bool insert_unchecked(Preference preference);
  bool insert_unchecked(Nexus nexus);

  const std::map<NodeId, ProvNode>& nodes() const { return nodes_; }
  const std::set<ProvEdge>& edges() const { return edges_; }
  const std::set<OpaqueRelation>& opaque_relations() const {
    return opaque_relations_;
  }
  const std::map<NodeId, Appraisal>& appraisals() const { return appraisals_; }
  const std::map<NodeId, Evidence>& evidence() const { return evidence_; }
  const std::map<NodeId, Preference>& preferences() const {
    return preferences_;
  }
  const std::map<NodeId, Nexus>& nexuses() const { return nexuses_; }

  const ProvNode* find_node(const NodeId& id) const;
  bool has_id(const NodeId& id) const;  // nodes and annotations share one id space

  std::vector<const Appraisal*> appraisals_by(const NodeId& appraiser) const;
  std::vector<const Appraisal*> appraisals_of(const NodeId& appraised) const;
  std::vector<const Evidence*> evidence_involving(const NodeId& entity) const;

  bool operator==(const ProvDocument&) const = default;

 private:
  void check_new_id(const NodeId& id) const;

  std::map<NodeId, ProvNode> nodes_;
  std::set<ProvEdge> edges_;
  std::set<OpaqueRelation> opaque_relations_;
  std::map<NodeId, Appraisal> appraisals_;
  std::map<NodeId, Evidence> evidence_;
  std::map<NodeId, Preference> preferences_;
  std::map<NodeId, Nexus> nexuses_;
};

// Every broken invariant in the document, in a deterministic order. Empty iff
// the document is well formed.
std::vector<Violation> validate(const ProvDocument& doc);

// Throws Error(ValidationFailed) carrying the violations, if any.
void require_valid(const ProvDocument& doc);

// Node sequence of one cycle in the derivation relations, first == last;
// empty when acyclic.
std::vector<NodeId> find_derivation_cycle(const ProvDocument& doc);

}  // namespace dive
