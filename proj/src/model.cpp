#include "dive/model.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <unordered_map>

namespace dive {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::EmptyId: return "EmptyId";
    case ErrorCode::DuplicateId: return "DuplicateId";
    case ErrorCode::KindFieldMismatch: return "KindFieldMismatch";
    case ErrorCode::UnknownEndpoint: return "UnknownEndpoint";
    case ErrorCode::KindConstraintViolation: return "KindConstraintViolation";
    case ErrorCode::CycleIntroduced: return "CycleIntroduced";
    case ErrorCode::UnknownReference: return "UnknownReference";
    case ErrorCode::DuplicateAppraisal: return "DuplicateAppraisal";
    case ErrorCode::RangeError: return "RangeError";
    case ErrorCode::InvalidAnnotation: return "InvalidAnnotation";
    case ErrorCode::SyntaxError: return "SyntaxError";
    case ErrorCode::SchemaError: return "SchemaError";
    case ErrorCode::ValidationFailed: return "ValidationFailed";
    case ErrorCode::UnknownNode: return "UnknownNode";
    case ErrorCode::CyclicProvenance: return "CyclicProvenance";
    case ErrorCode::LabelExplosion: return "LabelExplosion";
    case ErrorCode::UnknownElement: return "UnknownElement";
    case ErrorCode::MalformedFactorRef: return "MalformedFactorRef";
    case ErrorCode::PreconditionViolated: return "PreconditionViolated";
    case ErrorCode::InconsistentState: return "InconsistentState";
    case ErrorCode::NotFound: return "NotFound";
    case ErrorCode::VersionConflict: return "VersionConflict";
    case ErrorCode::BadRequest: return "BadRequest";
    case ErrorCode::IoError: return "IoError";
  }
  return "Unknown";
}

std::string_view to_string(NodeKind kind) {
  switch (kind) {
    case NodeKind::Entity: return "Entity";
    case NodeKind::Activity: return "Activity";
    case NodeKind::Agent: return "Agent";
  }
  return "";
}

std::string_view to_string(Relation relation) {
  switch (relation) {
    case Relation::Used: return "used";
    case Relation::WasGeneratedBy: return "wasGeneratedBy";
    case Relation::WasAssociatedWith: return "wasAssociatedWith";
    case Relation::WasAttributedTo: return "wasAttributedTo";
  }
  return "";
}

std::string_view to_string(Polarity polarity) {
  return polarity == Polarity::Supporting ? "supporting" : "counter";
}

std::optional<NodeKind> parse_node_kind(std::string_view text) {
  for (auto kind : {NodeKind::Entity, NodeKind::Activity, NodeKind::Agent})
    if (to_string(kind) == text) return kind;
  return std::nullopt;
}

std::optional<Relation> parse_relation(std::string_view text) {
  for (auto r : {Relation::Used, Relation::WasGeneratedBy,
                 Relation::WasAssociatedWith, Relation::WasAttributedTo})
    if (to_string(r) == text) return r;
  return std::nullopt;
}

std::optional<Polarity> parse_polarity(std::string_view text) {
  if (text == "supporting") return Polarity::Supporting;
  if (text == "counter") return Polarity::Counter;
  return std::nullopt;
}

std::pair<NodeKind, NodeKind> endpoint_kinds(Relation relation) {
  switch (relation) {
    case Relation::Used: return {NodeKind::Activity, NodeKind::Entity};
    case Relation::WasGeneratedBy: return {NodeKind::Entity, NodeKind::Activity};
    case Relation::WasAssociatedWith: return {NodeKind::Activity, NodeKind::Agent};
    case Relation::WasAttributedTo: return {NodeKind::Entity, NodeKind::Agent};
  }
  return {NodeKind::Entity, NodeKind::Entity};
}

ProvNode make_entity(NodeId id, std::string label) {
  return ProvNode{std::move(id), NodeKind::Entity, std::move(label), {}, {}, {}, {}};
}

ProvNode make_activity(NodeId id, std::string label) {
  return ProvNode{std::move(id), NodeKind::Activity, std::move(label), {}, {}, {}, {}};
}

ProvNode make_agent(NodeId id, std::string label) {
  return ProvNode{std::move(id), NodeKind::Agent, std::move(label), {}, {}, {}, {}};
}

namespace {

bool in_unit_range(double v) { return std::isfinite(v) && v >= 0.0 && v <= 1.0; }

std::optional<Violation> kind_field_violation(const ProvNode& node) {
  if (node.kind != NodeKind::Entity && (node.source_class || node.source_id))
    return Violation{ErrorCode::KindFieldMismatch, {node.id},
                     "sourceClass/sourceId are only allowed on Entities, '" +
                         node.id + "' is an " + std::string(to_string(node.kind))};
  if (node.kind != NodeKind::Activity && node.operation_class)
    return Violation{ErrorCode::KindFieldMismatch, {node.id},
                     "operationClass is only allowed on Activities, '" +
                         node.id + "' is an " + std::string(to_string(node.kind))};
  return std::nullopt;
}

std::optional<Violation> edge_violation(
    const std::map<NodeId, ProvNode>& nodes, const ProvEdge& edge) {
  auto from = nodes.find(edge.from);
  auto to = nodes.find(edge.to);
  if (from == nodes.end() || to == nodes.end()) {
    std::vector<NodeId> missing;
    if (from == nodes.end()) missing.push_back(edge.from);
    if (to == nodes.end()) missing.push_back(edge.to);
    return Violation{ErrorCode::UnknownEndpoint, missing,
                     std::string(to_string(edge.relation)) + " edge " +
                         edge.from + " -> " + edge.to +
                         " references a missing node"};
  }
  auto [want_from, want_to] = endpoint_kinds(edge.relation);
  if (from->second.kind != want_from || to->second.kind != want_to)
    return Violation{ErrorCode::KindConstraintViolation,
                     {edge.from, edge.to},
                     std::string(to_string(edge.relation)) + " requires " +
                         std::string(to_string(want_from)) + " -> " +
                         std::string(to_string(want_to)) + ", got " +
                         std::string(to_string(from->second.kind)) + " -> " +
                         std::string(to_string(to->second.kind))};
  return std::nullopt;
}

using Adjacency = std::map<NodeId, std::vector<NodeId>>;

Adjacency derivation_adjacency(const std::set<ProvEdge>& edges) {
  Adjacency adj;
  for (const auto& e : edges)
    if (is_derivation(e.relation)) adj[e.from].push_back(e.to);
  return adj;
}

// Path start ... goal along adj, or empty.
std::vector<NodeId> find_path(const Adjacency& adj, const NodeId& start,
                              const NodeId& goal) {
  std::map<NodeId, NodeId> parent;
  std::vector<NodeId> stack{start};
  parent.emplace(start, start);
  while (!stack.empty()) {
    NodeId cur = stack.back();
    stack.pop_back();
    if (cur == goal) {
      std::vector<NodeId> path{cur};
      while (path.back() != start) path.push_back(parent.at(path.back()));
      std::reverse(path.begin(), path.end());
      return path;
    }
    auto it = adj.find(cur);
    if (it == adj.end()) continue;
    for (const auto& next : it->second)
      if (parent.emplace(next, cur).second) stack.push_back(next);
  }
  return {};
}

std::vector<NodeId> cycle_in(const Adjacency& adj) {
  enum class Mark { Fresh, OnStack, Done };
  std::map<NodeId, Mark> mark;
  std::vector<NodeId> trail;
  std::vector<NodeId> cycle;

  std::function<bool(const NodeId&)> visit = [&](const NodeId& n) {
    mark[n] = Mark::OnStack;
    trail.push_back(n);
    if (auto it = adj.find(n); it != adj.end()) {
      for (const auto& m : it->second) {
        auto state = mark.count(m) ? mark[m] : Mark::Fresh;
        if (state == Mark::OnStack) {
          auto begin = std::find(trail.begin(), trail.end(), m);
          cycle.assign(begin, trail.end());
          cycle.push_back(m);
          return true;
        }
        if (state == Mark::Fresh && visit(m)) return true;
      }
    }
    trail.pop_back();
    mark[n] = Mark::Done;
    return false;
  };

  for (const auto& [n, _] : adj)
    if (!mark.count(n) && visit(n)) return cycle;
  return {};
}

std::string cycle_text(const std::vector<NodeId>& cycle) {
  std::string out;
  for (size_t i = 0; i < cycle.size(); ++i) {
    if (i) out += " -> ";
    out += cycle[i];
  }
  return out;
}

void throw_if(std::optional<Violation> v) {
  if (v) throw Error(v->rule, v->message, v->ids);
}

// Reference checks shared by attach() and validate().
void check_reference(std::vector<Violation>& out,
                     const std::map<NodeId, ProvNode>& nodes,
                     const NodeId& annotation, const NodeId& ref,
                     std::string_view role, std::optional<NodeKind> kind) {
  auto it = nodes.find(ref);
  if (it == nodes.end()) {
    out.push_back({ErrorCode::UnknownReference, {annotation, ref},
                   "annotation '" + annotation + "' " + std::string(role) +
                       " '" + ref + "' does not exist"});
  } else if (kind && it->second.kind != *kind) {
    out.push_back({ErrorCode::UnknownReference, {annotation, ref},
                   "annotation '" + annotation + "' " + std::string(role) +
                       " '" + ref + "' must be an " +
                       std::string(to_string(*kind))});
  }
}

void check_range(std::vector<Violation>& out, const NodeId& annotation,
                 std::string_view field, double value) {
  if (!in_unit_range(value))
    out.push_back({ErrorCode::RangeError, {annotation},
                   "annotation '" + annotation + "' " + std::string(field) +
                       " = " + std::to_string(value) + " is outside [0,1]"});
}

std::vector<Violation> check(const std::map<NodeId, ProvNode>& nodes,
                             const Appraisal& a) {
  std::vector<Violation> out;
  check_reference(out, nodes, a.id, a.appraiser, "appraiser", NodeKind::Agent);
  check_reference(out, nodes, a.id, a.appraised, "appraised", std::nullopt);
  check_range(out, a.id, "confidence", a.confidence);
  if (a.likelihood) check_range(out, a.id, "likelihood", *a.likelihood);
  return out;
}

std::vector<Violation> check(const std::map<NodeId, ProvNode>& nodes,
                             const Evidence& e) {
  std::vector<Violation> out;
  check_reference(out, nodes, e.id, e.agent, "agent", NodeKind::Agent);
  check_reference(out, nodes, e.id, e.related, "related", NodeKind::Entity);
  check_reference(out, nodes, e.id, e.indicated, "indicated", NodeKind::Entity);
  if (e.related == e.indicated)
    out.push_back({ErrorCode::InvalidAnnotation, {e.id},
                   "evidence '" + e.id + "' relates an entity to itself"});
  if (e.strength) check_range(out, e.id, "strength", *e.strength);
  return out;
}

std::vector<Violation> check(const std::map<NodeId, ProvNode>& nodes,
                             const Preference& p) {
  std::vector<Violation> out;
  check_reference(out, nodes, p.id, p.agent, "agent", NodeKind::Agent);
  check_reference(out, nodes, p.id, p.preferred, "preferred", std::nullopt);
  check_reference(out, nodes, p.id, p.dispreferred, "dispreferred", std::nullopt);
  if (p.preferred == p.dispreferred) {
    out.push_back({ErrorCode::InvalidAnnotation, {p.id},
                   "preference '" + p.id + "' compares an element to itself"});
  } else {
    auto a = nodes.find(p.preferred);
    auto b = nodes.find(p.dispreferred);
    if (a != nodes.end() && b != nodes.end() && a->second.kind != b->second.kind)
      out.push_back({ErrorCode::InvalidAnnotation, {p.id},
                     "preference '" + p.id + "' compares elements of different kinds"});
  }
  return out;
}

std::vector<Violation> check(const std::map<NodeId, ProvNode>& nodes,
                             const Nexus& n) {
  std::vector<Violation> out;
  check_reference(out, nodes, n.id, n.agent, "agent", NodeKind::Agent);
  for (const auto& m : n.members)
    check_reference(out, nodes, n.id, m, "member", NodeKind::Entity);
  if (n.members.size() < 2)
    out.push_back({ErrorCode::InvalidAnnotation, {n.id},
                   "nexus '" + n.id + "' needs at least two members"});
  check_range(out, n.id, "jointLikelihood", n.joint_likelihood);
  return out;
}

void throw_first(const std::vector<Violation>& violations) {
  if (!violations.empty()) {
    const auto& v = violations.front();
    throw Error(v.rule, v.message, v.ids);
  }
}

}  // namespace

const ProvNode* ProvDocument::find_node(const NodeId& id) const {
  auto it = nodes_.find(id);
  return it == nodes_.end() ? nullptr : &it->second;
}

bool ProvDocument::has_id(const NodeId& id) const {
  return nodes_.count(id) || appraisals_.count(id) || evidence_.count(id) ||
         preferences_.count(id) || nexuses_.count(id);
}

void ProvDocument::check_new_id(const NodeId& id) const {
  if (id.empty()) throw Error(ErrorCode::EmptyId, "ids must be non-empty");
  if (has_id(id))
    throw Error(ErrorCode::DuplicateId, "id '" + id + "' already exists", {id});
}

void ProvDocument::add_node(ProvNode node) {
  check_new_id(node.id);
  throw_if(kind_field_violation(node));
  auto id = node.id;
  nodes_.emplace(std::move(id), std::move(node));
}

void ProvDocument::add_edge(ProvEdge edge) {
  throw_if(edge_violation(nodes_, edge));
  if (edges_.count(edge)) return;
  if (is_derivation(edge.relation)) {
    auto path = find_path(derivation_adjacency(edges_), edge.to, edge.from);
    if (!path.empty() || edge.from == edge.to) {
      std::vector<NodeId> cycle{edge.from};
      if (path.empty()) path.push_back(edge.to);
      cycle.insert(cycle.end(), path.begin(), path.end());
      throw Error(ErrorCode::CycleIntroduced,
                  "edge would close a derivation cycle: " + cycle_text(cycle),
                  cycle);
    }
  }
  edges_.insert(std::move(edge));
}

void ProvDocument::add_opaque_relation(OpaqueRelation relation) {
  if (relation.from.empty() || relation.to.empty() || relation.relation.empty())
    throw Error(ErrorCode::EmptyId, "opaque relation fields must be non-empty");
  opaque_relations_.insert(std::move(relation));
}

void ProvDocument::attach(Appraisal appraisal) {
  check_new_id(appraisal.id);
  throw_first(check(nodes_, appraisal));
  for (const auto& [_, other] : appraisals_)
    if (other.appraiser == appraisal.appraiser &&
        other.appraised == appraisal.appraised)
      throw Error(ErrorCode::DuplicateAppraisal,
                  "agent '" + appraisal.appraiser + "' already appraised '" +
                      appraisal.appraised + "' in '" + other.id + "'",
                  {other.id, appraisal.id});
  auto id = appraisal.id;
  appraisals_.emplace(std::move(id), std::move(appraisal));
}

void ProvDocument::attach(Evidence evidence) {
  check_new_id(evidence.id);
  throw_first(check(nodes_, evidence));
  auto id = evidence.id;
  evidence_.emplace(std::move(id), std::move(evidence));
}

void ProvDocument::attach(Preference preference) {
  check_new_id(preference.id);
  throw_first(check(nodes_, preference));
  auto id = preference.id;
  preferences_.emplace(std::move(id), std::move(preference));
}

void ProvDocument::attach(Nexus nexus) {
  check_new_id(nexus.id);
  throw_first(check(nodes_, nexus));
  auto id = nexus.id;
  nexuses_.emplace(std::move(id), std::move(nexus));
}

bool ProvDocument::insert_unchecked(ProvNode node) {
  auto id = node.id;
  return nodes_.emplace(std::move(id), std::move(node)).second;
}
bool ProvDocument::insert_unchecked(ProvEdge edge) {
  return edges_.insert(std::move(edge)).second;
}
bool ProvDocument::insert_unchecked(OpaqueRelation relation) {
  return opaque_relations_.insert(std::move(relation)).second;
}
bool ProvDocument::insert_unchecked(Appraisal appraisal) {
  auto id = appraisal.id;
  return appraisals_.emplace(std::move(id), std::move(appraisal)).second;
}
bool ProvDocument::insert_unchecked(Evidence evidence) {
  auto id = evidence.id;
  return evidence_.emplace(std::move(id), std::move(evidence)).second;
}
bool ProvDocument::insert_unchecked(Preference preference) {
  auto id = preference.id;
  return preferences_.emplace(std::move(id), std::move(preference)).second;
}
bool ProvDocument::insert_unchecked(Nexus nexus) {
  auto id = nexus.id;
  return nexuses_.emplace(std::move(id), std::move(nexus)).second;
}

std::vector<const Appraisal*> ProvDocument::appraisals_by(
    const NodeId& appraiser) const {
  std::vector<const Appraisal*> out;
  for (const auto& [_, a] : appraisals_)
    if (a.appraiser == appraiser) out.push_back(&a);
  return out;
}

std::vector<const Appraisal*> ProvDocument::appraisals_of(
    const NodeId& appraised) const {
  std::vector<const Appraisal*> out;
  for (const auto& [_, a] : appraisals_)
    if (a.appraised == appraised) out.push_back(&a);
  return out;
}

std::vector<const Evidence*> ProvDocument::evidence_involving(
    const NodeId& entity) const {
  std::vector<const Evidence*> out;
  for (const auto& [_, e] : evidence_)
    if (e.related == entity || e.indicated == entity) out.push_back(&e);
  return out;
}

std::vector<NodeId> find_derivation_cycle(const ProvDocument& doc) {
  return cycle_in(derivation_adjacency(doc.edges()));
}

std::vector<Violation> validate(const ProvDocument& doc) {
  std::vector<Violation> out;
  const auto& nodes = doc.nodes();

  // One id space across nodes and annotations.
  std::map<NodeId, int> seen;
  auto count_ids = [&](const auto& collection) {
    for (const auto& [id, _] : collection) ++seen[id];
  };
  count_ids(nodes);
  count_ids(doc.appraisals());
  count_ids(doc.evidence());
  count_ids(doc.preferences());
  count_ids(doc.nexuses());
  for (const auto& [id, n] : seen) {
    if (id.empty()) out.push_back({ErrorCode::EmptyId, {id}, "empty id"});
    if (n > 1)
      out.push_back({ErrorCode::DuplicateId, {id},
                     "id '" + id + "' is used by more than one element"});
  }

  for (const auto& [id, node] : nodes) {
    if (id != node.id)
      out.push_back({ErrorCode::SchemaError, {id}, "node key/id mismatch"});
    if (auto v = kind_field_violation(node)) out.push_back(*v);
  }

  for (const auto& edge : doc.edges())
    if (auto v = edge_violation(nodes, edge)) out.push_back(*v);

  if (auto cycle = find_derivation_cycle(doc); !cycle.empty())
    out.push_back({ErrorCode::CycleIntroduced, cycle,
                   "derivation cycle: " + cycle_text(cycle)});

  std::map<std::pair<NodeId, NodeId>, std::vector<NodeId>> appraisal_pairs;
  for (const auto& [id, a] : doc.appraisals()) {
    auto v = check(nodes, a);
    out.insert(out.end(), v.begin(), v.end());
    appraisal_pairs[{a.appraiser, a.appraised}].push_back(id);
  }
  for (const auto& [pair, ids] : appraisal_pairs)
    if (ids.size() > 1)
      out.push_back({ErrorCode::DuplicateAppraisal, ids,
                     "agent '" + pair.first + "' appraises '" + pair.second +
                         "' more than once"});

  for (const auto& [_, e] : doc.evidence()) {
    auto v = check(nodes, e);
    out.insert(out.end(), v.begin(), v.end());
  }
  for (const auto& [_, p] : doc.preferences()) {
    auto v = check(nodes, p);
    out.insert(out.end(), v.begin(), v.end());
  }
  for (const auto& [_, n] : doc.nexuses()) {
    auto v = check(nodes, n);
    out.insert(out.end(), v.begin(), v.end());
  }
  return out;
}

void require_valid(const ProvDocument& doc) {
  auto violations = validate(doc);
  if (violations.empty()) return;
  std::string message = "document has " + std::to_string(violations.size()) +
                        " violation(s); first: " + violations.front().message;
  throw Error(ErrorCode::ValidationFailed, std::move(message),
              std::move(violations));
}

}  // namespace dive
