#pragma once

// Analytic-factor catalogs (agents, sources, source classes, operation
// classes), the environment-relative factor index, and element-level
// isolation / refutation that accept either node ids or factors.

#include <map>
#include <set>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "dive/tms.hpp"

namespace dive {

enum class FactorKind { Agent = 0, Source = 1, SourceClass = 2, OperationClass = 3 };

std::string_view to_string(FactorKind kind);  // "agent", "source", ...

struct FactorRef {
  FactorKind kind = FactorKind::Agent;
  std::string key;

  auto operator<=>(const FactorRef&) const = default;

  // Wire syntax "kind:key", e.g. "sourceClass:SELF-REPORT".
  std::string str() const;
};

// Either a node id or a factor. Text whose prefix before the first ':' names
// a factor kind is a FactorRef; "node:<id>" forces a node id; anything else
// is taken as a node id verbatim. A factor prefix with an empty key throws
// MalformedFactorRef.
using Element = std::variant<NodeId, FactorRef>;

Element parse_element(std::string_view text);
std::string to_string(const Element& element);

// Throws MalformedFactorRef unless text is "kind:key" with a known kind.
FactorRef parse_factor_ref(std::string_view text);

struct Catalog {
  std::set<FactorRef> agents;
  std::set<FactorRef> sources;
  std::set<FactorRef> source_classes;
  std::set<FactorRef> operation_classes;
  std::map<FactorRef, std::set<NodeId>> membership;

  bool contains(const FactorRef& f) const { return membership.count(f) > 0; }

  // Throws UnknownElement.
  const std::set<NodeId>& members(const FactorRef& f) const;

  // All factors sorted by kind then key.
  std::vector<FactorRef> all() const;
};

// Sources are premise entities grouped by sourceId; an untagged premise is
// its own source, keyed by its node id.
Catalog build_catalog(const Subgraph& subgraph);

struct FactorIndex {
  std::map<NodeId, std::set<FactorRef>> by_node;
  std::map<FactorRef, std::set<NodeId>> by_factor;
  // Per factor: number of (node, environment) pairs whose environment holds a
  // member of the factor.
  std::map<FactorRef, std::size_t> environment_mentions;
};

FactorIndex index_factors(const Labels& labels, const Catalog& catalog);

// Node ids an element stands for. Throws UnknownElement.
std::set<NodeId> resolve(const Element& element, const Labels& labels,
                         const Catalog& catalog);

struct ElementIsolation {
  IsolationView view;
  // Catalog factors with a member in the upstream closure of the focus.
  std::set<FactorRef> factors;
};

ElementIsolation isolate(const Labels& labels, const Catalog& catalog,
                         const Subgraph& subgraph, const Element& element);

// Disabling a factor disables its members that are assumptions. Node ids must
// name assumptions.
WhatIfState refute(const Labels& labels, const Catalog& catalog,
                   const std::vector<Element>& disabled);

}  // namespace dive
