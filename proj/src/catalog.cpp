#include "dive/catalog.hpp"

#include <algorithm>

namespace dive {

std::string_view to_string(FactorKind kind) {
  switch (kind) {
    case FactorKind::Agent: return "agent";
    case FactorKind::Source: return "source";
    case FactorKind::SourceClass: return "sourceClass";
    case FactorKind::OperationClass: return "operationClass";
  }
  return "";
}

std::string FactorRef::str() const {
  return std::string(to_string(kind)) + ":" + key;
}

namespace {

std::optional<FactorKind> parse_factor_kind(std::string_view text) {
  for (auto k : {FactorKind::Agent, FactorKind::Source, FactorKind::SourceClass,
                 FactorKind::OperationClass})
    if (to_string(k) == text) return k;
  return std::nullopt;
}

}  // namespace

FactorRef parse_factor_ref(std::string_view text) {
  auto colon = text.find(':');
  if (colon == std::string_view::npos)
    throw Error(ErrorCode::MalformedFactorRef,
                "factor '" + std::string(text) + "' is not of the form kind:key");
  auto kind = parse_factor_kind(text.substr(0, colon));
  if (!kind)
    throw Error(ErrorCode::MalformedFactorRef,
                "unknown factor kind '" + std::string(text.substr(0, colon)) + "'");
  auto key = text.substr(colon + 1);
  if (key.empty())
    throw Error(ErrorCode::MalformedFactorRef,
                "factor '" + std::string(text) + "' has an empty key");
  return FactorRef{*kind, std::string(key)};
}

Element parse_element(std::string_view text) {
  if (text.empty()) throw Error(ErrorCode::MalformedFactorRef, "empty element");
  auto colon = text.find(':');
  if (colon != std::string_view::npos) {
    auto prefix = text.substr(0, colon);
    if (prefix == "node") {
      if (colon + 1 == text.size())
        throw Error(ErrorCode::MalformedFactorRef, "empty node id");
      return NodeId(text.substr(colon + 1));
    }
    if (parse_factor_kind(prefix)) return parse_factor_ref(text);
  }
  return NodeId(text);
}

std::string to_string(const Element& element) {
  if (const auto* f = std::get_if<FactorRef>(&element)) return f->str();
  return std::get<NodeId>(element);
}

const std::set<NodeId>& Catalog::members(const FactorRef& f) const {
  auto it = membership.find(f);
  if (it == membership.end())
    throw Error(ErrorCode::UnknownElement, "factor '" + f.str() + "' is not in the catalog",
                {f.str()});
  return it->second;
}

std::vector<FactorRef> Catalog::all() const {
  std::vector<FactorRef> out;
  out.reserve(membership.size());
  for (const auto& [f, _] : membership) out.push_back(f);
  return out;  // map order is kind then key
}

Catalog build_catalog(const Subgraph& subgraph) {
  std::set<NodeId> generated;
  for (const auto& e : subgraph.edges)
    if (e.relation == Relation::WasGeneratedBy) generated.insert(e.from);

  Catalog catalog;
  auto add = [&](std::set<FactorRef>& dimension, FactorRef f, const NodeId& member) {
    dimension.insert(f);
    catalog.membership[std::move(f)].insert(member);
  };

  for (const auto& [id, node] : subgraph.nodes) {
    switch (node.kind) {
      case NodeKind::Agent:
        add(catalog.agents, {FactorKind::Agent, id}, id);
        break;
      case NodeKind::Entity:
        if (!generated.count(id))
          add(catalog.sources, {FactorKind::Source, node.source_id.value_or(id)}, id);
        if (node.source_class)
          add(catalog.source_classes, {FactorKind::SourceClass, *node.source_class}, id);
        break;
      case NodeKind::Activity:
        if (node.operation_class)
          add(catalog.operation_classes,
              {FactorKind::OperationClass, *node.operation_class}, id);
        break;
    }
  }
  return catalog;
}

FactorIndex index_factors(const Labels& labels, const Catalog& catalog) {
  std::map<NodeId, std::set<FactorRef>> factors_of_member;
  for (const auto& [f, members] : catalog.membership)
    for (const auto& m : members) factors_of_member[m].insert(f);

  FactorIndex index;
  for (const auto& [f, _] : catalog.membership) {
    index.by_factor[f];
    index.environment_mentions[f] = 0;
  }
  for (const auto& [node, envs] : labels.all()) {
    auto& mine = index.by_node[node];
    for (const auto& env : envs) {
      std::set<FactorRef> in_env;
      for (const auto& member : env)
        if (auto it = factors_of_member.find(member); it != factors_of_member.end())
          in_env.insert(it->second.begin(), it->second.end());
      for (const auto& f : in_env) {
        ++index.environment_mentions[f];
        mine.insert(f);
      }
    }
    for (const auto& f : mine) index.by_factor[f].insert(node);
  }
  return index;
}

std::set<NodeId> resolve(const Element& element, const Labels& labels,
                         const Catalog& catalog) {
  if (const auto* f = std::get_if<FactorRef>(&element)) {
    const auto& members = catalog.members(*f);
    std::set<NodeId> out;
    for (const auto& m : members)
      if (labels.contains(m)) out.insert(m);
    if (out.empty())
      throw Error(ErrorCode::UnknownElement,
                  "factor '" + f->str() + "' has no members in scope", {f->str()});
    return out;
  }
  const auto& id = std::get<NodeId>(element);
  if (!labels.contains(id))
    throw Error(ErrorCode::UnknownElement, "unknown element '" + id + "'", {id});
  return {id};
}

ElementIsolation isolate(const Labels& labels, const Catalog& catalog,
                         const Subgraph& subgraph, const Element& element) {
  auto focus = resolve(element, labels, catalog);
  ElementIsolation result{isolate_nodes(labels, subgraph, focus), {}};

  auto upstream = upstream_closure(subgraph, focus);
  for (const auto& x : focus) {
    auto up = upstream_of(labels, x);
    upstream.insert(up.begin(), up.end());
  }
  for (const auto& [f, members] : catalog.membership)
    if (std::any_of(members.begin(), members.end(),
                    [&](const NodeId& m) { return upstream.count(m) > 0; }))
      result.factors.insert(f);
  return result;
}

WhatIfState refute(const Labels& labels, const Catalog& catalog,
                   const std::vector<Element>& disabled) {
  std::set<NodeId> blocked;
  for (const auto& element : disabled) {
    if (std::holds_alternative<FactorRef>(element)) {
      for (const auto& m : resolve(element, labels, catalog))
        if (labels.is_assumption(m)) blocked.insert(m);
    } else {
      const auto& id = std::get<NodeId>(element);
      if (!labels.contains(id))
        throw Error(ErrorCode::UnknownElement, "unknown element '" + id + "'", {id});
      blocked.insert(id);
    }
  }
  auto state = refute_assumptions(labels, blocked);
  state.disabled.clear();
  for (const auto& element : disabled) state.disabled.push_back(to_string(element));
  std::sort(state.disabled.begin(), state.disabled.end());
  state.disabled.erase(std::unique(state.disabled.begin(), state.disabled.end()),
                       state.disabled.end());
  return state;
}

}  // namespace dive
