#include "dive/tms.hpp"

#include <algorithm>
#include <deque>
#include <functional>

namespace dive {

std::string_view to_string(AssumptionClass c) {
  switch (c) {
    case AssumptionClass::PremiseEntity: return "PremiseEntity";
    case AssumptionClass::Agent: return "Agent";
    case AssumptionClass::Activity: return "Activity";
  }
  return "";
}

std::string_view to_string(Status status) {
  switch (status) {
    case Status::Active: return "Active";
    case Status::PartiallyAffected: return "PartiallyAffected";
    case Status::Refuted: return "Refuted";
  }
  return "";
}

Subgraph retrieve_upstream(const ProvDocument& doc,
                           const std::set<NodeId>& targets) {
  std::map<NodeId, std::vector<NodeId>> upstream;
  for (const auto& e : doc.edges()) upstream[e.from].push_back(e.to);

  Subgraph sub;
  sub.targets = targets;
  std::deque<NodeId> queue;
  for (const auto& t : targets) {
    const auto* node = doc.find_node(t);
    if (!node) throw Error(ErrorCode::UnknownNode, "unknown target '" + t + "'", {t});
    if (sub.nodes.emplace(t, *node).second) queue.push_back(t);
  }
  while (!queue.empty()) {
    auto cur = std::move(queue.front());
    queue.pop_front();
    auto it = upstream.find(cur);
    if (it == upstream.end()) continue;
    for (const auto& next : it->second)
      if (sub.nodes.emplace(next, *doc.find_node(next)).second) queue.push_back(next);
  }
  for (const auto& e : doc.edges())
    if (sub.contains(e.from) && sub.contains(e.to)) sub.edges.insert(e);
  return sub;
}

std::vector<const Justification*> JustificationGraph::justifications_of(
    const NodeId& consequent) const {
  std::vector<const Justification*> out;
  auto it = std::lower_bound(
      justifications.begin(), justifications.end(), consequent,
      [](const Justification& j, const NodeId& c) { return j.consequent < c; });
  for (; it != justifications.end() && it->consequent == consequent; ++it)
    out.push_back(&*it);
  return out;
}

JustificationGraph build_justifications(const Subgraph& subgraph) {
  JustificationGraph graph;
  std::map<NodeId, std::vector<NodeId>> generators;  // entity -> activities

  for (const auto& [id, node] : subgraph.nodes)
    if (node.kind == NodeKind::Activity) graph.activity_inputs[id];
  for (const auto& e : subgraph.edges) {
    switch (e.relation) {
      case Relation::Used:
      case Relation::WasAssociatedWith:
        graph.activity_inputs[e.from].insert(e.to);
        break;
      case Relation::WasGeneratedBy:
        generators[e.from].push_back(e.to);
        break;
      case Relation::WasAttributedTo:
        break;
    }
  }

  for (const auto& [id, node] : subgraph.nodes) {
    switch (node.kind) {
      case NodeKind::Agent:
        graph.assumptions.emplace(id, AssumptionClass::Agent);
        break;
      case NodeKind::Activity:
        graph.assumptions.emplace(id, AssumptionClass::Activity);
        break;
      case NodeKind::Entity:
        if (!generators.count(id))
          graph.assumptions.emplace(id, AssumptionClass::PremiseEntity);
        break;
    }
  }

  for (const auto& [entity, activities] : generators)
    for (const auto& activity : activities)
      graph.justifications.push_back(
          Justification{entity, activity, graph.activity_inputs.at(activity)});
  std::sort(graph.justifications.begin(), graph.justifications.end());

  // Kahn's algorithm over "input feeds node" dependencies; ready nodes are
  // taken in id order so the result is deterministic.
  std::map<NodeId, std::vector<NodeId>> feeds;
  std::map<NodeId, std::size_t> pending;
  for (const auto& [id, _] : subgraph.nodes) pending[id] = 0;
  auto depend = [&](const NodeId& input, const NodeId& node) {
    feeds[input].push_back(node);
    ++pending[node];
  };
  for (const auto& [activity, inputs] : graph.activity_inputs)
    for (const auto& input : inputs) depend(input, activity);
  for (const auto& [entity, activities] : generators)
    for (const auto& activity : activities) depend(activity, entity);

  std::set<NodeId> ready;
  for (const auto& [id, n] : pending)
    if (n == 0) ready.insert(id);
  while (!ready.empty()) {
    auto cur = *ready.begin();
    ready.erase(ready.begin());
    graph.topological_order.push_back(cur);
    for (const auto& next : feeds[cur])
      if (--pending[next] == 0) ready.insert(next);
  }
  if (graph.topological_order.size() != subgraph.nodes.size()) {
    std::vector<NodeId> stuck;
    for (const auto& [id, n] : pending)
      if (n > 0) stuck.push_back(id);
    throw Error(ErrorCode::CyclicProvenance,
                "provenance contains a derivation cycle through " +
                    std::to_string(stuck.size()) + " node(s)",
                stuck);
  }
  return graph;
}

namespace {

using Env = std::vector<std::uint32_t>;

template <typename E>
bool is_subset(const E& small, const E& big) {
  return std::includes(big.begin(), big.end(), small.begin(), small.end());
}

template <typename E>
std::vector<E> minimize_impl(std::vector<E> envs) {
  std::sort(envs.begin(), envs.end(), [](const E& a, const E& b) {
    return a.size() != b.size() ? a.size() < b.size() : a < b;
  });
  envs.erase(std::unique(envs.begin(), envs.end()), envs.end());
  std::vector<E> kept;
  for (auto& env : envs) {
    bool dominated = std::any_of(kept.begin(), kept.end(), [&](const E& k) {
      return k.size() < env.size() && is_subset(k, env);
    });
    if (!dominated) kept.push_back(std::move(env));
  }
  std::sort(kept.begin(), kept.end());
  return kept;
}

Env merge(const Env& a, const Env& b) {
  Env out;
  out.reserve(a.size() + b.size());
  std::set_union(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
  return out;
}

std::uint64_t fnv1a(std::uint64_t h, std::string_view bytes) {
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ull;
  }
  h ^= 0xffu;  // separator
  h *= 1099511628211ull;
  return h;
}

}  // namespace

std::vector<Environment> minimize(std::vector<Environment> environments) {
  for (auto& env : environments) {
    std::sort(env.begin(), env.end());
    env.erase(std::unique(env.begin(), env.end()), env.end());
  }
  return minimize_impl(std::move(environments));
}

Labels::Labels(std::map<NodeId, std::vector<Environment>> environments,
               std::map<NodeId, AssumptionClass> assumptions)
    : environments_(std::move(environments)), assumptions_(std::move(assumptions)) {
  std::uint64_t h = 14695981039346656037ull;
  for (const auto& [id, c] : assumptions_) {
    h = fnv1a(h, id);
    h = fnv1a(h, to_string(c));
  }
  for (const auto& [id, envs] : environments_) {
    h = fnv1a(h, id);
    for (const auto& env : envs) {
      for (const auto& m : env) h = fnv1a(h, m);
      h = fnv1a(h, "|");
    }
  }
  fingerprint_ = h;
}

const std::vector<Environment>& Labels::of(const NodeId& node) const {
  auto it = environments_.find(node);
  if (it == environments_.end())
    throw Error(ErrorCode::UnknownNode, "no label for '" + node + "'", {node});
  return it->second;
}

Labels compute_labels(const JustificationGraph& graph, LabelOptions options) {
  // Assumption ids are interned in sorted order, so index order is id order
  // and lexicographic order on index vectors matches that on id vectors.
  std::vector<NodeId> names;
  std::map<NodeId, std::uint32_t> index;
  for (const auto& [id, _] : graph.assumptions) {
    index.emplace(id, static_cast<std::uint32_t>(names.size()));
    names.push_back(id);
  }

  const std::size_t cap = options.max_environments;
  const std::size_t raw_cap = std::max<std::size_t>(cap, 1) * 1000;
  auto check_cap = [&](const NodeId& node, std::size_t count, bool raw) {
    if (count > (raw ? raw_cap : cap))
      throw Error(ErrorCode::LabelExplosion,
                  "label of '" + node + "' exceeds " + std::to_string(cap) +
                      " environments",
                  {node});
  };

  std::map<NodeId, std::vector<NodeId>> generators;
  for (const auto& j : graph.justifications) generators[j.consequent].push_back(j.via);

  std::map<NodeId, std::vector<Env>> labels;
  std::set<NodeId> in_progress;

  // Depth-first with memoization; a node met again while its own label is
  // being built closes a cycle.
  std::function<const std::vector<Env>&(const NodeId&)> label_of =
      [&](const NodeId& node) -> const std::vector<Env>& {
    if (auto done = labels.find(node); done != labels.end()) return done->second;
    if (!in_progress.insert(node).second)
      throw Error(ErrorCode::CyclicProvenance,
                  "derivation cycle through '" + node + "'", {node});

    std::vector<Env> envs;
    auto assumption = graph.assumptions.find(node);
    if (assumption != graph.assumptions.end() &&
        assumption->second == AssumptionClass::Activity) {
      envs = {Env{index.at(node)}};
      if (auto inputs = graph.activity_inputs.find(node);
          inputs != graph.activity_inputs.end()) {
        for (const auto& input : inputs->second) {
          const auto& input_envs = label_of(input);
          check_cap(node, envs.size() * input_envs.size(), true);
          std::vector<Env> product;
          product.reserve(envs.size() * input_envs.size());
          for (const auto& a : envs)
            for (const auto& b : input_envs) product.push_back(merge(a, b));
          envs = minimize_impl(std::move(product));
          check_cap(node, envs.size(), false);
        }
      }
    } else if (assumption != graph.assumptions.end()) {
      envs = {Env{index.at(node)}};
    } else {
      auto gen = generators.find(node);
      if (gen == generators.end())
        throw Error(ErrorCode::UnknownNode,
                    "'" + node + "' is neither an assumption nor justified", {node});
      for (const auto& via : gen->second) {
        const auto& via_envs = label_of(via);
        envs.insert(envs.end(), via_envs.begin(), via_envs.end());
      }
      envs = minimize_impl(std::move(envs));
      check_cap(node, envs.size(), false);
    }
    in_progress.erase(node);
    return labels.emplace(node, std::move(envs)).first->second;
  };

  for (const auto& [id, _] : graph.assumptions) label_of(id);
  for (const auto& [id, _] : generators) label_of(id);

  std::map<NodeId, std::vector<Environment>> named;
  for (auto& [node, envs] : labels) {
    auto& out = named[node];
    out.reserve(envs.size());
    for (const auto& env : envs) {
      Environment e;
      e.reserve(env.size());
      for (auto i : env) e.push_back(names[i]);
      out.push_back(std::move(e));
    }
  }
  return Labels(std::move(named), graph.assumptions);
}

std::set<NodeId> upstream_of(const Labels& labels, const NodeId& node) {
  std::set<NodeId> out;
  for (const auto& env : labels.of(node)) out.insert(env.begin(), env.end());
  return out;
}

std::set<NodeId> downstream_of(const Labels& labels, const NodeId& node) {
  labels.of(node);  // throws UnknownNode
  std::set<NodeId> out{node};
  if (!labels.is_assumption(node)) return out;
  for (const auto& [n, envs] : labels.all())
    for (const auto& env : envs)
      if (std::binary_search(env.begin(), env.end(), node)) {
        out.insert(n);
        break;
      }
  return out;
}

std::set<NodeId> upstream_closure(const Subgraph& subgraph, const std::set<NodeId>& from) {
  std::map<NodeId, std::vector<NodeId>> up;
  for (const auto& e : subgraph.edges) up[e.from].push_back(e.to);
  std::set<NodeId> seen;
  std::vector<NodeId> stack(from.begin(), from.end());
  while (!stack.empty()) {
    auto cur = std::move(stack.back());
    stack.pop_back();
    if (!seen.insert(cur).second) continue;
    if (auto it = up.find(cur); it != up.end())
      for (const auto& next : it->second) stack.push_back(next);
  }
  return seen;
}

IsolationView isolate_nodes(const Labels& labels, const Subgraph& subgraph,
                            const std::set<NodeId>& focus) {
  IsolationView view;
  for (const auto& x : focus) {
    if (!labels.contains(x) || !subgraph.contains(x))
      throw Error(ErrorCode::UnknownElement, "cannot isolate unknown element '" + x + "'", {x});
    auto up = upstream_of(labels, x);
    auto down = downstream_of(labels, x);
    view.emphasized.insert(up.begin(), up.end());
    view.emphasized.insert(down.begin(), down.end());
  }
  auto closure = upstream_closure(subgraph, focus);
  view.emphasized.insert(closure.begin(), closure.end());
  for (const auto& [n, _] : subgraph.nodes)
    if (!view.emphasized.count(n)) view.deemphasized.insert(n);
  return view;
}

WhatIfState refute_assumptions(const Labels& labels, const std::set<NodeId>& blocked) {
  for (const auto& b : blocked)
    if (!labels.is_assumption(b))
      throw Error(ErrorCode::UnknownElement,
                  "'" + b + "' is not an assumption (premise entity, agent or activity)",
                  {b});

  WhatIfState state;
  state.blocked = blocked;
  state.labels_fingerprint = labels.fingerprint();
  for (const auto& b : blocked) state.disabled.push_back(b);
  for (const auto& [node, envs] : labels.all()) {
    std::size_t hit = 0;
    for (const auto& env : envs)
      if (std::any_of(env.begin(), env.end(),
                      [&](const NodeId& m) { return blocked.count(m) > 0; }))
        ++hit;
    Status s = Status::Active;
    if (blocked.count(node) || (hit == envs.size() && hit > 0))
      s = Status::Refuted;
    else if (hit > 0)
      s = Status::PartiallyAffected;
    state.statuses.emplace(node, s);
  }
  return state;
}

}  // namespace dive
