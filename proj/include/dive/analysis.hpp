#pragma once

#include <set>

#include "dive/catalog.hpp"

namespace dive {

// Everything derived from one document and target set: upstream subgraph,
// justifications, labels, catalog and factor index. Immutable once built.
struct Analysis {
  Subgraph subgraph;
  JustificationGraph graph;
  Labels labels;
  Catalog catalog;
  FactorIndex index;

  static Analysis build(const ProvDocument& doc, const std::set<NodeId>& targets,
                        LabelOptions options = {});
};

}  // namespace dive
