#include "dive/analysis.hpp"

namespace dive {

Analysis Analysis::build(const ProvDocument& doc, const std::set<NodeId>& targets,
                         LabelOptions options) {
  Analysis a;
  a.subgraph = retrieve_upstream(doc, targets);
  a.graph = build_justifications(a.subgraph);
  a.labels = compute_labels(a.graph, options);
  a.catalog = build_catalog(a.subgraph);
  a.index = index_factors(a.labels, a.catalog);
  return a;
}

}  // namespace dive
