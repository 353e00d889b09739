#include "dive/dot_export.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

namespace dive {

namespace {

std::string quote(const std::string& s) {
  std::string out = "\"";
  for (char c : s) {
    if (c == '"' || c == '\\') out += '\\';
    if (c == '\n') {
      out += "\\n";
      continue;
    }
    out += c;
  }
  return out + "\"";
}

const char* shape_of(NodeKind kind) {
  switch (kind) {
    case NodeKind::Entity: return "ellipse";
    case NodeKind::Activity: return "box";
    case NodeKind::Agent: return "house";
  }
  return "ellipse";
}

std::string format_confidence(double c) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%.2f", c);
  return buf;
}

}  // namespace

std::string confidence_color(double confidence) {
  double c = std::clamp(confidence, 0.0, 1.0);
  auto red = static_cast<int>(std::lround(220.0 * (1.0 - c) + 30.0 * c));
  auto green = static_cast<int>(std::lround(40.0 * (1.0 - c) + 170.0 * c));
  char buf[8];
  std::snprintf(buf, sizeof buf, "#%02x%02x%02x", red, green, 50);
  return buf;
}

std::string export_dot(const Subgraph& subgraph, const WhatIfState& state,
                       const ConfidenceMap& confidence) {
  std::ostringstream out;
  out << "digraph provenance {\n"
      << "  rankdir=LR;\n"
      << "  node [fontname=\"Helvetica\", fontsize=10];\n"
      << "  edge [fontname=\"Helvetica\", fontsize=8];\n";

  for (const auto& [id, node] : subgraph.nodes) {
    auto status_it = state.statuses.find(id);
    Status status = status_it == state.statuses.end() ? Status::Active : status_it->second;
    auto conf_it = confidence.values.find(id);

    std::string label = node.label.empty() ? id : node.label;
    std::string style = "filled";
    std::string fill = "#bbbbbb";
    std::string extra;
    if (status == Status::Refuted) {
      style = "filled,dashed";
      extra = ", fontcolor=\"#666666\"";
      label += "\n(refuted)";
    } else if (conf_it != confidence.values.end()) {
      fill = confidence_color(conf_it->second);
      label += "\n" + format_confidence(conf_it->second);
    }
    if (status == Status::PartiallyAffected) extra += ", peripheries=2";
    if (subgraph.targets.count(id)) extra += ", penwidth=2";

    out << "  " << quote(id) << " [label=" << quote(label)
        << ", shape=" << shape_of(node.kind) << ", style=\"" << style
        << "\", fillcolor=\"" << fill << "\", status=\"" << to_string(status) << "\""
        << extra << "];\n";
  }

  // PROV edges point upstream; draw them in the direction information flows.
  for (const auto& e : subgraph.edges)
    out << "  " << quote(e.to) << " -> " << quote(e.from)
        << " [label=" << quote(std::string(to_string(e.relation))) << "];\n";
  out << "}\n";
  return out.str();
}

}  // namespace dive
