#pragma once

#include <string>

#include "dive/propagate.hpp"

namespace dive {

// Graphviz rendering, laid out left to right with flow from sources toward
// the targets. Fill color runs red (0) to green (1) by confidence; refuted
// nodes are grey and dashed; partially affected nodes get a double border.
std::string export_dot(const Subgraph& subgraph, const WhatIfState& state,
                       const ConfidenceMap& confidence);

// "#rrggbb" on the red-green scale; confidence is clamped to [0,1].
std::string confidence_color(double confidence);

}  // namespace dive
