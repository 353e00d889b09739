#pragma once

#include <cstdint>
#include <random>
#include <set>
#include <vector>

#include "dive/model.hpp"

namespace dive::testing {

struct RandomDoc {
  ProvDocument doc;
  std::set<NodeId> targets;
};

struct RandomDocLimits {
  int max_assumptions = 12;  // premises + agents + activities
  int max_nodes = 25;
};

// Valid, acyclic document with alternative derivations, shared inputs,
// attribution edges and a sprinkling of annotations. Deterministic per seed.
RandomDoc random_document(std::uint64_t seed, RandomDocLimits limits = {});

// The shared randomized corpus used by the property and acceptance suites.
std::vector<RandomDoc> random_corpus(std::size_t count, std::uint64_t base_seed = 20240601);

}  // namespace dive::testing
