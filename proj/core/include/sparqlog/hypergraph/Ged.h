#pragma once

#include <chrono>
#include <cstdint>
#include <vector>

#include "sparqlog/hypergraph/Hypergraph.h"

namespace sparqlog::hypergraph {

struct GedOptions {
  // Exact search is used when both graphs have at most this many vertices.
  size_t exactSizeLimit = 8;
  // Wall-clock budget of one exact search; on expiry the greedy result is
  // returned with exact = false.
  std::chrono::milliseconds timeBudget{2000};
};

struct GedResult {
  double value = 0.0;  // normalized to [0, 1]
  bool exact = true;
  // Unnormalized edit cost and the normalizer it was divided by.
  uint64_t rawCost = 0;
  uint64_t normalizer = 0;
};

// Unit-cost edit cost of the vertex mapping `map` (map[v1] = v2 or -1 for
// deletion). Unmapped vertices of g2 are inserted. A hyperedge of g1 is kept
// iff the images of its three endpoints form a hyperedge of g2; remaining
// edges are substituted pairwise, then deleted or inserted.
uint64_t mappingCost(const Hypergraph& g1, const Hypergraph& g2,
                     const std::vector<int32_t>& map);

struct ExactSearchResult {
  uint64_t cost = 0;
  bool completed = true;
};

// Minimum edit cost by best-first search over vertex mappings. `completed` is
// false if the deadline expired first. Both graphs must have at most 64
// vertices.
ExactSearchResult exactGedCost(
    const Hypergraph& g1, const Hypergraph& g2,
    std::chrono::steady_clock::time_point deadline =
        std::chrono::steady_clock::time_point::max());

// Cost of a greedy mapping on (label, degree signature). Always an upper
// bound of the exact cost.
uint64_t greedyGedCost(const Hypergraph& g1, const Hypergraph& g2);

GedResult ged(const Hypergraph& g1, const Hypergraph& g2,
              const GedOptions& options = {});

// Mean block GED between two queries, blocks paired by their position in the
// block tree. A block with triples on one side only contributes 1.
GedResult queryGed(const sparql::QueryAst& a1, const sparql::QueryAst& a2,
                   const GedOptions& options = {});

}  // namespace sparqlog::hypergraph
