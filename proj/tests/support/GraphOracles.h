#pragma once

#include <algorithm>
#include <cstdint>
#include <random>
#include <set>
#include <string>
#include <tuple>
#include <vector>

#include "sparqlog/hypergraph/Hypergraph.h"

namespace sparqlog::testing {

// Random hypergraph with up to `maxVertices` distinct labels drawn from a
// small pool, so that two graphs share some labels.
inline hypergraph::Hypergraph randomHypergraph(std::mt19937_64& rng,
                                               size_t maxVertices,
                                               size_t maxEdges = 6) {
  static const char* kPool[] = {"?s", "?o", "?x", "?y", "<p>", "<q>",
                               "<r>", "<a>", "<b>", "\"l\""};
  std::vector<std::string> pool(std::begin(kPool), std::end(kPool));
  std::shuffle(pool.begin(), pool.end(), rng);
  size_t n = std::uniform_int_distribution<size_t>(
      0, std::min(maxVertices, pool.size()))(rng);
  hypergraph::Hypergraph g;
  for (size_t i = 0; i < n; ++i) g.addVertex(pool[i]);
  if (n == 0) return g;
  size_t m = std::uniform_int_distribution<size_t>(0, maxEdges)(rng);
  std::uniform_int_distribution<size_t> pick(0, n - 1);
  for (size_t i = 0; i < m; ++i) {
    g.addEdge(pool[pick(rng)], pool[pick(rng)], pool[pick(rng)]);
  }
  return g;
}

// Unit-cost edit cost of one vertex mapping, written independently of the
// library: kept edges are those whose endpoint images form an edge of g2;
// leftover edges pair up as substitutions, the rest are inserted or deleted.
inline uint64_t oracleMappingCost(const hypergraph::Hypergraph& g1,
                                  const hypergraph::Hypergraph& g2,
                                  const std::vector<int>& map) {
  uint64_t vertexCost = 0;
  std::vector<bool> hit(g2.numVertices(), false);
  for (size_t v = 0; v < map.size(); ++v) {
    if (map[v] < 0) {
      vertexCost += 1;
    } else {
      hit[map[v]] = true;
      if (g1.labels()[v] != g2.labels()[map[v]]) vertexCost += 1;
    }
  }
  for (bool h : hit) vertexCost += h ? 0 : 1;
  std::set<std::tuple<int, int, int>> target;
  for (const auto& e : g2.edges()) {
    target.emplace(e.subject, e.predicate, e.object);
  }
  uint64_t kept = 0;
  for (const auto& e : g1.edges()) {
    if (target.count({map[e.subject], map[e.predicate], map[e.object]})) ++kept;
  }
  uint64_t left1 = g1.numEdges() - kept;
  uint64_t left2 = g2.numEdges() - kept;
  return vertexCost + std::min(left1, left2) + (std::max(left1, left2) -
                                                std::min(left1, left2));
}

// Minimum over every injective partial mapping of g1 vertices into g2.
inline uint64_t bruteForceGed(const hypergraph::Hypergraph& g1,
                              const hypergraph::Hypergraph& g2) {
  std::vector<int> map(g1.numVertices(), -1);
  std::vector<bool> used(g2.numVertices(), false);
  uint64_t best = ~0ULL;
  auto rec = [&](auto&& self, size_t v) -> void {
    if (v == map.size()) {
      best = std::min(best, oracleMappingCost(g1, g2, map));
      return;
    }
    map[v] = -1;
    self(self, v + 1);
    for (size_t w = 0; w < used.size(); ++w) {
      if (used[w]) continue;
      used[w] = true;
      map[v] = static_cast<int>(w);
      self(self, v + 1);
      used[w] = false;
    }
    map[v] = -1;
  };
  rec(rec, 0);
  return best;
}

}  // namespace sparqlog::testing
