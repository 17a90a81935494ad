#include "sparqlog/hypergraph/Ged.h"

#include <algorithm>
#include <bit>
#include <numeric>
#include <queue>
#include <set>
#include <stdexcept>

namespace sparqlog::hypergraph {

namespace {

using Clock = std::chrono::steady_clock;

std::set<Hypergraph::Edge> edgeSet(const Hypergraph& g) {
  return {g.edges().begin(), g.edges().end()};
}

// g1 vertices in decreasing total degree, so edges are decided early.
std::vector<uint32_t> searchOrder(const Hypergraph& g) {
  auto in = g.inDegrees();
  auto out = g.outDegrees();
  auto pred = g.predicateDegrees();
  std::vector<uint32_t> order(g.numVertices());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](uint32_t a, uint32_t b) {
    return in[a] + out[a] + pred[a] > in[b] + out[b] + pred[b];
  });
  return order;
}

// Best-first search over partial mappings of g1 vertices (in `order_`) to g2
// vertices or deletion. The heuristic combines a label multiset bound for the
// undecided vertices and a bound on edges that can still be kept.
class AStar {
 public:
  AStar(const Hypergraph& g1, const Hypergraph& g2) : g1_(g1), g2_(g2) {
    if (g2.numVertices() > 64) {
      throw std::invalid_argument("exact GED supports at most 64 vertices");
    }
    n1_ = g1.numVertices();
    n2_ = g2.numVertices();
    order_ = searchOrder(g1);
    std::vector<uint32_t> depthOf(n1_);
    for (uint32_t d = 0; d < n1_; ++d) depthOf[order_[d]] = d;

    // Intern labels across both graphs.
    std::map<std::string, uint32_t> ids;
    auto intern = [&](const std::string& l) {
      return ids.try_emplace(l, static_cast<uint32_t>(ids.size())).first->second;
    };
    for (const auto& l : g1.labels()) label1_.push_back(intern(l));
    for (const auto& l : g2.labels()) label2_.push_back(intern(l));
    numLabels_ = ids.size();

    decidedAt_.assign(n1_, {});
    undecidedE1_.assign(n1_ + 1, 0);
    for (uint32_t e = 0; e < g1.numEdges(); ++e) {
      const auto& edge = g1.edges()[e];
      uint32_t last = std::max({depthOf[edge.subject], depthOf[edge.predicate],
                                depthOf[edge.object]});
      decidedAt_[last].push_back(e);
      for (uint32_t d = 0; d <= last; ++d) ++undecidedE1_[d];
    }
    for (const auto& edge : g2.edges()) {
      edgeMask2_.push_back((1ULL << edge.subject) | (1ULL << edge.predicate) |
                           (1ULL << edge.object));
    }
    edges2_ = edgeSet(g2);
    maxEdges_ = std::max(g1.numEdges(), g2.numEdges());
  }

  ExactSearchResult run(uint64_t upperBound, Clock::time_point deadline) {
    nodes_.clear();
    nodes_.push_back({-1, 0, -1, 0, 0, 0});
    std::priority_queue<Entry> open;
    open.push({bound(nodes_[0]), 0, 0});
    size_t expansions = 0;
    while (!open.empty()) {
      Entry top = open.top();
      open.pop();
      if (top.f >= upperBound) break;
      const Node node = nodes_[top.node];
      if (node.depth == n1_) return {top.f, true};
      if ((++expansions & 1023) == 0 &&
          (Clock::now() > deadline || nodes_.size() > kMaxNodes)) {
        return {upperBound, false};
      }
      std::vector<int32_t> map = mapping(top.node);
      uint32_t v = order_[node.depth];
      for (int32_t w = -1; w < static_cast<int32_t>(n2_); ++w) {
        if (w >= 0 && (node.used >> w) & 1) continue;
        Node child = node;
        child.parent = top.node;
        child.depth = node.depth + 1;
        child.target = w;
        if (w < 0) {
          child.vertexCost += 1;
        } else {
          child.used |= 1ULL << w;
          child.vertexCost += label1_[v] != label2_[w];
        }
        map[v] = w;
        for (uint32_t e : decidedAt_[node.depth]) {
          child.matched += kept(g1_.edges()[e], map);
        }
        uint64_t f = bound(child);
        if (f < upperBound) {
          nodes_.push_back(child);
          open.push({f, child.depth, nodes_.size() - 1});
        }
      }
      map[v] = -1;
    }
    return {upperBound, true};
  }

 private:
  static constexpr size_t kMaxNodes = 20'000'000;

  struct Node {
    int64_t parent;
    uint32_t depth;
    int32_t target;
    uint64_t used;
    uint64_t vertexCost;
    uint64_t matched;
  };
  struct Entry {
    uint64_t f;
    uint32_t depth;
    size_t node;
    // Smallest f first; among equals prefer deeper nodes.
    bool operator<(const Entry& o) const {
      if (f != o.f) return f > o.f;
      return depth < o.depth;
    }
  };

  std::vector<int32_t> mapping(size_t idx) const {
    std::vector<int32_t> map(n1_, -1);
    for (int64_t i = static_cast<int64_t>(idx); nodes_[i].parent >= 0;
         i = nodes_[i].parent) {
      map[order_[nodes_[i].depth - 1]] = nodes_[i].target;
    }
    return map;
  }

  bool kept(const Hypergraph::Edge& e, const std::vector<int32_t>& map) const {
    int32_t s = map[e.subject], p = map[e.predicate], o = map[e.object];
    if (s < 0 || p < 0 || o < 0) return false;
    return edges2_.count({static_cast<uint32_t>(s), static_cast<uint32_t>(p),
                          static_cast<uint32_t>(o)}) > 0;
  }

  uint64_t bound(const Node& n) const {
    std::vector<int> count(numLabels_, 0);
    for (uint32_t d = n.depth; d < n1_; ++d) ++count[label1_[order_[d]]];
    uint64_t r1 = n1_ - n.depth;
    uint64_t r2 = 0;
    uint64_t common = 0;
    for (uint32_t w = 0; w < n2_; ++w) {
      if ((n.used >> w) & 1) continue;
      ++r2;
      if (count[label2_[w]] > 0) {
        --count[label2_[w]];
        ++common;
      }
    }
    uint64_t vertexBound = std::max(r1, r2) - common;
    uint64_t open2 = 0;
    for (uint64_t m : edgeMask2_) open2 += (m & n.used) != m;
    uint64_t future = std::min<uint64_t>(undecidedE1_[n.depth], open2);
    uint64_t edgeBound = maxEdges_ - std::min(maxEdges_, n.matched + future);
    return n.vertexCost + vertexBound + edgeBound;
  }

  const Hypergraph& g1_;
  const Hypergraph& g2_;
  size_t n1_ = 0;
  size_t n2_ = 0;
  std::vector<uint32_t> order_;
  std::vector<uint32_t> label1_;
  std::vector<uint32_t> label2_;
  size_t numLabels_ = 0;
  std::vector<std::vector<uint32_t>> decidedAt_;
  std::vector<uint64_t> undecidedE1_;
  std::vector<uint64_t> edgeMask2_;
  std::set<Hypergraph::Edge> edges2_;
  uint64_t maxEdges_ = 0;
  std::vector<Node> nodes_;
};

std::vector<int32_t> greedyMapping(const Hypergraph& g1, const Hypergraph& g2) {
  auto in1 = g1.inDegrees(), out1 = g1.outDegrees(), p1 = g1.predicateDegrees();
  auto in2 = g2.inDegrees(), out2 = g2.outDegrees(), p2 = g2.predicateDegrees();
  auto diff = [](uint32_t a, uint32_t b) { return a > b ? a - b : b - a; };
  std::vector<int32_t> map(g1.numVertices(), -1);
  std::vector<bool> used(g2.numVertices(), false);
  for (uint32_t v : searchOrder(g1)) {
    int32_t best = -1;
    std::pair<uint32_t, uint32_t> bestKey{~0u, ~0u};
    for (uint32_t w = 0; w < g2.numVertices(); ++w) {
      if (used[w]) continue;
      std::pair<uint32_t, uint32_t> key{
          g1.labels()[v] != g2.labels()[w],
          diff(in1[v], in2[w]) + diff(out1[v], out2[w]) + diff(p1[v], p2[w])};
      if (key < bestKey) {
        bestKey = key;
        best = static_cast<int32_t>(w);
      }
    }
    if (best >= 0) used[best] = true;
    map[v] = best;
  }
  return map;
}

GedResult normalized(const Hypergraph& g1, const Hypergraph& g2, uint64_t raw,
                     bool exact) {
  GedResult r;
  r.rawCost = raw;
  r.exact = exact;
  r.normalizer = std::max(g1.numVertices() + g1.numEdges(),
                          g2.numVertices() + g2.numEdges());
  r.value = r.normalizer == 0
                ? 0.0
                : std::clamp(static_cast<double>(raw) / r.normalizer, 0.0, 1.0);
  return r;
}

}  // namespace

uint64_t mappingCost(const Hypergraph& g1, const Hypergraph& g2,
                     const std::vector<int32_t>& map) {
  uint64_t cost = 0;
  std::vector<bool> used(g2.numVertices(), false);
  for (uint32_t v = 0; v < g1.numVertices(); ++v) {
    if (map[v] < 0) {
      ++cost;
    } else {
      used[map[v]] = true;
      cost += g1.labels()[v] != g2.labels()[map[v]];
    }
  }
  cost += std::count(used.begin(), used.end(), false);
  auto edges2 = edgeSet(g2);
  uint64_t kept = 0;
  for (const auto& e : g1.edges()) {
    int32_t s = map[e.subject], p = map[e.predicate], o = map[e.object];
    if (s >= 0 && p >= 0 && o >= 0 &&
        edges2.count({static_cast<uint32_t>(s), static_cast<uint32_t>(p),
                      static_cast<uint32_t>(o)})) {
      ++kept;
    }
  }
  return cost + std::max(g1.numEdges(), g2.numEdges()) - kept;
}

uint64_t greedyGedCost(const Hypergraph& g1, const Hypergraph& g2) {
  return mappingCost(g1, g2, greedyMapping(g1, g2));
}

ExactSearchResult exactGedCost(const Hypergraph& g1, const Hypergraph& g2,
                               Clock::time_point deadline) {
  // The search succeeds if it beats the greedy cost; otherwise greedy was
  // optimal.
  uint64_t upper = greedyGedCost(g1, g2);
  AStar search(g1, g2);
  return search.run(upper, deadline);
}

GedResult ged(const Hypergraph& g1, const Hypergraph& g2,
              const GedOptions& options) {
  if (g1.empty() && g2.empty()) return normalized(g1, g2, 0, true);
  size_t limit = std::min<size_t>(options.exactSizeLimit, 64);
  if (std::max(g1.numVertices(), g2.numVertices()) <= limit) {
    auto deadline = Clock::now() + options.timeBudget;
    ExactSearchResult r = exactGedCost(g1, g2, deadline);
    return normalized(g1, g2, r.cost, r.completed);
  }
  return normalized(g1, g2, greedyGedCost(g1, g2), false);
}

GedResult queryGed(const sparql::QueryAst& a1, const sparql::QueryAst& a2,
                   const GedOptions& options) {
  auto h1 = buildHypergraphs(a1);
  auto h2 = buildHypergraphs(a2);
  std::set<sparql::BlockPath> paths;
  for (const auto& [p, g] : h1) paths.insert(p);
  for (const auto& [p, g] : h2) paths.insert(p);
  GedResult total;
  if (paths.empty()) return total;
  const Hypergraph empty;
  double sum = 0;
  for (const auto& p : paths) {
    auto i1 = h1.find(p);
    auto i2 = h2.find(p);
    GedResult r = ged(i1 == h1.end() ? empty : i1->second,
                      i2 == h2.end() ? empty : i2->second, options);
    sum += r.value;
    total.exact = total.exact && r.exact;
    total.rawCost += r.rawCost;
    total.normalizer += r.normalizer;
  }
  total.value = sum / static_cast<double>(paths.size());
  return total;
}

}  // namespace sparqlog::hypergraph
