#include "sparqlog/hypergraph/Hypergraph.h"

namespace sparqlog::hypergraph {

using sparql::BlockPath;
using sparql::OperatorBlock;
using sparql::QueryAst;

uint32_t Hypergraph::addVertex(const std::string& label) {
  auto [it, inserted] =
      index_.try_emplace(label, static_cast<uint32_t>(labels_.size()));
  if (inserted) labels_.push_back(label);
  return it->second;
}

uint32_t Hypergraph::addEdge(const std::string& s, const std::string& p,
                             const std::string& o) {
  Edge e{addVertex(s), addVertex(p), addVertex(o)};
  for (size_t i = 0; i < edges_.size(); ++i) {
    if (edges_[i] == e) return static_cast<uint32_t>(i);
  }
  edges_.push_back(e);
  return static_cast<uint32_t>(edges_.size() - 1);
}

int64_t Hypergraph::findVertex(const std::string& label) const {
  auto it = index_.find(label);
  return it == index_.end() ? -1 : static_cast<int64_t>(it->second);
}

std::vector<uint32_t> Hypergraph::outDegrees() const {
  std::vector<uint32_t> d(labels_.size(), 0);
  for (const auto& e : edges_) ++d[e.subject];
  return d;
}

std::vector<uint32_t> Hypergraph::inDegrees() const {
  std::vector<uint32_t> d(labels_.size(), 0);
  for (const auto& e : edges_) ++d[e.object];
  return d;
}

std::vector<uint32_t> Hypergraph::predicateDegrees() const {
  std::vector<uint32_t> d(labels_.size(), 0);
  for (const auto& e : edges_) ++d[e.predicate];
  return d;
}

std::string vertexLabel(const sparql::Term& term) { return term.value; }

std::string vertexLabel(const sparql::PathExpr& path) {
  return path.isSimple() ? path.term.value : path.toString();
}

std::string_view toString(JoinKind kind) {
  switch (kind) {
    case JoinKind::Star: return "Star";
    case JoinKind::Sink: return "Sink";
    case JoinKind::Path: return "Path";
    case JoinKind::Hybrid: return "Hybrid";
  }
  return "?";
}

std::vector<JoinVertexInfo> joinVertices(const Hypergraph& g) {
  auto in = g.inDegrees();
  auto out = g.outDegrees();
  auto pred = g.predicateDegrees();
  std::vector<JoinVertexInfo> result;
  for (uint32_t v = 0; v < g.numVertices(); ++v) {
    if (in[v] + out[v] < 2) continue;
    JoinKind kind;
    if (in[v] == 0) {
      kind = JoinKind::Star;
    } else if (out[v] == 0) {
      kind = JoinKind::Sink;
    } else if (in[v] == 1 && out[v] == 1) {
      kind = JoinKind::Path;
    } else {
      kind = JoinKind::Hybrid;
    }
    result.push_back({v, kind, in[v], out[v], pred[v]});
  }
  return result;
}

Hypergraph blockHypergraph(const OperatorBlock& block) {
  Hypergraph g;
  for (const auto& tp : block.triplePatterns) {
    g.addEdge(vertexLabel(tp.subject), vertexLabel(tp.predicate),
              vertexLabel(tp.object));
  }
  return g;
}

std::map<BlockPath, Hypergraph> buildHypergraphs(const QueryAst& ast) {
  std::map<BlockPath, Hypergraph> result;
  sparql::forEachBlock(ast, [&](const OperatorBlock& b, const BlockPath& p) {
    if (!b.triplePatterns.empty()) result.emplace(p, blockHypergraph(b));
  });
  return result;
}

Hypergraph unionHypergraph(const QueryAst& ast) {
  Hypergraph g;
  sparql::forEachBlock(ast, [&](const OperatorBlock& b, const BlockPath&) {
    for (const auto& tp : b.triplePatterns) {
      g.addEdge(vertexLabel(tp.subject), vertexLabel(tp.predicate),
                vertexLabel(tp.object));
    }
  });
  return g;
}

}  // namespace sparqlog::hypergraph
