#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <unordered_map>
#include <vector>

#include "sparqlog/sparql/QueryAst.h"

namespace sparqlog::hypergraph {

// Directed hypergraph of a basic graph pattern. Each triple pattern is a
// hyperedge from its subject (head) to the hypervertex (predicate, object).
// Vertices are identified by label; a property path is one vertex labelled
// with its canonical serialization.
class Hypergraph {
 public:
  struct Edge {
    uint32_t subject;
    uint32_t predicate;
    uint32_t object;
    bool operator==(const Edge&) const = default;
    auto operator<=>(const Edge&) const = default;
  };

  // Returns the index of the vertex with this label, adding it if needed.
  uint32_t addVertex(const std::string& label);
  // Adds the hyperedge unless an identical one exists. Returns its index.
  uint32_t addEdge(const std::string& s, const std::string& p,
                   const std::string& o);

  const std::vector<std::string>& labels() const { return labels_; }
  const std::vector<Edge>& edges() const { return edges_; }
  size_t numVertices() const { return labels_.size(); }
  size_t numEdges() const { return edges_.size(); }
  bool empty() const { return labels_.empty(); }
  // -1 when absent.
  int64_t findVertex(const std::string& label) const;

  // Per-vertex counts of edges using the vertex as head / object / predicate.
  std::vector<uint32_t> outDegrees() const;
  std::vector<uint32_t> inDegrees() const;
  std::vector<uint32_t> predicateDegrees() const;

 private:
  std::vector<std::string> labels_;
  std::unordered_map<std::string, uint32_t> index_;
  std::vector<Edge> edges_;
};

// The vertex label of a term or path in a hypergraph.
std::string vertexLabel(const sparql::Term& term);
std::string vertexLabel(const sparql::PathExpr& path);

enum class JoinKind : uint8_t { Star, Sink, Path, Hybrid };

std::string_view toString(JoinKind kind);

struct JoinVertexInfo {
  uint32_t vertex;
  JoinKind kind;
  uint32_t inDegree;
  uint32_t outDegree;
  // Edges that use this vertex as predicate. Not part of the degree.
  uint32_t predicateDegree;
  uint32_t degree() const { return inDegree + outDegree; }
};

// Vertices of total (in + out) degree at least two, in vertex order.
std::vector<JoinVertexInfo> joinVertices(const Hypergraph& g);

// Hypergraph of a single block's own triple patterns.
Hypergraph blockHypergraph(const sparql::OperatorBlock& block);

// One hypergraph per block with at least one triple pattern.
std::map<sparql::BlockPath, Hypergraph> buildHypergraphs(
    const sparql::QueryAst& ast);

// The union of all block hypergraphs of a query.
Hypergraph unionHypergraph(const sparql::QueryAst& ast);

}  // namespace sparqlog::hypergraph
