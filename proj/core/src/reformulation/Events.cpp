#include "sparqlog/reformulation/Events.h"

#include <algorithm>
#include <map>
#include <set>
#include <stdexcept>
#include <tuple>

#include "json.hpp"

namespace sparqlog::reformulation {

using hypergraph::Hypergraph;
using hypergraph::JoinKind;
using sparql::BlockPath;
using sparql::FilterNode;
using sparql::OperatorBlock;
using sparql::QueryAst;
using sparql::TriplePattern;

std::optional<sparql::BlockKind> ReformulationEvent::blockKind() const {
  if (!block || block->empty()) return std::nullopt;
  return block->back().first;
}

std::string_view toString(EventKind kind) {
  switch (kind) {
    case EventKind::FormChange: return "FormChange";
    case EventKind::OperatorAdded: return "OperatorAdded";
    case EventKind::OperatorRemoved: return "OperatorRemoved";
    case EventKind::TripleAdded: return "TripleAdded";
    case EventKind::TripleRemoved: return "TripleRemoved";
    case EventKind::TripleSubstituted: return "TripleSubstituted";
    case EventKind::FilterAdded: return "FilterAdded";
    case EventKind::FilterRemoved: return "FilterRemoved";
    case EventKind::FilterBlockSubstitution: return "FilterBlockSubstitution";
    case EventKind::FilterSpecificSubstitution:
      return "FilterSpecificSubstitution";
  }
  return "?";
}

std::optional<EventKind> eventKindFromString(std::string_view s) {
  for (uint8_t k = 0; k <= static_cast<uint8_t>(EventKind::FilterSpecificSubstitution);
       ++k) {
    if (toString(static_cast<EventKind>(k)) == s) {
      return static_cast<EventKind>(k);
    }
  }
  return std::nullopt;
}

std::string_view toString(Element element) {
  switch (element) {
    case Element::Subject: return "subject";
    case Element::Predicate: return "predicate";
    case Element::Object: return "object";
  }
  return "?";
}

std::string_view toString(LocusPosition position) {
  switch (position) {
    case LocusPosition::Center: return "center";
    case LocusPosition::NeighborEdge: return "neighborEdge";
    case LocusPosition::NeighborNode: return "neighborNode";
    case LocusPosition::InEdge: return "inEdge";
    case LocusPosition::InNode: return "inNode";
    case LocusPosition::OutEdge: return "outEdge";
    case LocusPosition::OutNode: return "outNode";
  }
  return "?";
}

std::string_view toString(FilterTypeTag tag) {
  switch (tag) {
    case FilterTypeTag::Variable: return "variable";
    case FilterTypeTag::Iri: return "iri";
    case FilterTypeTag::String: return "string";
    case FilterTypeTag::Number: return "number";
  }
  return "?";
}

namespace {

template <typename Enum, size_t N>
std::optional<Enum> enumFromString(std::string_view s) {
  for (size_t i = 0; i < N; ++i) {
    if (toString(static_cast<Enum>(i)) == s) return static_cast<Enum>(i);
  }
  return std::nullopt;
}

uint8_t agreement(const TriplePattern& a, const TriplePattern& b) {
  return (a.subject == b.subject) + (a.predicate == b.predicate) +
         (a.object == b.object);
}

std::string tripleText(const TriplePattern& t) {
  return t.subject.value + ' ' + t.predicate.toString() + ' ' + t.object.value;
}

// Blocks of a query by position, in document order.
std::vector<std::pair<BlockPath, const OperatorBlock*>> blocksOf(
    const QueryAst& ast) {
  std::vector<std::pair<BlockPath, const OperatorBlock*>> out;
  sparql::forEachBlock(ast, [&](const OperatorBlock& b, const BlockPath& p) {
    out.emplace_back(p, &b);
  });
  return out;
}

// Blocks present in both queries, in the first query's order.
std::vector<std::tuple<BlockPath, const OperatorBlock*, const OperatorBlock*>>
pairedBlocks(const QueryAst& a1, const QueryAst& a2) {
  std::map<BlockPath, const OperatorBlock*> second;
  for (auto& [p, b] : blocksOf(a2)) second.emplace(p, b);
  std::vector<std::tuple<BlockPath, const OperatorBlock*, const OperatorBlock*>>
      out;
  for (auto& [p, b] : blocksOf(a1)) {
    auto it = second.find(p);
    if (it != second.end()) out.emplace_back(p, b, it->second);
  }
  return out;
}

std::optional<FilterTypeTag> typeTagOf(const FilterNode& leaf) {
  switch (leaf.leafType()) {
    case FilterNode::LeafType::Variable: return FilterTypeTag::Variable;
    case FilterNode::LeafType::Iri: return FilterTypeTag::Iri;
    case FilterNode::LeafType::Number: return FilterTypeTag::Number;
    case FilterNode::LeafType::String:
    case FilterNode::LeafType::Boolean: return FilterTypeTag::String;
  }
  return std::nullopt;
}

std::string rootKey(const FilterNode& n) { return n.isLeaf ? "" : n.name; }

// Walks two aligned FILTER trees and records substitutions.
void walkFilters(const FilterNode& n1, const FilterNode& n2,
                 const ReformulationEvent& proto,
                 std::vector<ReformulationEvent>& out) {
  auto block = [&] {
    ReformulationEvent e = proto;
    e.kind = EventKind::FilterBlockSubstitution;
    out.push_back(std::move(e));
  };
  if (n1.isLeaf && n2.isLeaf) {
    if (n1.leaf == n2.leaf) return;
    auto t1 = typeTagOf(n1);
    auto t2 = typeTagOf(n2);
    if (t1 != t2) {
      block();
      return;
    }
    ReformulationEvent e = proto;
    e.kind = EventKind::FilterSpecificSubstitution;
    e.typeTag = t1;
    out.push_back(std::move(e));
    return;
  }
  if (n1.isLeaf != n2.isLeaf || n1.name != n2.name ||
      n1.args.size() != n2.args.size()) {
    block();
    return;
  }
  if (n1.group || n2.group) {
    if (!n1.group || !n2.group || !(*n1.group == *n2.group)) block();
    return;
  }
  for (size_t i = 0; i < n1.args.size(); ++i) {
    walkFilters(n1.args[i], n2.args[i], proto, out);
  }
}

}  // namespace

std::vector<std::pair<size_t, size_t>> greedyAgreementMatch(
    const std::vector<TriplePattern>& first,
    const std::vector<TriplePattern>& second) {
  size_t n1 = first.size(), n2 = second.size();
  std::vector<std::vector<uint8_t>> agree(n1, std::vector<uint8_t>(n2));
  for (size_t i = 0; i < n1; ++i) {
    for (size_t j = 0; j < n2; ++j) agree[i][j] = agreement(first[i], second[j]);
  }
  std::vector<std::string> text1, text2;
  for (const auto& t : first) text1.push_back(tripleText(t));
  for (const auto& t : second) text2.push_back(tripleText(t));

  std::vector<bool> used1(n1, false), used2(n2, false);
  std::vector<std::pair<size_t, size_t>> result;
  auto take = [&](size_t i, size_t j) {
    used1[i] = used2[j] = true;
    result.emplace_back(i, j);
  };

  // Pairs at one agreement level, earliest in both documents first. The
  // text tie-break keeps the matching independent of argument order.
  for (uint8_t level : {3, 2}) {
    std::vector<std::pair<size_t, size_t>> candidates;
    for (size_t i = 0; i < n1; ++i) {
      for (size_t j = 0; j < n2; ++j) {
        if (agree[i][j] == level) candidates.emplace_back(i, j);
      }
    }
    auto key = [&](const std::pair<size_t, size_t>& p) {
      const auto& a = text1[p.first];
      const auto& b = text2[p.second];
      return std::make_tuple(p.first + p.second, std::min(a, b), std::max(a, b),
                             std::min(p.first, p.second));
    };
    std::stable_sort(candidates.begin(), candidates.end(),
                     [&](const auto& x, const auto& y) { return key(x) < key(y); });
    for (auto [i, j] : candidates) {
      if (!used1[i] && !used2[j]) take(i, j);
    }
  }

  // 1-of-3 pairs that are mutually unique candidates.
  for (bool changed = true; changed;) {
    changed = false;
    for (size_t i = 0; i < n1; ++i) {
      if (used1[i]) continue;
      std::optional<size_t> only;
      size_t count = 0;
      for (size_t j = 0; j < n2; ++j) {
        if (!used2[j] && agree[i][j] == 1) {
          only = j;
          ++count;
        }
      }
      if (count != 1) continue;
      size_t back = 0;
      for (size_t k = 0; k < n1; ++k) {
        back += !used1[k] && agree[k][*only] == 1;
      }
      if (back != 1) continue;
      take(i, *only);
      changed = true;
    }
  }
  std::sort(result.begin(), result.end());
  return result;
}

std::vector<ReformulationEvent> diffOperators(const QueryAst& a1,
                                              const QueryAst& a2) {
  std::vector<ReformulationEvent> out;
  if (a1.form != a2.form) {
    ReformulationEvent e{EventKind::FormChange};
    e.fromForm = a1.form;
    e.toForm = a2.form;
    out.push_back(std::move(e));
  }
  auto inv1 = sparql::operatorInventory(a1);
  auto inv2 = sparql::operatorInventory(a2);
  for (auto tag : sparql::kAllOperatorTags) {
    bool in1 = inv1.count(tag) > 0;
    bool in2 = inv2.count(tag) > 0;
    if (in1 == in2) continue;
    ReformulationEvent e{in1 ? EventKind::OperatorRemoved
                             : EventKind::OperatorAdded};
    e.tag = tag;
    out.push_back(std::move(e));
  }
  return out;
}

std::vector<ReformulationEvent> diffTriples(const QueryAst& a1,
                                            const QueryAst& a2,
                                            const TripleMatcher& matcher) {
  std::vector<ReformulationEvent> out;
  for (const auto& [path, b1, b2] : pairedBlocks(a1, a2)) {
    const auto& t1 = b1->triplePatterns;
    const auto& t2 = b2->triplePatterns;
    auto pairs = matcher(t1, t2);
    std::vector<bool> matched1(t1.size(), false), matched2(t2.size(), false);
    std::optional<Hypergraph> g1;
    for (auto [i, j] : pairs) {
      matched1[i] = matched2[j] = true;
      ReformulationEvent e{EventKind::TripleSubstituted};
      if (t1[i].subject != t2[j].subject) e.elements.push_back(Element::Subject);
      if (!(t1[i].predicate == t2[j].predicate)) {
        e.elements.push_back(Element::Predicate);
      }
      if (t1[i].object != t2[j].object) e.elements.push_back(Element::Object);
      if (e.elements.empty()) continue;
      e.block = path;
      e.before = t1[i];
      e.after = t2[j];
      if (!g1) g1 = hypergraph::blockHypergraph(*b1);
      e.loci = localizeSubstitution(e, *g1);
      out.push_back(std::move(e));
    }
    for (size_t i = 0; i < t1.size(); ++i) {
      if (matched1[i]) continue;
      ReformulationEvent e{EventKind::TripleRemoved};
      e.block = path;
      e.before = t1[i];
      out.push_back(std::move(e));
    }
    for (size_t j = 0; j < t2.size(); ++j) {
      if (matched2[j]) continue;
      ReformulationEvent e{EventKind::TripleAdded};
      e.block = path;
      e.after = t2[j];
      out.push_back(std::move(e));
    }
  }
  return out;
}

std::vector<SubstitutionLocus> localizeSubstitution(
    const ReformulationEvent& event, const Hypergraph& g1) {
  std::vector<SubstitutionLocus> loci;
  if (event.kind != EventKind::TripleSubstituted || !event.before) return loci;
  const TriplePattern& t = *event.before;
  int64_t s = g1.findVertex(hypergraph::vertexLabel(t.subject));
  int64_t o = g1.findVertex(hypergraph::vertexLabel(t.object));
  if (s < 0 || o < 0) return loci;

  std::map<uint32_t, JoinKind> join;
  for (const auto& j : hypergraph::joinVertices(g1)) join[j.vertex] = j.kind;
  auto joinKind = [&](int64_t v) -> std::optional<JoinKind> {
    auto it = join.find(static_cast<uint32_t>(v));
    if (it == join.end()) return std::nullopt;
    return it->second;
  };
  auto add = [&](JoinKind kind, LocusPosition generic, LocusPosition hybrid) {
    if (kind == JoinKind::Hybrid) {
      loci.push_back({kind, hybrid});
    } else if (kind == JoinKind::Path &&
               generic == LocusPosition::NeighborNode) {
      return;
    } else {
      loci.push_back({kind, generic});
    }
  };

  for (Element el : event.elements) {
    switch (el) {
      case Element::Subject:
        if (auto k = joinKind(s)) {
          loci.push_back({*k, LocusPosition::Center});
        } else if (auto ko = joinKind(o)) {
          // The head of an edge entering the join vertex.
          add(*ko, LocusPosition::NeighborNode, LocusPosition::InNode);
        }
        break;
      case Element::Object:
        if (auto k = joinKind(o)) {
          loci.push_back({*k, LocusPosition::Center});
        } else if (auto ks = joinKind(s)) {
          add(*ks, LocusPosition::NeighborNode, LocusPosition::OutNode);
        }
        break;
      case Element::Predicate:
        if (auto ks = joinKind(s)) {
          add(*ks, LocusPosition::NeighborEdge, LocusPosition::OutEdge);
        }
        if (o != s) {
          if (auto ko = joinKind(o)) {
            add(*ko, LocusPosition::NeighborEdge, LocusPosition::InEdge);
          }
        }
        break;
    }
  }
  return loci;
}

std::vector<ReformulationEvent> diffFilters(const QueryAst& a1,
                                            const QueryAst& a2) {
  std::vector<ReformulationEvent> out;
  for (const auto& [path, b1, b2] : pairedBlocks(a1, a2)) {
    const auto& f1 = b1->filters;
    const auto& f2 = b2->filters;
    // The k-th FILTER with a given root operator pairs with the k-th one of
    // the other query.
    std::map<std::string, std::vector<size_t>> byRoot2;
    for (size_t j = 0; j < f2.size(); ++j) byRoot2[rootKey(f2[j].root)].push_back(j);
    std::map<std::string, size_t> seen;
    std::vector<bool> paired2(f2.size(), false);
    ReformulationEvent proto{EventKind::FilterAdded};
    proto.block = path;
    for (const auto& f : f1) {
      std::string key = rootKey(f.root);
      size_t k = seen[key]++;
      auto it = byRoot2.find(key);
      if (it != byRoot2.end() && k < it->second.size()) {
        size_t j = it->second[k];
        paired2[j] = true;
        walkFilters(f.root, f2[j].root, proto, out);
      } else {
        ReformulationEvent e = proto;
        e.kind = EventKind::FilterRemoved;
        out.push_back(std::move(e));
      }
    }
    for (size_t j = 0; j < f2.size(); ++j) {
      if (!paired2[j]) out.push_back(proto);
    }
  }
  return out;
}

std::vector<ReformulationEvent> diffQueries(const QueryAst& a1,
                                            const QueryAst& a2) {
  auto out = diffOperators(a1, a2);
  auto triples = diffTriples(a1, a2);
  auto filters = diffFilters(a1, a2);
  out.insert(out.end(), triples.begin(), triples.end());
  out.insert(out.end(), filters.begin(), filters.end());
  return out;
}

std::vector<ReformulationEvent> pairEvents(const corpus::Session& session) {
  std::vector<ReformulationEvent> out;
  const auto& q = session.queries;
  for (size_t i = 0; i + 1 < q.size(); ++i) {
    if (!q[i].ast || !q[i + 1].ast) continue;
    for (auto& e : diffQueries(*q[i].ast, *q[i + 1].ast)) {
      e.sessionId = session.sessionId;
      e.pair = i;
      out.push_back(std::move(e));
    }
  }
  return out;
}

std::string toJsonLine(const ReformulationEvent& e) {
  using Json = nlohmann::ordered_json;
  Json j;
  j["session"] = e.sessionId;
  j["pair"] = e.pair;
  j["kind"] = toString(e.kind);
  j["block"] = e.block ? Json(sparql::toString(*e.block)) : Json(nullptr);
  Json elements = Json::array();
  for (Element el : e.elements) elements.push_back(toString(el));
  j["elements"] = elements;
  Json locus = Json::array();
  for (const auto& l : e.loci) {
    locus.push_back(
        {{"join", hypergraph::toString(l.joinKind)}, {"position", toString(l.position)}});
  }
  j["locus"] = locus;
  j["typeTag"] = e.typeTag ? Json(toString(*e.typeTag)) : Json(nullptr);
  j["tag"] = e.tag ? Json(sparql::toString(*e.tag)) : Json(nullptr);
  if (e.kind == EventKind::FormChange) {
    j["from"] = sparql::toString(e.fromForm);
    j["to"] = sparql::toString(e.toForm);
  } else {
    j["from"] = nullptr;
    j["to"] = nullptr;
  }
  return j.dump();
}

ReformulationEvent eventFromJsonLine(std::string_view line) {
  auto bad = [](const std::string& what) {
    return std::invalid_argument("malformed event: " + what);
  };
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(line);
  } catch (const nlohmann::json::exception& ex) {
    throw bad(ex.what());
  }
  auto kind = eventKindFromString(j.value("kind", ""));
  if (!kind) throw bad("kind");
  ReformulationEvent e{*kind};
  e.sessionId = j.value("session", "");
  e.pair = j.value("pair", size_t{0});
  if (j.contains("block") && j["block"].is_string()) {
    e.block = sparql::blockPathFromString(j["block"].get<std::string>());
    if (!e.block) throw bad("block");
  }
  for (const auto& el : j.value("elements", nlohmann::json::array())) {
    auto v = enumFromString<Element, 3>(el.get<std::string>());
    if (!v) throw bad("element");
    e.elements.push_back(*v);
  }
  for (const auto& l : j.value("locus", nlohmann::json::array())) {
    auto k = enumFromString<JoinKind, 4>(l.at("join").get<std::string>());
    auto p = enumFromString<LocusPosition, 7>(l.at("position").get<std::string>());
    if (!k || !p) throw bad("locus");
    e.loci.push_back({*k, *p});
  }
  if (j.contains("typeTag") && j["typeTag"].is_string()) {
    e.typeTag = enumFromString<FilterTypeTag, 4>(j["typeTag"].get<std::string>());
    if (!e.typeTag) throw bad("typeTag");
  }
  if (j.contains("tag") && j["tag"].is_string()) {
    e.tag = sparql::operatorTagFromString(j["tag"].get<std::string>());
    if (!e.tag) throw bad("tag");
  }
  if (e.kind == EventKind::FormChange) {
    auto from = sparql::queryFormFromString(j.value("from", ""));
    auto to = sparql::queryFormFromString(j.value("to", ""));
    if (!from || !to) throw bad("form");
    e.fromForm = *from;
    e.toForm = *to;
  }
  return e;
}

}  // namespace sparqlog::reformulation
