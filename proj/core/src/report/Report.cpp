#include "sparqlog/report/Report.h"

#include <array>
#include <map>
#include <set>

#include "json.hpp"
#include "sparqlog/sparql/Views.h"

namespace sparqlog::report {

using reformulation::Element;
using reformulation::EventKind;
using reformulation::LocusPosition;
using reformulation::ReformulationEvent;
using sparql::BlockKind;

namespace {

std::string num(size_t n) { return std::to_string(n); }

size_t pairCount(const std::vector<corpus::Session>& sessions) {
  size_t n = 0;
  for (const auto& s : sessions) n += s.size() > 0 ? s.size() - 1 : 0;
  return n;
}

constexpr std::array<BlockKind, 10> kBlockKinds = {
    BlockKind::Main,  BlockKind::GraphTemplate, BlockKind::Union,
    BlockKind::Optional, BlockKind::Graph,       BlockKind::Service,
    BlockKind::Subquery, BlockKind::Minus,       BlockKind::Bind,
    BlockKind::Values};

std::set<sparql::BlockPath> blockPaths(const sparql::QueryAst& ast) {
  std::set<sparql::BlockPath> out;
  sparql::forEachBlock(ast, [&](const sparql::OperatorBlock&, const sparql::BlockPath& p) {
    out.insert(p);
  });
  return out;
}

// Valid (join kind, position) combinations in table order.
std::vector<std::pair<hypergraph::JoinKind, LocusPosition>> locusCells() {
  using hypergraph::JoinKind;
  return {{JoinKind::Star, LocusPosition::Center},
          {JoinKind::Star, LocusPosition::NeighborEdge},
          {JoinKind::Star, LocusPosition::NeighborNode},
          {JoinKind::Sink, LocusPosition::Center},
          {JoinKind::Sink, LocusPosition::NeighborEdge},
          {JoinKind::Sink, LocusPosition::NeighborNode},
          {JoinKind::Path, LocusPosition::Center},
          {JoinKind::Path, LocusPosition::NeighborEdge},
          {JoinKind::Hybrid, LocusPosition::Center},
          {JoinKind::Hybrid, LocusPosition::InEdge},
          {JoinKind::Hybrid, LocusPosition::InNode},
          {JoinKind::Hybrid, LocusPosition::OutEdge},
          {JoinKind::Hybrid, LocusPosition::OutNode}};
}

}  // namespace

Table operatorTable(const std::vector<corpus::Session>& sessions,
                    const std::vector<ReformulationEvent>& events) {
  std::map<sparql::OperatorTag, size_t> usage, removals, additions;
  size_t queries = 0;
  for (const auto& s : sessions) {
    for (const auto& q : s.queries) {
      ++queries;
      // Usage is presence per query.
      const auto inventory = sparql::operatorInventory(*q.ast);
      for (auto tag : std::set<sparql::OperatorTag>(inventory.begin(), inventory.end())) {
        ++usage[tag];
      }
    }
  }
  for (const auto& e : events) {
    if (!e.tag) continue;
    if (e.kind == EventKind::OperatorRemoved) ++removals[*e.tag];
    if (e.kind == EventKind::OperatorAdded) ++additions[*e.tag];
  }
  Table t({"operator", "queries", "usage", "usage_pct", "removals", "removal_pct",
           "additions", "addition_pct"});
  for (auto tag : sparql::kAllOperatorTags) {
    const size_t u = usage[tag];
    t.addRow({std::string(sparql::toString(tag)), num(queries), num(u), percent(u, queries),
              num(removals[tag]), percent(removals[tag], u), num(additions[tag]),
              percent(additions[tag], u)});
  }
  return t;
}

Table formChangeTable(const std::vector<corpus::Session>& sessions,
                      const std::vector<ReformulationEvent>& events) {
  std::map<std::pair<std::string, std::string>, size_t> counts;
  for (const auto& e : events) {
    if (e.kind != EventKind::FormChange) continue;
    ++counts[{std::string(sparql::toString(e.fromForm)),
              std::string(sparql::toString(e.toForm))}];
  }
  const size_t pairs = pairCount(sessions);
  Table t({"from", "to", "count", "pairs", "pct"});
  for (const auto& [k, n] : counts) {
    t.addRow({k.first, k.second, num(n), num(pairs), percent(n, pairs)});
  }
  return t;
}

Table tripleTable(const std::vector<corpus::Session>& sessions,
                  const std::vector<ReformulationEvent>& events) {
  struct Row {
    size_t shared = 0, added = 0, removed = 0, substituted = 0;
    size_t subject = 0, predicate = 0, object = 0, combined = 0;
  };
  std::map<BlockKind, Row> rows;
  for (const auto& s : sessions) {
    for (size_t i = 0; i + 1 < s.queries.size(); ++i) {
      auto p1 = blockPaths(*s.queries[i].ast);
      for (const auto& p : blockPaths(*s.queries[i + 1].ast)) {
        if (p1.count(p)) ++rows[p.back().first].shared;
      }
    }
  }
  for (const auto& e : events) {
    auto kind = e.blockKind();
    if (!kind) continue;
    auto& r = rows[*kind];
    switch (e.kind) {
      case EventKind::TripleAdded: ++r.added; break;
      case EventKind::TripleRemoved: ++r.removed; break;
      case EventKind::TripleSubstituted:
        ++r.substituted;
        for (auto el : e.elements) {
          if (el == Element::Subject) ++r.subject;
          if (el == Element::Predicate) ++r.predicate;
          if (el == Element::Object) ++r.object;
        }
        if (e.combined()) ++r.combined;
        break;
      default: break;
    }
  }
  Table t({"block", "shared_blocks", "changes", "added", "added_pct_blocks",
           "added_pct_changes", "removed", "removed_pct_blocks", "removed_pct_changes",
           "substituted", "substituted_pct_blocks", "substituted_pct_changes", "subject",
           "subject_pct", "predicate", "predicate_pct", "object", "object_pct", "combined",
           "combined_pct"});
  for (auto kind : kBlockKinds) {
    const Row& r = rows[kind];
    const size_t changes = r.added + r.removed + r.substituted;
    t.addRow({std::string(sparql::toString(kind)), num(r.shared), num(changes),
              num(r.added), percent(r.added, r.shared), percent(r.added, changes),
              num(r.removed), percent(r.removed, r.shared), percent(r.removed, changes),
              num(r.substituted), percent(r.substituted, r.shared),
              percent(r.substituted, changes), num(r.subject),
              percent(r.subject, r.substituted), num(r.predicate),
              percent(r.predicate, r.substituted), num(r.object),
              percent(r.object, r.substituted), num(r.combined),
              percent(r.combined, r.substituted)});
  }
  return t;
}

Table locusTable(const std::vector<ReformulationEvent>& events) {
  std::map<std::pair<hypergraph::JoinKind, LocusPosition>, size_t> counts;
  std::map<hypergraph::JoinKind, size_t> totals;
  for (const auto& e : events) {
    for (const auto& l : e.loci) {
      ++counts[{l.joinKind, l.position}];
      ++totals[l.joinKind];
    }
  }
  Table t({"join", "position", "count", "join_total", "pct"});
  for (const auto& cell : locusCells()) {
    const size_t n = counts[cell];
    const size_t total = totals[cell.first];
    t.addRow({std::string(hypergraph::toString(cell.first)),
              std::string(reformulation::toString(cell.second)), num(n), num(total),
              percent(n, total)});
  }
  return t;
}

Table filterTable(const std::vector<ReformulationEvent>& events) {
  size_t added = 0, removed = 0, block = 0, specific = 0;
  std::map<reformulation::FilterTypeTag, size_t> types;
  for (const auto& e : events) {
    switch (e.kind) {
      case EventKind::FilterAdded: ++added; break;
      case EventKind::FilterRemoved: ++removed; break;
      case EventKind::FilterBlockSubstitution: ++block; break;
      case EventKind::FilterSpecificSubstitution:
        ++specific;
        if (e.typeTag) ++types[*e.typeTag];
        break;
      default: break;
    }
  }
  const size_t all = added + removed + block + specific;
  const size_t subst = block + specific;
  Table t({"category", "item", "count", "denominator", "pct"});
  auto row = [&](const char* cat, std::string_view item, size_t n, size_t d) {
    t.addRow({cat, std::string(item), num(n), num(d), percent(n, d)});
  };
  row("change", "added", added, all);
  row("change", "removed", removed, all);
  row("change", "substituted", subst, all);
  row("substitution", "block", block, subst);
  row("substitution", "specific", specific, subst);
  for (auto tag : {reformulation::FilterTypeTag::Variable, reformulation::FilterTypeTag::Iri,
                   reformulation::FilterTypeTag::String,
                   reformulation::FilterTypeTag::Number}) {
    row("type", reformulation::toString(tag), types[tag], specific);
  }
  return t;
}

Table sessionLengthHistogram(const std::vector<corpus::Session>& sessions) {
  std::map<size_t, size_t> counts;
  size_t longest = 0;
  for (const auto& s : sessions) {
    ++counts[s.size()];
    longest = std::max(longest, s.size());
  }
  Table t({"length", "sessions", "total", "pct"});
  for (size_t len = 1; len <= longest; ++len) {
    t.addRow({num(len), num(counts[len]), num(sessions.size()),
              percent(counts[len], sessions.size())});
  }
  return t;
}

Table gedSeriesTable(const analytics::GedEvolvement& evolvement) {
  Table t({"series", "position", "mean", "variance", "support"});
  auto add = [&](const char* name, const analytics::PositionalSeries& s) {
    for (size_t i = 0; i < s.mean.size(); ++i) {
      t.addRow({name, num(i + 1), formatFixed(s.mean[i], 6), formatFixed(s.variance[i], 6),
                num(s.support[i])});
    }
  };
  add("contiguous", evolvement.contiguous);
  add("from_initial", evolvement.fromInitial);
  return t;
}

Table similarityTable(
    const std::vector<std::pair<analytics::SimilarityMetric, analytics::SessionMatrix>>&
        matrices) {
  Table t({"metric", "row", "col", "mean", "support"});
  for (const auto& [metric, m] : matrices) {
    for (size_t i = 0; i < m.size; ++i) {
      for (size_t j = 0; j < m.size; ++j) {
        t.addRow({std::string(analytics::toString(metric)), num(i + 1), num(j + 1),
                  formatFixed(m.at(i, j), 6), num(m.supportAt(i, j))});
      }
    }
  }
  return t;
}

Table markovTable(const std::optional<intent::TransitionMatrix>& matrix) {
  Table t({"from", "to", "count", "row_total", "probability"});
  for (auto from : intent::kAllRcStates) {
    const size_t i = static_cast<size_t>(from);
    uint64_t rowTotal = 0;
    if (matrix) {
      for (auto c : matrix->counts[i]) rowTotal += c;
    }
    for (auto to : intent::kAllRcStates) {
      const size_t j = static_cast<size_t>(to);
      std::string p;
      if (matrix && matrix->probabilities[i]) p = formatFixed((*matrix->probabilities[i])[j], 6);
      t.addRow({std::string(intent::toString(from)), std::string(intent::toString(to)),
                num(matrix ? matrix->counts[i][j] : 0), num(rowTotal), p});
    }
  }
  return t;
}

std::string markovJson(const std::optional<intent::TransitionMatrix>& matrix) {
  nlohmann::ordered_json j;
  auto states = nlohmann::ordered_json::array();
  for (auto s : intent::kAllRcStates) states.push_back(intent::toString(s));
  j["states"] = states;
  auto counts = nlohmann::ordered_json::array();
  auto probs = nlohmann::ordered_json::array();
  for (size_t i = 0; i < intent::kRcStateCount; ++i) {
    auto row = nlohmann::ordered_json::array();
    for (size_t k = 0; k < intent::kRcStateCount; ++k) {
      row.push_back(matrix ? matrix->counts[i][k] : 0);
    }
    counts.push_back(row);
    if (matrix && matrix->probabilities[i]) {
      probs.push_back(*matrix->probabilities[i]);
    } else {
      probs.push_back(nullptr);
    }
  }
  j["counts"] = counts;
  j["probabilities"] = probs;
  return j.dump(2) + "\n";
}

Table hmmParameterTable(const intent::HmmModel& model) {
  Table t({"matrix", "row", "col", "value"});
  auto state = [&](size_t i) {
    return model.numStates() == intent::kRcStateCount
               ? std::string(intent::toString(intent::kAllRcStates[i]))
               : num(i);
  };
  auto symbol = [&](size_t u) {
    return model.numSymbols() == intent::kSymbolCount
               ? std::string(intent::toString(intent::kAllSymbols[u]))
               : num(u);
  };
  for (size_t i = 0; i < model.numStates(); ++i) {
    t.addRow({"pi", state(i), "", formatFixed(model.pi[i], 9)});
  }
  for (size_t i = 0; i < model.numStates(); ++i) {
    for (size_t j = 0; j < model.numStates(); ++j) {
      t.addRow({"A", state(i), state(j), formatFixed(model.a[i][j], 9)});
    }
  }
  for (size_t i = 0; i < model.numStates(); ++i) {
    for (size_t u = 0; u < model.numSymbols(); ++u) {
      t.addRow({"B", state(i), symbol(u), formatFixed(model.b[i][u], 9)});
    }
  }
  return t;
}

std::vector<std::pair<std::string, std::string>> ReportBundle::files() const {
  return {{kArtifactNames[0], operatorTable.toCsv()},
          {kArtifactNames[1], tripleTable.toCsv()},
          {kArtifactNames[2], locusTable.toCsv()},
          {kArtifactNames[3], filterTable.toCsv()},
          {kArtifactNames[4], sessionLengthHistogram.toCsv()},
          {kArtifactNames[5], gedSeries.toCsv()},
          {kArtifactNames[6], similarityMatrices.toCsv()},
          {kArtifactNames[7], markovMatrix.toCsv()},
          {kArtifactNames[8], filterReport.toJson() + "\n"},
          {"form_changes.csv", formChanges.toCsv()}};
}

}  // namespace sparqlog::report
