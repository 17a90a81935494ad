#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "sparqlog/corpus/Types.h"
#include "sparqlog/hypergraph/Hypergraph.h"
#include "sparqlog/sparql/QueryAst.h"
#include "sparqlog/sparql/Views.h"

namespace sparqlog::reformulation {

enum class EventKind : uint8_t {
  FormChange,
  OperatorAdded,
  OperatorRemoved,
  TripleAdded,
  TripleRemoved,
  TripleSubstituted,
  FilterAdded,
  FilterRemoved,
  FilterBlockSubstitution,
  FilterSpecificSubstitution
};

enum class Element : uint8_t { Subject, Predicate, Object };

enum class LocusPosition : uint8_t {
  Center,
  NeighborEdge,
  NeighborNode,
  InEdge,
  InNode,
  OutEdge,
  OutNode
};

// Type tag of a specific FILTER substitution. Boolean constants count as
// strings.
enum class FilterTypeTag : uint8_t { Variable, Iri, String, Number };

struct SubstitutionLocus {
  hypergraph::JoinKind joinKind;
  LocusPosition position;
  bool operator==(const SubstitutionLocus&) const = default;
};

struct ReformulationEvent {
  explicit ReformulationEvent(EventKind k = EventKind::FormChange) : kind(k) {}

  EventKind kind;
  std::string sessionId;
  size_t pair = 0;

  // FormChange.
  sparql::QueryForm fromForm = sparql::QueryForm::Select;
  sparql::QueryForm toForm = sparql::QueryForm::Select;
  // OperatorAdded / OperatorRemoved.
  std::optional<sparql::OperatorTag> tag;
  // Triple and FILTER events: the block both queries share.
  std::optional<sparql::BlockPath> block;
  // TripleSubstituted: changed elements in subject, predicate, object order.
  std::vector<Element> elements;
  std::vector<SubstitutionLocus> loci;
  // FilterSpecificSubstitution.
  std::optional<FilterTypeTag> typeTag;
  // Triple events: the triple before and / or after the change.
  std::optional<sparql::TriplePattern> before;
  std::optional<sparql::TriplePattern> after;

  bool combined() const { return elements.size() > 1; }
  // Kind of the innermost block, if any.
  std::optional<sparql::BlockKind> blockKind() const;
  bool operator==(const ReformulationEvent&) const = default;
};

std::string_view toString(EventKind kind);
std::string_view toString(Element element);
std::string_view toString(LocusPosition position);
std::string_view toString(FilterTypeTag tag);
std::optional<EventKind> eventKindFromString(std::string_view s);

// Pairs triple patterns of two blocks; returns (index in first, index in
// second) pairs. Unpaired patterns count as removed / added.
using TripleMatcher = std::function<std::vector<std::pair<size_t, size_t>>(
    const std::vector<sparql::TriplePattern>&,
    const std::vector<sparql::TriplePattern>&)>;

// Greedy matching: exact matches first, then 2-of-3 element agreement, then
// 1-of-3 pairs that are each other's only remaining candidate. Ties go to the
// pair earliest in both documents. Pairs agreeing on nothing never match.
std::vector<std::pair<size_t, size_t>> greedyAgreementMatch(
    const std::vector<sparql::TriplePattern>& first,
    const std::vector<sparql::TriplePattern>& second);

std::vector<ReformulationEvent> diffOperators(const sparql::QueryAst& a1,
                                              const sparql::QueryAst& a2);

// Substitution events carry their loci in the first query's block graph.
std::vector<ReformulationEvent> diffTriples(
    const sparql::QueryAst& a1, const sparql::QueryAst& a2,
    const TripleMatcher& matcher = greedyAgreementMatch);

// Where on the join structure of `g1` the substitution `event` happened.
std::vector<SubstitutionLocus> localizeSubstitution(
    const ReformulationEvent& event, const hypergraph::Hypergraph& g1);

std::vector<ReformulationEvent> diffFilters(const sparql::QueryAst& a1,
                                            const sparql::QueryAst& a2);

// All events of one query pair: operators, triples, then FILTERs.
std::vector<ReformulationEvent> diffQueries(const sparql::QueryAst& a1,
                                            const sparql::QueryAst& a2);

// Events of every contiguous pair of a parsed session, tagged with the
// session id and the 0-based pair index.
std::vector<ReformulationEvent> pairEvents(const corpus::Session& session);

// One NDJSON line (no trailing newline) and its inverse. The before / after
// triples are not serialized.
std::string toJsonLine(const ReformulationEvent& event);
ReformulationEvent eventFromJsonLine(std::string_view line);

}  // namespace sparqlog::reformulation
