#pragma once

#include <array>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>

#include "sparqlog/sparql/QueryAst.h"

namespace sparqlog::sparql {

// The query with every IRI, literal and variable replaced by a positional
// placeholder. Queries that differ only in those terms share a template.
struct QueryTemplate {
  std::string canonicalText;
  bool operator==(const QueryTemplate&) const = default;
};

QueryTemplate templateOf(const QueryAst& ast);

// The operator census used for usage / addition / removal statistics.
enum class OperatorTag : uint8_t {
  Filter,
  Union,
  Optional,
  Graph,
  Bind,
  Minus,
  Service,
  Values,
  SeqPath,
  MulPath,
  AltPath,
  InvPath,
  Projection,
  Count,
  Sample,
  GroupConcat,
  Sum,
  Min,
  Max,
  Avg,
  Distinct,
  Limit,
  OrderBy,
  Offset,
  GroupBy,
  Having
};

inline constexpr size_t kOperatorTagCount = 26;

inline constexpr std::array<OperatorTag, kOperatorTagCount> kAllOperatorTags = {
    OperatorTag::Filter,     OperatorTag::Union,    OperatorTag::Optional,
    OperatorTag::Graph,      OperatorTag::Bind,     OperatorTag::Minus,
    OperatorTag::Service,    OperatorTag::Values,   OperatorTag::SeqPath,
    OperatorTag::MulPath,    OperatorTag::AltPath,  OperatorTag::InvPath,
    OperatorTag::Projection, OperatorTag::Count,    OperatorTag::Sample,
    OperatorTag::GroupConcat, OperatorTag::Sum,     OperatorTag::Min,
    OperatorTag::Max,        OperatorTag::Avg,      OperatorTag::Distinct,
    OperatorTag::Limit,      OperatorTag::OrderBy,  OperatorTag::Offset,
    OperatorTag::GroupBy,    OperatorTag::Having};

std::string_view toString(OperatorTag tag);
std::optional<OperatorTag> operatorTagFromString(std::string_view name);

// One tag per occurrence.
std::multiset<OperatorTag> operatorInventory(const QueryAst& ast);

}  // namespace sparqlog::sparql
