#include "sparqlog/sparql/Views.h"

#include "Printer.h"

namespace sparqlog::sparql {

QueryTemplate templateOf(const QueryAst& ast) {
  size_t counter = 0;
  detail::Printer printer([&counter](const Term& t) {
    std::string n = std::to_string(counter++);
    switch (t.kind) {
      case Term::Kind::Iri:
        return "<$" + n + ">";
      case Term::Kind::Literal:
        return "\"$" + n + "\"";
      case Term::Kind::Variable:
      case Term::Kind::BlankNode:
        return "?$" + n;
    }
    return std::string("$") + n;
  });
  return {printer.print(ast)};
}

std::string_view toString(OperatorTag tag) {
  switch (tag) {
    case OperatorTag::Filter: return "Filter";
    case OperatorTag::Union: return "Union";
    case OperatorTag::Optional: return "Optional";
    case OperatorTag::Graph: return "Graph";
    case OperatorTag::Bind: return "Bind";
    case OperatorTag::Minus: return "Minus";
    case OperatorTag::Service: return "Service";
    case OperatorTag::Values: return "Values";
    case OperatorTag::SeqPath: return "SeqPath";
    case OperatorTag::MulPath: return "MulPath";
    case OperatorTag::AltPath: return "AltPath";
    case OperatorTag::InvPath: return "InvPath";
    case OperatorTag::Projection: return "Projection";
    case OperatorTag::Count: return "Count";
    case OperatorTag::Sample: return "Sample";
    case OperatorTag::GroupConcat: return "GroupConcat";
    case OperatorTag::Sum: return "Sum";
    case OperatorTag::Min: return "Min";
    case OperatorTag::Max: return "Max";
    case OperatorTag::Avg: return "Avg";
    case OperatorTag::Distinct: return "Distinct";
    case OperatorTag::Limit: return "Limit";
    case OperatorTag::OrderBy: return "OrderBy";
    case OperatorTag::Offset: return "Offset";
    case OperatorTag::GroupBy: return "GroupBy";
    case OperatorTag::Having: return "Having";
  }
  return "?";
}

std::optional<OperatorTag> operatorTagFromString(std::string_view name) {
  for (OperatorTag tag : kAllOperatorTags) {
    if (toString(tag) == name) return tag;
  }
  return std::nullopt;
}

namespace {

class Census {
 public:
  std::multiset<OperatorTag> tags;

  void solution(const SelectClause& sc, bool hasProjection) {
    if (hasProjection) tags.insert(OperatorTag::Projection);
    for (Aggregation a : sc.aggregations) {
      switch (a) {
        case Aggregation::Count: tags.insert(OperatorTag::Count); break;
        case Aggregation::Sum: tags.insert(OperatorTag::Sum); break;
        case Aggregation::Min: tags.insert(OperatorTag::Min); break;
        case Aggregation::Max: tags.insert(OperatorTag::Max); break;
        case Aggregation::Avg: tags.insert(OperatorTag::Avg); break;
        case Aggregation::Sample: tags.insert(OperatorTag::Sample); break;
        case Aggregation::GroupConcat:
          tags.insert(OperatorTag::GroupConcat);
          break;
      }
    }
    const auto& m = sc.modifiers;
    if (m.distinct) tags.insert(OperatorTag::Distinct);
    if (m.limit) tags.insert(OperatorTag::Limit);
    if (m.offset) tags.insert(OperatorTag::Offset);
    if (m.orderBy) tags.insert(OperatorTag::OrderBy);
    if (m.groupBy) tags.insert(OperatorTag::GroupBy);
    if (m.having) tags.insert(OperatorTag::Having);
  }

  void block(const OperatorBlock& b) {
    switch (b.kind) {
      case BlockKind::Union:
        if (b.unionBranch > 0) tags.insert(OperatorTag::Union);
        break;
      case BlockKind::Optional: tags.insert(OperatorTag::Optional); break;
      case BlockKind::Graph: tags.insert(OperatorTag::Graph); break;
      case BlockKind::Service: tags.insert(OperatorTag::Service); break;
      case BlockKind::Minus: tags.insert(OperatorTag::Minus); break;
      case BlockKind::Bind: tags.insert(OperatorTag::Bind); break;
      case BlockKind::Values: tags.insert(OperatorTag::Values); break;
      case BlockKind::Subquery: {
        bool projects = !b.select->items.empty() || b.select->star;
        solution(*b.select, projects);
        break;
      }
      default:
        break;
    }
    for (const auto& tp : b.triplePatterns) path(tp.predicate);
    for (const auto& f : b.filters) {
      tags.insert(OperatorTag::Filter);
      existsGroups(f.root);
    }
    if (b.bindExpression) existsGroups(*b.bindExpression);
    for (const auto& c : b.children) block(c);
  }

  void path(const PathExpr& p) {
    switch (p.op) {
      case PathExpr::Op::Seq: tags.insert(OperatorTag::SeqPath); break;
      case PathExpr::Op::Alt: tags.insert(OperatorTag::AltPath); break;
      case PathExpr::Op::Inv: tags.insert(OperatorTag::InvPath); break;
      case PathExpr::Op::Mult: tags.insert(OperatorTag::MulPath); break;
      default: break;
    }
    for (const auto& o : p.operands) path(o);
  }

  void existsGroups(const FilterNode& n) {
    if (n.group) block(*n.group);
    for (const auto& a : n.args) existsGroups(a);
  }
};

}  // namespace

std::multiset<OperatorTag> operatorInventory(const QueryAst& ast) {
  Census census;
  census.solution(ast.solution, !ast.projectionVars.empty());
  if (ast.constructTemplate) census.block(*ast.constructTemplate);
  census.block(ast.where);
  return std::move(census.tags);
}

}  // namespace sparqlog::sparql
