#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace sparqlog::sparql {

// A concrete RDF term or variable as written in a query, prefixes expanded.
//
// `value` holds the canonical lexical form: `<iri>`, `?name`, `_:label`,
// `"lexical"@lang` / `"lexical"^^<dt>`, or a bare numeric / boolean token.
struct Term {
  enum class Kind : uint8_t { Iri, Literal, BlankNode, Variable };
  // Syntactic category of a literal; drives FILTER substitution type tags.
  enum class LiteralType : uint8_t { None, String, Number, Boolean };

  Kind kind = Kind::Variable;
  std::string value;
  LiteralType literalType = LiteralType::None;

  static Term iri(std::string v) { return {Kind::Iri, std::move(v)}; }
  static Term variable(std::string v) { return {Kind::Variable, std::move(v)}; }
  static Term blank(std::string v) { return {Kind::BlankNode, std::move(v)}; }
  static Term literal(std::string v, LiteralType t) {
    return {Kind::Literal, std::move(v), t};
  }

  bool isVariableLike() const {
    return kind == Kind::Variable || kind == Kind::BlankNode;
  }
  bool operator==(const Term&) const = default;
  auto operator<=>(const Term&) const = default;
};

// Property path expression in predicate position.
struct PathExpr {
  enum class Op : uint8_t { Link, Var, Seq, Alt, Inv, Mult };
  Op op = Op::Link;
  // Link: the IRI term; Var: the variable term.
  Term term;
  // Seq/Alt: two operands; Inv/Mult: one operand.
  std::vector<PathExpr> operands;
  // Mult only: one of '*', '+', '?'.
  char quantifier = 0;

  static PathExpr link(Term t) { return {Op::Link, std::move(t), {}, 0}; }
  static PathExpr var(Term t) { return {Op::Var, std::move(t), {}, 0}; }

  bool isSimple() const { return op == Op::Link || op == Op::Var; }
  // Canonical serialization, used as hypergraph edge label.
  std::string toString() const;
  bool operator==(const PathExpr&) const = default;
};

struct TriplePattern {
  Term subject;
  PathExpr predicate;
  Term object;
  bool operator==(const TriplePattern&) const = default;
};

struct OperatorBlock;

// FILTER parse tree node. A leaf wraps a term; an operator node has a name
// (SPARQL operator symbol, lower-cased builtin name, or function IRI) and
// ordered arguments. EXISTS / NOT EXISTS keep their group as `group`.
struct FilterNode {
  enum class LeafType : uint8_t { Variable, Iri, String, Number, Boolean };

  bool isLeaf = true;
  Term leaf;
  std::string name;
  std::vector<FilterNode> args;
  std::shared_ptr<const OperatorBlock> group;

  LeafType leafType() const;
  std::string toString() const;
  bool operator==(const FilterNode& other) const;
};

struct FilterTree {
  FilterNode root;
  bool operator==(const FilterTree&) const = default;
};

enum class BlockKind : uint8_t {
  Main,
  GraphTemplate,
  Union,
  Optional,
  Graph,
  Service,
  Subquery,
  Minus,
  Bind,
  Values
};

std::string_view toString(BlockKind kind);
std::optional<BlockKind> blockKindFromString(std::string_view s);

enum class QueryForm : uint8_t { Select, Construct, Ask, Describe };

std::string_view toString(QueryForm form);
std::optional<QueryForm> queryFormFromString(std::string_view s);

enum class Aggregation : uint8_t {
  Count,
  Sum,
  Min,
  Max,
  Avg,
  Sample,
  GroupConcat
};

struct SolutionModifiers {
  bool distinct = false;
  bool reduced = false;
  std::optional<uint64_t> limit;
  std::optional<uint64_t> offset;
  bool orderBy = false;
  bool groupBy = false;
  bool having = false;
  bool operator==(const SolutionModifiers&) const = default;
};

// A projection item: plain variable or `(expr AS ?var)`.
struct ProjectionItem {
  std::string variable;
  std::optional<FilterNode> expression;
  bool operator==(const ProjectionItem&) const = default;
};

// SELECT header shared by the top-level query and subqueries.
struct SelectClause {
  bool star = false;
  std::vector<ProjectionItem> items;
  SolutionModifiers modifiers;
  // Aggregate occurrences across projection, HAVING and ORDER BY.
  std::vector<Aggregation> aggregations;
  // GROUP BY / HAVING / ORDER BY expressions, kept for serialization.
  std::vector<FilterNode> groupBy;
  std::vector<FilterNode> having;
  std::vector<std::pair<FilterNode, bool>> orderBy;  // (expr, descending)
  bool operator==(const SelectClause&) const = default;
};

struct OperatorBlock {
  BlockKind kind = BlockKind::Main;
  std::vector<TriplePattern> triplePatterns;
  std::vector<FilterTree> filters;
  std::vector<OperatorBlock> children;
  // Dense position among siblings of the same kind.
  uint32_t ordinal = 0;

  // Union: 0 for the first branch of a UNION chain, >0 for later branches.
  uint32_t unionBranch = 0;
  // Graph / Service: the graph name or endpoint.
  std::optional<Term> graphTerm;
  bool serviceSilent = false;
  // Subquery: its own SELECT header.
  std::optional<SelectClause> select;
  // Bind: `BIND(expr AS ?var)`.
  std::optional<FilterNode> bindExpression;
  std::string bindVariable;
  // Values: variables and rows (nullopt is UNDEF).
  std::vector<std::string> valuesVariables;
  std::vector<std::vector<std::optional<Term>>> valuesRows;

  bool operator==(const OperatorBlock&) const = default;
};

// Location of a block in the block tree: (kind, ordinal) steps from the root.
using BlockPath = std::vector<std::pair<BlockKind, uint32_t>>;

std::string toString(const BlockPath& path);
// Inverse of toString; nullopt on malformed input.
std::optional<BlockPath> blockPathFromString(std::string_view s);

struct QueryAst {
  QueryForm form = QueryForm::Select;
  // Projection (meaningful for SELECT only) and solution modifiers.
  SelectClause solution;
  // Root of the query body.
  OperatorBlock where;
  // Present iff form == Construct.
  std::optional<OperatorBlock> constructTemplate;
  // DESCRIBE targets (`*` is an empty list with describeStar set).
  std::vector<Term> describeTargets;
  bool describeStar = false;
  bool hasWhere = true;
  // A trailing VALUES clause is stored as the last Values child of `where`.

  std::vector<std::string> projectionVars;
  std::set<Term> termSet;
  std::string rawText;

  // Structural equality; rawText is ignored.
  bool operator==(const QueryAst& other) const;
};

// Visits every block in document order: the construct template first, then
// the WHERE tree depth first. EXISTS groups are not visited.
template <typename F>
void forEachBlock(const QueryAst& ast, F&& fn) {
  auto rec = [&](auto&& self, const OperatorBlock& b, BlockPath& path) -> void {
    fn(b, static_cast<const BlockPath&>(path));
    for (const auto& c : b.children) {
      path.emplace_back(c.kind, c.ordinal);
      self(self, c, path);
      path.pop_back();
    }
  };
  BlockPath path;
  if (ast.constructTemplate) {
    path.emplace_back(BlockKind::GraphTemplate, 0);
    fn(*ast.constructTemplate, static_cast<const BlockPath&>(path));
    path.clear();
  }
  path.emplace_back(BlockKind::Main, 0);
  rec(rec, ast.where, path);
}

class ParseError : public std::runtime_error {
 public:
  ParseError(size_t offset, std::string message);
  size_t offset() const { return offset_; }
  const std::string& message() const { return message_; }

 private:
  size_t offset_;
  std::string message_;
};

// Parses a query of the supported SPARQL 1.1 subset. Throws ParseError.
QueryAst parseQuery(std::string_view text);

// Pretty-prints an AST back to SPARQL. Reparsing yields an equal AST.
std::string serialize(const QueryAst& ast);

// Same, with every term, variable and LIMIT/OFFSET value rendered by
// `render`.
using TermRenderer = std::function<std::string(const Term&)>;
std::string serialize(const QueryAst& ast, const TermRenderer& render);

}  // namespace sparqlog::sparql
