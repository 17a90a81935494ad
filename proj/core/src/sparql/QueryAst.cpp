#include "sparqlog/sparql/QueryAst.h"

#include <algorithm>
#include <map>

namespace sparqlog::sparql {

std::string PathExpr::toString() const {
  switch (op) {
    case Op::Link:
    case Op::Var:
      return term.value;
    case Op::Seq:
      return "(" + operands[0].toString() + "/" + operands[1].toString() + ")";
    case Op::Alt:
      return "(" + operands[0].toString() + "|" + operands[1].toString() + ")";
    case Op::Inv:
      return "^" + operands[0].toString();
    case Op::Mult:
      return "(" + operands[0].toString() + ")" + std::string(1, quantifier);
  }
  return {};
}

FilterNode::LeafType FilterNode::leafType() const {
  switch (leaf.kind) {
    case Term::Kind::Variable:
    case Term::Kind::BlankNode:
      return LeafType::Variable;
    case Term::Kind::Iri:
      return LeafType::Iri;
    case Term::Kind::Literal:
      break;
  }
  switch (leaf.literalType) {
    case Term::LiteralType::Number:
      return LeafType::Number;
    case Term::LiteralType::Boolean:
      return LeafType::Boolean;
    default:
      return LeafType::String;
  }
}

bool FilterNode::operator==(const FilterNode& other) const {
  if (isLeaf != other.isLeaf) return false;
  if (isLeaf) return leaf == other.leaf;
  if (name != other.name || args != other.args) return false;
  if (static_cast<bool>(group) != static_cast<bool>(other.group)) return false;
  return !group || *group == *other.group;
}

std::string_view toString(BlockKind kind) {
  switch (kind) {
    case BlockKind::Main: return "Main";
    case BlockKind::GraphTemplate: return "GraphTemplate";
    case BlockKind::Union: return "Union";
    case BlockKind::Optional: return "Optional";
    case BlockKind::Graph: return "Graph";
    case BlockKind::Service: return "Service";
    case BlockKind::Subquery: return "Subquery";
    case BlockKind::Minus: return "Minus";
    case BlockKind::Bind: return "Bind";
    case BlockKind::Values: return "Values";
  }
  return "?";
}

std::string_view toString(QueryForm form) {
  switch (form) {
    case QueryForm::Select: return "SELECT";
    case QueryForm::Construct: return "CONSTRUCT";
    case QueryForm::Ask: return "ASK";
    case QueryForm::Describe: return "DESCRIBE";
  }
  return "?";
}

std::string toString(const BlockPath& path) {
  std::string out;
  for (const auto& [kind, ordinal] : path) {
    if (!out.empty()) out += '/';
    out += toString(kind);
    if (kind != BlockKind::Main && kind != BlockKind::GraphTemplate) {
      out += '#' + std::to_string(ordinal);
    }
  }
  return out;
}

std::optional<BlockKind> blockKindFromString(std::string_view s) {
  for (uint8_t k = 0; k <= static_cast<uint8_t>(BlockKind::Values); ++k) {
    if (toString(static_cast<BlockKind>(k)) == s) {
      return static_cast<BlockKind>(k);
    }
  }
  return std::nullopt;
}

std::optional<QueryForm> queryFormFromString(std::string_view s) {
  for (uint8_t f = 0; f <= static_cast<uint8_t>(QueryForm::Describe); ++f) {
    if (toString(static_cast<QueryForm>(f)) == s) {
      return static_cast<QueryForm>(f);
    }
  }
  return std::nullopt;
}

std::optional<BlockPath> blockPathFromString(std::string_view s) {
  BlockPath path;
  while (!s.empty()) {
    size_t slash = s.find('/');
    std::string_view step = s.substr(0, slash);
    s = slash == std::string_view::npos ? std::string_view{}
                                        : s.substr(slash + 1);
    uint32_t ordinal = 0;
    size_t hash = step.find('#');
    if (hash != std::string_view::npos) {
      std::string_view digits = step.substr(hash + 1);
      if (digits.empty()) return std::nullopt;
      for (char c : digits) {
        if (c < '0' || c > '9') return std::nullopt;
        ordinal = ordinal * 10 + static_cast<uint32_t>(c - '0');
      }
      step = step.substr(0, hash);
    }
    auto kind = blockKindFromString(step);
    if (!kind) return std::nullopt;
    path.emplace_back(*kind, ordinal);
  }
  if (path.empty()) return std::nullopt;
  return path;
}

bool QueryAst::operator==(const QueryAst& other) const {
  return form == other.form && solution == other.solution &&
         where == other.where && constructTemplate == other.constructTemplate &&
         describeTargets == other.describeTargets &&
         describeStar == other.describeStar && hasWhere == other.hasWhere &&
         projectionVars == other.projectionVars && termSet == other.termSet;
}

namespace detail {

namespace {

void assignOrdinals(OperatorBlock& block) {
  std::map<BlockKind, uint32_t> next;
  for (auto& c : block.children) {
    c.ordinal = next[c.kind]++;
    assignOrdinals(c);
  }
}

void collectPathTerms(const PathExpr& p, std::set<Term>& out) {
  if (p.isSimple()) {
    out.insert(p.term);
    return;
  }
  for (const auto& o : p.operands) collectPathTerms(o, out);
}

void collectBlockTerms(const OperatorBlock& b, std::set<Term>& out);

void collectFilterTerms(const FilterNode& n, std::set<Term>& out) {
  if (n.isLeaf) {
    if (n.leaf.kind != Term::Kind::Literal) out.insert(n.leaf);
    return;
  }
  if (!n.name.empty() && n.name.front() == '<') out.insert(Term::iri(n.name));
  for (const auto& a : n.args) collectFilterTerms(a, out);
  if (n.group) collectBlockTerms(*n.group, out);
}

void collectBlockTerms(const OperatorBlock& b, std::set<Term>& out) {
  for (const auto& tp : b.triplePatterns) {
    for (const Term* t : {&tp.subject, &tp.object}) {
      if (t->kind != Term::Kind::Literal) out.insert(*t);
    }
    collectPathTerms(tp.predicate, out);
  }
  for (const auto& f : b.filters) collectFilterTerms(f.root, out);
  for (const auto& c : b.children) collectBlockTerms(c, out);
}

void pushUnique(std::vector<std::string>& vars, const std::string& v) {
  if (std::find(vars.begin(), vars.end(), v) == vars.end()) vars.push_back(v);
}

void inScopeVariables(const OperatorBlock& b, std::vector<std::string>& vars);

void projectedVariables(const OperatorBlock& sub,
                        std::vector<std::string>& vars) {
  if (sub.select && !sub.select->star) {
    for (const auto& item : sub.select->items) pushUnique(vars, item.variable);
    return;
  }
  std::vector<std::string> inner;
  OperatorBlock body = sub;
  body.kind = BlockKind::Main;
  body.select.reset();
  inScopeVariables(body, inner);
  for (const auto& v : inner) pushUnique(vars, v);
}

void inScopeVariables(const OperatorBlock& b, std::vector<std::string>& vars) {
  auto add = [&](const Term& t) {
    if (t.kind == Term::Kind::Variable) pushUnique(vars, t.value);
  };
  for (const auto& tp : b.triplePatterns) {
    add(tp.subject);
    if (tp.predicate.op == PathExpr::Op::Var) add(tp.predicate.term);
    add(tp.object);
  }
  for (const auto& c : b.children) {
    switch (c.kind) {
      case BlockKind::Minus:
        break;
      case BlockKind::Subquery:
        projectedVariables(c, vars);
        break;
      case BlockKind::Bind:
        pushUnique(vars, c.bindVariable);
        break;
      case BlockKind::Values:
        for (const auto& v : c.valuesVariables) pushUnique(vars, v);
        break;
      default:
        inScopeVariables(c, vars);
    }
  }
}

}  // namespace

void finalizeAst(QueryAst& ast) {
  assignOrdinals(ast.where);
  ast.termSet.clear();
  if (ast.constructTemplate) collectBlockTerms(*ast.constructTemplate, ast.termSet);
  collectBlockTerms(ast.where, ast.termSet);
  ast.projectionVars.clear();
  if (ast.form == QueryForm::Select) {
    if (ast.solution.star) {
      inScopeVariables(ast.where, ast.projectionVars);
    } else {
      for (const auto& item : ast.solution.items) {
        pushUnique(ast.projectionVars, item.variable);
      }
    }
  }
}

}  // namespace detail

}  // namespace sparqlog::sparql
