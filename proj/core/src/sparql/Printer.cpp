#include "Printer.h"

#include <algorithm>
#include <cctype>

namespace sparqlog::sparql::detail {

namespace {

bool isInfix(const std::string& name) {
  static const char* kInfix[] = {"||", "&&", "=", "!=", "<", ">",
                                 "<=", ">=", "+", "-", "*", "/"};
  return std::any_of(std::begin(kInfix), std::end(kInfix),
                     [&](const char* s) { return name == s; });
}

std::string upper(const std::string& s) {
  std::string out = s;
  for (auto& c : out) c = static_cast<char>(std::toupper(c));
  return out;
}

}  // namespace

std::string Printer::number(uint64_t v) {
  return render_(Term::literal(std::to_string(v), Term::LiteralType::Number));
}

std::string Printer::print(const QueryAst& ast) {
  out_.clear();
  switch (ast.form) {
    case QueryForm::Select:
      selectHeader(ast.solution);
      break;
    case QueryForm::Construct:
      out_ += "CONSTRUCT {";
      for (const auto& tp : ast.constructTemplate->triplePatterns) triple(tp);
      out_ += " }";
      break;
    case QueryForm::Ask:
      out_ += "ASK";
      break;
    case QueryForm::Describe:
      out_ += "DESCRIBE";
      if (ast.describeStar) out_ += " *";
      for (const auto& t : ast.describeTargets) out_ += " " + render_(t);
      break;
  }
  if (ast.hasWhere) {
    out_ += " WHERE ";
    groupBody(ast.where);
  }
  modifiers(ast.solution);
  return out_;
}

void Printer::selectHeader(const SelectClause& sc) {
  out_ += "SELECT";
  if (sc.modifiers.distinct) out_ += " DISTINCT";
  if (sc.modifiers.reduced) out_ += " REDUCED";
  if (sc.star) out_ += " *";
  for (const auto& item : sc.items) {
    out_ += ' ';
    if (item.expression) {
      out_ += '(';
      expr(*item.expression);
      out_ += " AS " + render_(Term::variable(item.variable)) + ')';
    } else {
      out_ += render_(Term::variable(item.variable));
    }
  }
}

void Printer::modifiers(const SelectClause& sc) {
  if (sc.modifiers.groupBy) {
    out_ += " GROUP BY";
    for (const auto& g : sc.groupBy) {
      out_ += ' ';
      if (!g.isLeaf && g.name == "as") {
        out_ += '(';
        expr(g.args[0]);
        out_ += " AS ";
        expr(g.args[1]);
        out_ += ')';
      } else if (g.isLeaf && g.leaf.kind == Term::Kind::Variable) {
        expr(g);
      } else {
        out_ += '(';
        expr(g);
        out_ += ')';
      }
    }
  }
  if (sc.modifiers.having) {
    out_ += " HAVING";
    for (const auto& h : sc.having) {
      out_ += " (";
      expr(h);
      out_ += ')';
    }
  }
  if (sc.modifiers.orderBy) {
    out_ += " ORDER BY";
    for (const auto& [e, desc] : sc.orderBy) {
      out_ += desc ? " DESC(" : " (";
      expr(e);
      out_ += ')';
    }
  }
  if (sc.modifiers.limit) out_ += " LIMIT " + number(*sc.modifiers.limit);
  if (sc.modifiers.offset) out_ += " OFFSET " + number(*sc.modifiers.offset);
}

void Printer::groupBody(const OperatorBlock& b) {
  out_ += '{';
  for (const auto& tp : b.triplePatterns) triple(tp);
  for (const auto& c : b.children) child(c);
  for (const auto& f : b.filters) {
    out_ += " FILTER(";
    expr(f.root);
    out_ += ')';
  }
  out_ += " }";
}

void Printer::child(const OperatorBlock& c) {
  out_ += ' ';
  switch (c.kind) {
    case BlockKind::Union:
      if (c.unionBranch > 0) out_ += "UNION ";
      groupBody(c);
      break;
    case BlockKind::Optional:
      out_ += "OPTIONAL ";
      groupBody(c);
      break;
    case BlockKind::Minus:
      out_ += "MINUS ";
      groupBody(c);
      break;
    case BlockKind::Graph:
      out_ += "GRAPH " + render_(*c.graphTerm) + ' ';
      groupBody(c);
      break;
    case BlockKind::Service:
      out_ += "SERVICE ";
      if (c.serviceSilent) out_ += "SILENT ";
      out_ += render_(*c.graphTerm) + ' ';
      groupBody(c);
      break;
    case BlockKind::Subquery:
      out_ += "{ ";
      selectHeader(*c.select);
      out_ += " WHERE ";
      groupBody(c);
      modifiers(*c.select);
      out_ += " }";
      break;
    case BlockKind::Bind:
      out_ += "BIND(";
      expr(*c.bindExpression);
      out_ += " AS " + render_(Term::variable(c.bindVariable)) + ')';
      break;
    case BlockKind::Values:
      values(c);
      break;
    case BlockKind::Main:
    case BlockKind::GraphTemplate:
      groupBody(c);
      break;
  }
}

void Printer::values(const OperatorBlock& b) {
  out_ += "VALUES (";
  for (size_t i = 0; i < b.valuesVariables.size(); ++i) {
    if (i > 0) out_ += ' ';
    out_ += render_(Term::variable(b.valuesVariables[i]));
  }
  out_ += ") {";
  for (const auto& row : b.valuesRows) {
    out_ += " (";
    for (size_t i = 0; i < row.size(); ++i) {
      if (i > 0) out_ += ' ';
      out_ += row[i] ? render_(*row[i]) : "UNDEF";
    }
    out_ += ')';
  }
  out_ += " }";
}

void Printer::triple(const TriplePattern& tp) {
  out_ += ' ' + render_(tp.subject) + ' ';
  path(tp.predicate, true);
  out_ += ' ' + render_(tp.object) + " .";
}

void Printer::path(const PathExpr& p, bool top) {
  switch (p.op) {
    case PathExpr::Op::Link:
    case PathExpr::Op::Var:
      out_ += render_(p.term);
      return;
    case PathExpr::Op::Seq:
    case PathExpr::Op::Alt:
      if (!top) out_ += '(';
      path(p.operands[0], false);
      out_ += p.op == PathExpr::Op::Seq ? '/' : '|';
      path(p.operands[1], false);
      if (!top) out_ += ')';
      return;
    case PathExpr::Op::Inv:
      out_ += '^';
      path(p.operands[0], false);
      return;
    case PathExpr::Op::Mult:
      out_ += '(';
      path(p.operands[0], true);
      out_ += ')';
      out_ += p.quantifier;
      return;
  }
}

void Printer::expr(const FilterNode& n) {
  if (n.isLeaf) {
    out_ += render_(n.leaf);
    return;
  }
  const std::string& name = n.name;
  if (isInfix(name) && n.args.size() == 2) {
    out_ += '(';
    expr(n.args[0]);
    out_ += ' ' + name + ' ';
    expr(n.args[1]);
    out_ += ')';
    return;
  }
  if (name == "!" || name == "neg" || name == "pos") {
    out_ += name == "!" ? "(!" : name == "neg" ? "(- " : "(+ ";
    expr(n.args[0]);
    out_ += ')';
    return;
  }
  if (name == "in" || name == "not in") {
    out_ += '(';
    expr(n.args[0]);
    out_ += name == "in" ? " IN (" : " NOT IN (";
    for (size_t i = 1; i < n.args.size(); ++i) {
      if (i > 1) out_ += ", ";
      expr(n.args[i]);
    }
    out_ += "))";
    return;
  }
  if (name == "exists" || name == "not exists") {
    out_ += name == "exists" ? "EXISTS " : "NOT EXISTS ";
    groupBody(*n.group);
    return;
  }
  std::string fn = name;
  bool distinct = false;
  if (auto pos = fn.find(" distinct"); pos != std::string::npos) {
    fn = fn.substr(0, pos);
    distinct = true;
  }
  out_ += fn.front() == '<' ? fn : upper(fn);
  out_ += '(';
  if (distinct) out_ += "DISTINCT ";
  if (fn == "count" && n.args.empty()) out_ += '*';
  for (size_t i = 0; i < n.args.size(); ++i) {
    if (fn == "group_concat" && i == 1) {
      out_ += "; SEPARATOR=";
      expr(n.args[i]);
      continue;
    }
    if (i > 0) out_ += ", ";
    expr(n.args[i]);
  }
  out_ += ')';
}

}  // namespace sparqlog::sparql::detail

namespace sparqlog::sparql {

std::string serialize(const QueryAst& ast) {
  detail::Printer printer([](const Term& t) { return t.value; });
  return printer.print(ast);
}

std::string serialize(const QueryAst& ast, const TermRenderer& render) {
  detail::Printer printer(render);
  return printer.print(ast);
}

}  // namespace sparqlog::sparql
