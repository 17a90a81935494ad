#pragma once

#include <functional>
#include <string>

#include "sparqlog/sparql/QueryAst.h"

namespace sparqlog::sparql::detail {

// Renders an AST as SPARQL text. Every RDF term, variable and LIMIT/OFFSET
// value goes through `renderTerm`, so the same printer produces both the
// round-trippable serialization and placeholder templates.
class Printer {
 public:
  using TermRenderer = std::function<std::string(const Term&)>;

  explicit Printer(TermRenderer renderTerm) : render_(std::move(renderTerm)) {}

  std::string print(const QueryAst& ast);

 private:
  void selectHeader(const SelectClause& sc);
  void modifiers(const SelectClause& sc);
  void groupBody(const OperatorBlock& b);
  void child(const OperatorBlock& c);
  void triple(const TriplePattern& tp);
  void path(const PathExpr& p, bool top);
  void expr(const FilterNode& n);
  void values(const OperatorBlock& b);
  std::string number(uint64_t v);

  TermRenderer render_;
  std::string out_;
};

}  // namespace sparqlog::sparql::detail
