#include <algorithm>
#include <array>
#include <cctype>
#include <map>
#include <unordered_map>

#include "Lexer.h"
#include "sparqlog/sparql/QueryAst.h"

namespace sparqlog::sparql {

namespace {

using detail::Token;
using TT = Token::Type;

std::string upper(std::string_view s) {
  std::string out(s);
  for (auto& c : out) c = static_cast<char>(std::toupper(c));
  return out;
}

std::string lower(std::string_view s) {
  std::string out(s);
  for (auto& c : out) c = static_cast<char>(std::tolower(c));
  return out;
}

struct Arity {
  size_t min;
  size_t max;
};
constexpr size_t kVariadic = static_cast<size_t>(-1);

const std::unordered_map<std::string, Arity>& builtinArities() {
  static const std::unordered_map<std::string, Arity> table = {
      {"str", {1, 1}},         {"lang", {1, 1}},
      {"langmatches", {2, 2}}, {"datatype", {1, 1}},
      {"bound", {1, 1}},       {"iri", {1, 1}},
      {"uri", {1, 1}},         {"bnode", {0, 1}},
      {"rand", {0, 0}},        {"abs", {1, 1}},
      {"ceil", {1, 1}},        {"floor", {1, 1}},
      {"round", {1, 1}},       {"concat", {0, kVariadic}},
      {"strlen", {1, 1}},      {"ucase", {1, 1}},
      {"lcase", {1, 1}},       {"encode_for_uri", {1, 1}},
      {"contains", {2, 2}},    {"strstarts", {2, 2}},
      {"strends", {2, 2}},     {"strbefore", {2, 2}},
      {"strafter", {2, 2}},    {"year", {1, 1}},
      {"month", {1, 1}},       {"day", {1, 1}},
      {"hours", {1, 1}},       {"minutes", {1, 1}},
      {"seconds", {1, 1}},     {"timezone", {1, 1}},
      {"tz", {1, 1}},          {"now", {0, 0}},
      {"uuid", {0, 0}},        {"struuid", {0, 0}},
      {"md5", {1, 1}},         {"sha1", {1, 1}},
      {"sha256", {1, 1}},      {"sha384", {1, 1}},
      {"sha512", {1, 1}},      {"coalesce", {0, kVariadic}},
      {"if", {3, 3}},          {"strlang", {2, 2}},
      {"strdt", {2, 2}},       {"sameterm", {2, 2}},
      {"isiri", {1, 1}},       {"isuri", {1, 1}},
      {"isblank", {1, 1}},     {"isliteral", {1, 1}},
      {"isnumeric", {1, 1}},   {"regex", {2, 3}},
      {"substr", {2, 3}},      {"replace", {3, 4}},
  };
  return table;
}

const std::map<std::string, Aggregation>& aggregateNames() {
  static const std::map<std::string, Aggregation> table = {
      {"COUNT", Aggregation::Count}, {"SUM", Aggregation::Sum},
      {"MIN", Aggregation::Min},     {"MAX", Aggregation::Max},
      {"AVG", Aggregation::Avg},     {"SAMPLE", Aggregation::Sample},
      {"GROUP_CONCAT", Aggregation::GroupConcat}};
  return table;
}

bool isUpdateKeyword(const std::string& w) {
  static const std::array<std::string_view, 11> kw = {
      "INSERT", "DELETE", "LOAD", "CLEAR", "DROP", "CREATE",
      "ADD",    "MOVE",   "COPY", "WITH",  "USING"};
  return std::find(kw.begin(), kw.end(), w) != kw.end();
}

std::string escapeLiteral(const std::string& content) {
  std::string out = "\"";
  for (char c : content) {
    switch (c) {
      case '"': out += "\\\""; break;
      case '\\': out += "\\\\"; break;
      case '\n': out += "\\n"; break;
      case '\r': out += "\\r"; break;
      case '\t': out += "\\t"; break;
      default: out += c;
    }
  }
  out += '"';
  return out;
}

class Parser {
 public:
  explicit Parser(std::string_view text)
      : tokens_(detail::tokenize(text)) {}

  QueryAst run() {
    QueryAst ast;
    prologue();
    const Token& head = peek();
    std::string kw = head.type == TT::Word ? upper(head.text) : "";
    if (kw == "SELECT") {
      ast.form = QueryForm::Select;
      ast.solution = selectClause();
      datasetClauses();
      optionalWord("WHERE");
      group(ast.where);
      solutionModifiers(ast.solution);
    } else if (kw == "CONSTRUCT") {
      ast.form = QueryForm::Construct;
      advance();
      if (isPunct("{")) {
        OperatorBlock tmpl;
        tmpl.kind = BlockKind::GraphTemplate;
        triplesTemplate(tmpl);
        ast.constructTemplate = std::move(tmpl);
        datasetClauses();
        optionalWord("WHERE");
        group(ast.where);
      } else {
        datasetClauses();
        expectWord("WHERE");
        OperatorBlock tmpl;
        tmpl.kind = BlockKind::GraphTemplate;
        triplesTemplate(tmpl);
        ast.where.triplePatterns = tmpl.triplePatterns;
        ast.constructTemplate = std::move(tmpl);
      }
      solutionModifiers(ast.solution);
    } else if (kw == "ASK") {
      ast.form = QueryForm::Ask;
      advance();
      datasetClauses();
      optionalWord("WHERE");
      group(ast.where);
      solutionModifiers(ast.solution);
    } else if (kw == "DESCRIBE") {
      ast.form = QueryForm::Describe;
      advance();
      if (isPunct("*")) {
        advance();
        ast.describeStar = true;
      } else {
        do {
          ast.describeTargets.push_back(varOrIri());
        } while (peek().type == TT::Variable || peek().type == TT::IriRef ||
                 peek().type == TT::PrefixedName);
      }
      datasetClauses();
      bool hasWhere = optionalWord("WHERE");
      if (hasWhere || isPunct("{")) {
        group(ast.where);
      } else {
        ast.hasWhere = false;
      }
      solutionModifiers(ast.solution);
    } else if (isUpdateKeyword(kw)) {
      throw ParseError(head.offset, "update operations are not supported");
    } else {
      fail("expected SELECT, CONSTRUCT, ASK or DESCRIBE");
    }
    valuesClause(ast.where);
    if (peek().type != TT::Eof) fail("unexpected trailing input");
    return ast;
  }

 private:
  // ---------------------------------------------------------------- tokens
  const Token& peek(size_t ahead = 0) const {
    size_t i = std::min(pos_ + ahead, tokens_.size() - 1);
    return tokens_[i];
  }

  const Token& advance() {
    const Token& t = tokens_[pos_];
    if (t.type != TT::Eof) {
      lastOffset_ = t.offset;
      ++pos_;
    }
    return t;
  }

  [[noreturn]] void fail(const std::string& message) const {
    const Token& t = peek();
    if (t.type == TT::Eof) {
      throw ParseError(lastOffset_, "unexpected end of input: " + message);
    }
    throw ParseError(t.offset, message);
  }

  bool isPunct(std::string_view sym, size_t ahead = 0) const {
    const Token& t = peek(ahead);
    return t.type == TT::Punct && t.text == sym;
  }

  bool isWord(std::string_view w, size_t ahead = 0) const {
    const Token& t = peek(ahead);
    return t.type == TT::Word && upper(t.text) == w;
  }

  void expectPunct(std::string_view sym) {
    if (!isPunct(sym)) fail("expected '" + std::string(sym) + "'");
    advance();
  }

  void expectWord(std::string_view w) {
    if (!isWord(w)) fail("expected " + std::string(w));
    advance();
  }

  bool optionalWord(std::string_view w) {
    if (!isWord(w)) return false;
    advance();
    return true;
  }

  // -------------------------------------------------------------- prologue
  void prologue() {
    while (true) {
      if (isWord("BASE")) {
        advance();
        if (peek().type != TT::IriRef) fail("expected IRI after BASE");
        base_ = advance().text;
      } else if (isWord("PREFIX")) {
        advance();
        const Token& p = peek();
        if (p.type != TT::PrefixedName || p.text.back() != ':' ||
            std::count(p.text.begin(), p.text.end(), ':') != 1) {
          fail("expected prefix name");
        }
        std::string name = advance().text;
        name.pop_back();
        if (peek().type != TT::IriRef) fail("expected IRI in PREFIX");
        prefixes_[name] = resolve(advance().text);
      } else {
        return;
      }
    }
  }

  std::string resolve(const std::string& iri) const {
    if (base_.empty() || iri.find(':') != std::string::npos) return iri;
    return base_ + iri;
  }

  void datasetClauses() {
    while (isWord("FROM")) {
      advance();
      optionalWord("NAMED");
      varOrIri();
    }
  }

  // ----------------------------------------------------------------- terms
  Term iriTerm() {
    const Token& t = peek();
    if (t.type == TT::IriRef) {
      advance();
      return Term::iri("<" + resolve(t.text) + ">");
    }
    if (t.type == TT::PrefixedName) {
      advance();
      size_t colon = t.text.find(':');
      std::string prefix = t.text.substr(0, colon);
      auto it = prefixes_.find(prefix);
      if (it == prefixes_.end()) {
        throw ParseError(t.offset, "unknown prefix '" + prefix + ":'");
      }
      std::string local;
      for (size_t i = colon + 1; i < t.text.size(); ++i) {
        if (t.text[i] == '\\' && i + 1 < t.text.size()) ++i;
        local += t.text[i];
      }
      return Term::iri("<" + it->second + local + ">");
    }
    fail("expected IRI");
  }

  bool atIri() const {
    return peek().type == TT::IriRef || peek().type == TT::PrefixedName;
  }

  Term varOrIri() {
    if (peek().type == TT::Variable) {
      return Term::variable("?" + advance().text);
    }
    return iriTerm();
  }

  std::string variableName() {
    if (peek().type != TT::Variable) fail("expected variable");
    return "?" + advance().text;
  }

  std::optional<Term> tryLiteral() {
    const Token& t = peek();
    switch (t.type) {
      case TT::String: {
        advance();
        std::string value = escapeLiteral(t.text);
        if (peek().type == TT::LangTag) {
          value += "@" + lower(advance().text);
        } else if (isPunct("^^")) {
          advance();
          value += "^^" + iriTerm().value;
        }
        return Term::literal(std::move(value), Term::LiteralType::String);
      }
      case TT::Integer:
      case TT::Decimal:
      case TT::Double:
        advance();
        return Term::literal(t.text, Term::LiteralType::Number);
      case TT::Punct:
        if ((t.text == "-" || t.text == "+") &&
            (peek(1).type == TT::Integer || peek(1).type == TT::Decimal ||
             peek(1).type == TT::Double) &&
            peek(1).offset == t.offset + 1) {
          advance();
          std::string sign = t.text == "-" ? "-" : "";
          return Term::literal(sign + advance().text,
                               Term::LiteralType::Number);
        }
        return std::nullopt;
      case TT::Word: {
        std::string w = lower(t.text);
        if (w == "true" || w == "false") {
          advance();
          return Term::literal(w, Term::LiteralType::Boolean);
        }
        return std::nullopt;
      }
      default:
        return std::nullopt;
    }
  }

  // Subject / object position. Blank node property lists add triples to
  // `block` and return the fresh blank node.
  Term graphNode(OperatorBlock& block, bool allowPropertyList = true) {
    const Token& t = peek();
    if (t.type == TT::Variable) return Term::variable("?" + advance().text);
    if (t.type == TT::BlankLabel) return Term::blank("_:" + advance().text);
    if (atIri()) return iriTerm();
    if (auto lit = tryLiteral()) return *lit;
    if (isPunct("[")) {
      advance();
      Term node = Term::blank("_:anon" + std::to_string(anonCounter_++));
      if (isPunct("]")) {
        advance();
        return node;
      }
      if (!allowPropertyList) fail("blank node property list not allowed");
      propertyList(block, node);
      expectPunct("]");
      return node;
    }
    if (isPunct("(")) fail("RDF collections are not supported");
    fail("expected RDF term");
  }

  // --------------------------------------------------------------- triples
  void triplesSameSubject(OperatorBlock& block) {
    size_t before = block.triplePatterns.size();
    bool isPropertyListSubject = isPunct("[") && !isPunct("]", 1);
    Term subject = graphNode(block);
    if (isPropertyListSubject && block.triplePatterns.size() > before &&
        (isPunct(".") || isPunct("}"))) {
      return;
    }
    propertyList(block, subject);
  }

  void propertyList(OperatorBlock& block, const Term& subject) {
    while (true) {
      PathExpr verb = verbPath();
      while (true) {
        size_t insertAt = block.triplePatterns.size();
        Term object = graphNode(block);
        TriplePattern tp{subject, verb, std::move(object)};
        // The outer triple precedes triples from a nested property list.
        block.triplePatterns.insert(
            block.triplePatterns.begin() + static_cast<long>(insertAt),
            std::move(tp));
        if (!isPunct(",")) break;
        advance();
      }
      if (!isPunct(";")) return;
      while (isPunct(";")) advance();
      if (isPunct(".") || isPunct("]") || isPunct("}")) return;
    }
  }

  PathExpr verbPath() {
    if (peek().type == TT::Variable) {
      return PathExpr::var(Term::variable("?" + advance().text));
    }
    return pathAlternative();
  }

  PathExpr pathAlternative() {
    PathExpr left = pathSequence();
    while (isPunct("|")) {
      advance();
      PathExpr right = pathSequence();
      PathExpr alt;
      alt.op = PathExpr::Op::Alt;
      alt.operands = {std::move(left), std::move(right)};
      left = std::move(alt);
    }
    return left;
  }

  PathExpr pathSequence() {
    PathExpr left = pathEltOrInverse();
    while (isPunct("/")) {
      advance();
      PathExpr right = pathEltOrInverse();
      PathExpr seq;
      seq.op = PathExpr::Op::Seq;
      seq.operands = {std::move(left), std::move(right)};
      left = std::move(seq);
    }
    return left;
  }

  PathExpr pathEltOrInverse() {
    if (isPunct("^")) {
      advance();
      PathExpr inv;
      inv.op = PathExpr::Op::Inv;
      inv.operands.push_back(pathElt());
      return inv;
    }
    return pathElt();
  }

  PathExpr pathElt() {
    PathExpr primary;
    if (isPunct("(")) {
      advance();
      primary = pathAlternative();
      expectPunct(")");
    } else if (isWord("A") && peek().text == "a") {
      advance();
      primary = PathExpr::link(
          Term::iri("<http://www.w3.org/1999/02/22-rdf-syntax-ns#type>"));
    } else if (atIri()) {
      primary = PathExpr::link(iriTerm());
    } else if (isPunct("!")) {
      fail("negated property sets are not supported");
    } else {
      fail("expected predicate");
    }
    if (isPunct("*") || isPunct("+") || isPunct("?")) {
      PathExpr mult;
      mult.op = PathExpr::Op::Mult;
      mult.quantifier = advance().text[0];
      mult.operands.push_back(std::move(primary));
      return mult;
    }
    return primary;
  }

  void triplesTemplate(OperatorBlock& block) {
    expectPunct("{");
    while (!isPunct("}")) {
      if (isPunct(".")) {
        advance();
        continue;
      }
      triplesSameSubject(block);
      if (!isPunct(".") && !isPunct("}")) fail("expected '.' or '}'");
    }
    advance();
  }

  // ---------------------------------------------------------------- groups
  void group(OperatorBlock& target) {
    expectPunct("{");
    if (isWord("SELECT")) {
      OperatorBlock sub;
      sub.kind = BlockKind::Subquery;
      subSelect(sub);
      target.children.push_back(std::move(sub));
      expectPunct("}");
      return;
    }
    while (true) {
      if (isPunct("}")) {
        advance();
        return;
      }
      if (isPunct(".")) {
        advance();
        continue;
      }
      if (isWord("FILTER")) {
        advance();
        target.filters.push_back({constraint()});
      } else if (isWord("OPTIONAL")) {
        advance();
        target.children.push_back(childGroup(BlockKind::Optional));
      } else if (isWord("MINUS")) {
        advance();
        target.children.push_back(childGroup(BlockKind::Minus));
      } else if (isWord("GRAPH")) {
        advance();
        Term name = varOrIri();
        OperatorBlock b = childGroup(BlockKind::Graph);
        b.graphTerm = std::move(name);
        target.children.push_back(std::move(b));
      } else if (isWord("SERVICE")) {
        advance();
        bool silent = optionalWord("SILENT");
        Term endpoint = varOrIri();
        OperatorBlock b = childGroup(BlockKind::Service);
        b.graphTerm = std::move(endpoint);
        b.serviceSilent = silent;
        target.children.push_back(std::move(b));
      } else if (isWord("BIND")) {
        advance();
        expectPunct("(");
        OperatorBlock b;
        b.kind = BlockKind::Bind;
        b.bindExpression = expression();
        expectWord("AS");
        b.bindVariable = variableName();
        expectPunct(")");
        target.children.push_back(std::move(b));
      } else if (isWord("VALUES")) {
        target.children.push_back(valuesBlock());
      } else if (isPunct("{")) {
        OperatorBlock first;
        group(first);
        if (isWord("UNION")) {
          first.kind = BlockKind::Union;
          first.unionBranch = 0;
          target.children.push_back(std::move(first));
          uint32_t branch = 1;
          while (isWord("UNION")) {
            advance();
            OperatorBlock next;
            group(next);
            next.kind = BlockKind::Union;
            next.unionBranch = branch++;
            target.children.push_back(std::move(next));
          }
        } else {
          flattenInto(target, std::move(first));
        }
      } else {
        triplesSameSubject(target);
        if (!isPunct(".") && !isPunct("}") && !startsPatternClause()) {
          fail("expected '.' or '}'");
        }
      }
    }
  }

  bool startsPatternClause() const {
    if (isPunct("{")) return true;
    for (std::string_view w : {"FILTER", "OPTIONAL", "MINUS", "GRAPH",
                               "SERVICE", "BIND", "VALUES"}) {
      if (isWord(w)) return true;
    }
    return false;
  }

  static void flattenInto(OperatorBlock& target, OperatorBlock&& inner) {
    for (auto& tp : inner.triplePatterns) {
      target.triplePatterns.push_back(std::move(tp));
    }
    for (auto& f : inner.filters) target.filters.push_back(std::move(f));
    for (auto& c : inner.children) target.children.push_back(std::move(c));
  }

  OperatorBlock childGroup(BlockKind kind) {
    OperatorBlock b;
    b.kind = kind;
    group(b);
    return b;
  }

  OperatorBlock valuesBlock() {
    expectWord("VALUES");
    OperatorBlock b;
    b.kind = BlockKind::Values;
    auto value = [&]() -> std::optional<Term> {
      if (isWord("UNDEF")) {
        advance();
        return std::nullopt;
      }
      if (atIri()) return iriTerm();
      if (auto lit = tryLiteral()) return *lit;
      fail("expected data value");
    };
    if (peek().type == TT::Variable) {
      b.valuesVariables.push_back(variableName());
      expectPunct("{");
      while (!isPunct("}")) b.valuesRows.push_back({value()});
      advance();
      return b;
    }
    expectPunct("(");
    while (!isPunct(")")) b.valuesVariables.push_back(variableName());
    advance();
    expectPunct("{");
    while (!isPunct("}")) {
      expectPunct("(");
      std::vector<std::optional<Term>> row;
      while (!isPunct(")")) row.push_back(value());
      advance();
      if (row.size() != b.valuesVariables.size()) {
        fail("VALUES row arity mismatch");
      }
      b.valuesRows.push_back(std::move(row));
    }
    advance();
    return b;
  }

  void valuesClause(OperatorBlock& where) {
    if (isWord("VALUES")) where.children.push_back(valuesBlock());
  }

  // ---------------------------------------------------------------- select
  SelectClause selectClause() {
    expectWord("SELECT");
    SelectClause sc;
    if (optionalWord("DISTINCT")) {
      sc.modifiers.distinct = true;
    } else if (optionalWord("REDUCED")) {
      sc.modifiers.reduced = true;
    }
    aggregations_ = &sc.aggregations;
    if (isPunct("*")) {
      advance();
      sc.star = true;
    } else {
      while (peek().type == TT::Variable || isPunct("(")) {
        if (peek().type == TT::Variable) {
          sc.items.push_back({variableName(), std::nullopt});
        } else {
          advance();
          FilterNode e = expression();
          expectWord("AS");
          std::string v = variableName();
          expectPunct(")");
          sc.items.push_back({std::move(v), std::move(e)});
        }
      }
      if (sc.items.empty()) fail("expected projection");
    }
    aggregations_ = nullptr;
    return sc;
  }

  void subSelect(OperatorBlock& sub) {
    SelectClause sc = selectClause();
    optionalWord("WHERE");
    group(sub);
    solutionModifiers(sc);
    if (isWord("VALUES")) sub.children.push_back(valuesBlock());
    sub.select = std::move(sc);
  }

  void solutionModifiers(SelectClause& sc) {
    aggregations_ = &sc.aggregations;
    if (isWord("GROUP") && isWord("BY", 1)) {
      advance();
      advance();
      sc.modifiers.groupBy = true;
      do {
        sc.groupBy.push_back(groupCondition());
      } while (startsCondition());
    }
    if (isWord("HAVING")) {
      advance();
      sc.modifiers.having = true;
      do {
        sc.having.push_back(constraint());
      } while (startsConstraint());
    }
    if (isWord("ORDER") && isWord("BY", 1)) {
      advance();
      advance();
      sc.modifiers.orderBy = true;
      do {
        bool desc = false;
        if (isWord("ASC") || isWord("DESC")) {
          desc = isWord("DESC");
          advance();
          sc.orderBy.emplace_back(bracketted(), desc);
        } else if (peek().type == TT::Variable) {
          sc.orderBy.emplace_back(leaf(Term::variable(variableName())), false);
        } else {
          sc.orderBy.emplace_back(constraint(), false);
        }
      } while (startsCondition() || isWord("ASC") || isWord("DESC"));
    }
    aggregations_ = nullptr;
    for (int i = 0; i < 2; ++i) {
      if (isWord("LIMIT")) {
        advance();
        sc.modifiers.limit = unsignedInt();
      } else if (isWord("OFFSET")) {
        advance();
        sc.modifiers.offset = unsignedInt();
      }
    }
  }

  uint64_t unsignedInt() {
    if (peek().type != TT::Integer) fail("expected integer");
    const Token& t = advance();
    try {
      return std::stoull(t.text);
    } catch (const std::exception&) {
      throw ParseError(t.offset, "integer out of range");
    }
  }

  bool startsConstraint() const {
    return isPunct("(") || atIri() ||
           (peek().type == TT::Word && isCallableWord(peek().text));
  }

  bool startsCondition() const {
    return startsConstraint() || peek().type == TT::Variable;
  }

  FilterNode groupCondition() {
    if (peek().type == TT::Variable) {
      return leaf(Term::variable(variableName()));
    }
    if (isPunct("(")) {
      advance();
      FilterNode e = expression();
      if (optionalWord("AS")) {
        FilterNode as;
        as.isLeaf = false;
        as.name = "as";
        as.args = {std::move(e), leaf(Term::variable(variableName()))};
        e = std::move(as);
      }
      expectPunct(")");
      return e;
    }
    return constraint();
  }

  // ----------------------------------------------------------- expressions
  static FilterNode leaf(Term t) {
    FilterNode n;
    n.isLeaf = true;
    n.leaf = std::move(t);
    return n;
  }

  static FilterNode op(std::string name, std::vector<FilterNode> args) {
    FilterNode n;
    n.isLeaf = false;
    n.name = std::move(name);
    n.args = std::move(args);
    return n;
  }

  static bool isCallableWord(const std::string& w) {
    std::string l = lower(w);
    std::string u = upper(w);
    return builtinArities().count(l) || aggregateNames().count(u) ||
           u == "EXISTS" || u == "NOT";
  }

  FilterNode constraint() {
    if (isPunct("(")) return bracketted();
    if (atIri()) return iriOrFunction();
    if (peek().type == TT::Word && isCallableWord(peek().text)) {
      return builtinCall();
    }
    fail("expected constraint");
  }

  FilterNode bracketted() {
    expectPunct("(");
    FilterNode e = expression();
    expectPunct(")");
    return e;
  }

  FilterNode expression() {
    FilterNode left = conditionalAnd();
    while (isPunct("||")) {
      advance();
      left = op("||", {std::move(left), conditionalAnd()});
    }
    return left;
  }

  FilterNode conditionalAnd() {
    FilterNode left = relational();
    while (isPunct("&&")) {
      advance();
      left = op("&&", {std::move(left), relational()});
    }
    return left;
  }

  FilterNode relational() {
    FilterNode left = additive();
    for (std::string_view sym : {"=", "!=", "<", ">", "<=", ">="}) {
      if (isPunct(sym)) {
        advance();
        return op(std::string(sym), {std::move(left), additive()});
      }
    }
    bool negated = false;
    if (isWord("NOT") && isWord("IN", 1)) {
      advance();
      negated = true;
    }
    if (isWord("IN")) {
      advance();
      std::vector<FilterNode> args{std::move(left)};
      expectPunct("(");
      if (!isPunct(")")) {
        args.push_back(expression());
        while (isPunct(",")) {
          advance();
          args.push_back(expression());
        }
      }
      expectPunct(")");
      return op(negated ? "not in" : "in", std::move(args));
    }
    return left;
  }

  FilterNode additive() {
    FilterNode left = multiplicative();
    while (true) {
      if (isPunct("+") || isPunct("-")) {
        std::string sym = advance().text;
        left = op(sym, {std::move(left), multiplicative()});
      } else {
        return left;
      }
    }
  }

  FilterNode multiplicative() {
    FilterNode left = unary();
    while (isPunct("*") || isPunct("/")) {
      std::string sym = advance().text;
      left = op(sym, {std::move(left), unary()});
    }
    return left;
  }

  FilterNode unary() {
    if (isPunct("!")) {
      advance();
      return op("!", {primary()});
    }
    if (isPunct("-") || isPunct("+")) {
      if (auto lit = tryLiteral()) return leaf(std::move(*lit));
      std::string sym = advance().text;
      return op(sym == "-" ? "neg" : "pos", {primary()});
    }
    return primary();
  }

  FilterNode primary() {
    const Token& t = peek();
    if (isPunct("(")) return bracketted();
    if (t.type == TT::Variable) return leaf(Term::variable(variableName()));
    if (atIri()) return iriOrFunction();
    if (auto lit = tryLiteral()) return leaf(std::move(*lit));
    if (t.type == TT::Word && isCallableWord(t.text)) return builtinCall();
    fail("expected expression");
  }

  FilterNode iriOrFunction() {
    Term iri = iriTerm();
    if (!isPunct("(")) return leaf(std::move(iri));
    advance();
    std::vector<FilterNode> args;
    optionalWord("DISTINCT");
    if (!isPunct(")")) {
      args.push_back(expression());
      while (isPunct(",")) {
        advance();
        args.push_back(expression());
      }
    }
    expectPunct(")");
    return op(iri.value, std::move(args));
  }

  FilterNode builtinCall() {
    const Token& t = advance();
    std::string u = upper(t.text);
    if (u == "NOT" || u == "EXISTS") {
      if (u == "NOT") expectWord("EXISTS");
      auto inner = std::make_shared<OperatorBlock>();
      group(*inner);
      FilterNode n = op(u == "NOT" ? "not exists" : "exists", {});
      n.group = std::move(inner);
      return n;
    }
    if (auto agg = aggregateNames().find(u); agg != aggregateNames().end()) {
      if (aggregations_ == nullptr) {
        throw ParseError(t.offset, "aggregate outside of a SELECT context");
      }
      aggregations_->push_back(agg->second);
      expectPunct("(");
      bool distinct = optionalWord("DISTINCT");
      std::vector<FilterNode> args;
      if (agg->second == Aggregation::Count && isPunct("*")) {
        advance();
      } else {
        args.push_back(expression());
      }
      if (agg->second == Aggregation::GroupConcat && isPunct(";")) {
        advance();
        expectWord("SEPARATOR");
        expectPunct("=");
        if (peek().type != TT::String) fail("expected separator string");
        args.push_back(leaf(Term::literal(escapeLiteral(advance().text),
                                          Term::LiteralType::String)));
      }
      expectPunct(")");
      return op(lower(u) + (distinct ? " distinct" : ""), std::move(args));
    }
    std::string name = lower(t.text);
    Arity arity = builtinArities().at(name);
    std::vector<FilterNode> args;
    expectPunct("(");
    if (!isPunct(")")) {
      args.push_back(expression());
      while (isPunct(",")) {
        advance();
        args.push_back(expression());
      }
    }
    expectPunct(")");
    if (args.size() < arity.min ||
        (arity.max != kVariadic && args.size() > arity.max)) {
      throw ParseError(t.offset, "wrong number of arguments for " + name);
    }
    return op(std::move(name), std::move(args));
  }

  std::vector<Token> tokens_;
  size_t pos_ = 0;
  size_t lastOffset_ = 0;
  std::string base_;
  std::map<std::string, std::string> prefixes_;
  std::vector<Aggregation>* aggregations_ = nullptr;
  uint32_t anonCounter_ = 0;
};

}  // namespace

ParseError::ParseError(size_t offset, std::string message)
    : std::runtime_error("parse error at offset " + std::to_string(offset) +
                         ": " + message),
      offset_(offset),
      message_(std::move(message)) {}

namespace detail {
void finalizeAst(QueryAst& ast);
}

QueryAst parseQuery(std::string_view text) {
  Parser parser(text);
  QueryAst ast = parser.run();
  ast.rawText = std::string(text);
  detail::finalizeAst(ast);
  return ast;
}

}  // namespace sparqlog::sparql
