#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace sparqlog::sparql::detail {

struct Token {
  enum class Type {
    Eof,
    IriRef,     // text: IRI without angle brackets
    PrefixedName,  // text: "prefix:local" verbatim
    Variable,   // text: name without sigil
    BlankLabel,  // text: label without "_:"
    String,     // text: unescaped content
    LangTag,    // text: tag without '@'
    Integer,
    Decimal,
    Double,
    Word,       // keyword or builtin name
    Punct       // text: the symbol
  };
  Type type = Type::Eof;
  std::string text;
  size_t offset = 0;
};

// Splits query text into tokens. Throws ParseError on malformed input.
std::vector<Token> tokenize(std::string_view text);

}  // namespace sparqlog::sparql::detail
