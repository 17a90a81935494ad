#include "Lexer.h"

#include <cctype>

#include "sparqlog/sparql/QueryAst.h"

namespace sparqlog::sparql::detail {

namespace {

bool isNameStart(unsigned char c) {
  return std::isalpha(c) || c == '_' || c >= 0x80;
}

bool isNameChar(unsigned char c) {
  return isNameStart(c) || std::isdigit(c) || c == '-' || c == '.';
}

bool isIriChar(unsigned char c) {
  if (c <= 0x20) return false;
  switch (c) {
    case '<':
    case '>':
    case '"':
    case '{':
    case '}':
    case '|':
    case '^':
    case '`':
    case '\\':
      return false;
    default:
      return true;
  }
}

void appendUtf8(std::string& out, uint32_t cp) {
  if (cp < 0x80) {
    out += static_cast<char>(cp);
  } else if (cp < 0x800) {
    out += static_cast<char>(0xC0 | (cp >> 6));
    out += static_cast<char>(0x80 | (cp & 0x3F));
  } else if (cp < 0x10000) {
    out += static_cast<char>(0xE0 | (cp >> 12));
    out += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
    out += static_cast<char>(0x80 | (cp & 0x3F));
  } else {
    out += static_cast<char>(0xF0 | (cp >> 18));
    out += static_cast<char>(0x80 | ((cp >> 12) & 0x3F));
    out += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
    out += static_cast<char>(0x80 | (cp & 0x3F));
  }
}

class Lexer {
 public:
  explicit Lexer(std::string_view text) : text_(text) {}

  std::vector<Token> run() {
    std::vector<Token> out;
    while (true) {
      skipSpace();
      if (pos_ >= text_.size()) {
        out.push_back({Token::Type::Eof, "", text_.size()});
        return out;
      }
      out.push_back(next());
    }
  }

 private:
  char peek(size_t ahead = 0) const {
    return pos_ + ahead < text_.size() ? text_[pos_ + ahead] : '\0';
  }

  void skipSpace() {
    while (pos_ < text_.size()) {
      char c = text_[pos_];
      if (c == '#') {
        while (pos_ < text_.size() && text_[pos_] != '\n') ++pos_;
      } else if (std::isspace(static_cast<unsigned char>(c))) {
        ++pos_;
      } else {
        return;
      }
    }
  }

  Token next() {
    size_t start = pos_;
    unsigned char c = static_cast<unsigned char>(peek());

    if (c == '<') {
      size_t end = pos_ + 1;
      while (end < text_.size() &&
             isIriChar(static_cast<unsigned char>(text_[end]))) {
        ++end;
      }
      if (end < text_.size() && text_[end] == '>') {
        pos_ = end + 1;
        return {Token::Type::IriRef,
                std::string(text_.substr(start + 1, end - start - 1)), start};
      }
      if (peek(1) == '=') {
        pos_ += 2;
        return {Token::Type::Punct, "<=", start};
      }
      ++pos_;
      return {Token::Type::Punct, "<", start};
    }
    if ((c == '?' || c == '$') &&
        (isNameStart(static_cast<unsigned char>(peek(1))) ||
         std::isdigit(static_cast<unsigned char>(peek(1))))) {
      ++pos_;
      size_t b = pos_;
      while (pos_ < text_.size()) {
        unsigned char d = static_cast<unsigned char>(text_[pos_]);
        if (isNameStart(d) || std::isdigit(d)) {
          ++pos_;
        } else {
          break;
        }
      }
      return {Token::Type::Variable, std::string(text_.substr(b, pos_ - b)),
              start};
    }
    if (c == '"' || c == '\'') return lexString();
    if (c == '@') {
      ++pos_;
      size_t b = pos_;
      while (pos_ < text_.size() &&
             (std::isalnum(static_cast<unsigned char>(text_[pos_])) ||
              text_[pos_] == '-')) {
        ++pos_;
      }
      if (pos_ == b) throw ParseError(start, "malformed language tag");
      return {Token::Type::LangTag, std::string(text_.substr(b, pos_ - b)),
              start};
    }
    if (std::isdigit(c) ||
        (c == '.' && std::isdigit(static_cast<unsigned char>(peek(1))))) {
      return lexNumber();
    }
    if (c == '_' && peek(1) == ':') {
      pos_ += 2;
      size_t b = pos_;
      while (pos_ < text_.size() &&
             isNameChar(static_cast<unsigned char>(text_[pos_]))) {
        ++pos_;
      }
      while (pos_ > b && text_[pos_ - 1] == '.') --pos_;
      if (pos_ == b) throw ParseError(start, "empty blank node label");
      return {Token::Type::BlankLabel, std::string(text_.substr(b, pos_ - b)),
              start};
    }
    if (isNameStart(c) || c == ':') return lexName();

    auto two = [&](std::string_view sym) {
      return text_.substr(pos_, 2) == sym;
    };
    for (std::string_view sym : {"^^", "&&", "||", "!=", ">="}) {
      if (two(sym)) {
        pos_ += 2;
        return {Token::Type::Punct, std::string(sym), start};
      }
    }
    switch (c) {
      case '{':
      case '}':
      case '(':
      case ')':
      case '[':
      case ']':
      case '.':
      case ',':
      case ';':
      case '*':
      case '/':
      case '|':
      case '^':
      case '+':
      case '-':
      case '?':
      case '!':
      case '=':
      case '>':
        ++pos_;
        return {Token::Type::Punct, std::string(1, static_cast<char>(c)),
                start};
      default:
        throw ParseError(start, "unexpected character");
    }
  }

  Token lexString() {
    size_t start = pos_;
    char quote = peek();
    bool isLong = peek(1) == quote && peek(2) == quote;
    pos_ += isLong ? 3 : 1;
    std::string content;
    while (true) {
      if (pos_ >= text_.size()) throw ParseError(start, "unterminated string");
      char c = text_[pos_];
      if (isLong) {
        if (c == quote && peek(1) == quote && peek(2) == quote) {
          pos_ += 3;
          break;
        }
      } else {
        if (c == quote) {
          ++pos_;
          break;
        }
        if (c == '\n' || c == '\r') {
          throw ParseError(start, "unterminated string");
        }
      }
      if (c == '\\') {
        char e = peek(1);
        pos_ += 2;
        switch (e) {
          case 't': content += '\t'; break;
          case 'n': content += '\n'; break;
          case 'r': content += '\r'; break;
          case 'b': content += '\b'; break;
          case 'f': content += '\f'; break;
          case '"': content += '"'; break;
          case '\'': content += '\''; break;
          case '\\': content += '\\'; break;
          case 'u':
          case 'U': {
            size_t n = e == 'u' ? 4 : 8;
            if (pos_ + n > text_.size()) {
              throw ParseError(pos_ - 2, "bad unicode escape");
            }
            uint32_t cp = 0;
            for (size_t i = 0; i < n; ++i) {
              char h = text_[pos_ + i];
              if (!std::isxdigit(static_cast<unsigned char>(h))) {
                throw ParseError(pos_ - 2, "bad unicode escape");
              }
              cp = cp * 16 + static_cast<uint32_t>(
                                 std::isdigit(static_cast<unsigned char>(h))
                                     ? h - '0'
                                     : std::tolower(h) - 'a' + 10);
            }
            pos_ += n;
            appendUtf8(content, cp);
            break;
          }
          default:
            throw ParseError(pos_ - 2, "bad escape sequence");
        }
        continue;
      }
      content += c;
      ++pos_;
    }
    return {Token::Type::String, std::move(content), start};
  }

  Token lexNumber() {
    size_t start = pos_;
    auto digits = [&] {
      while (std::isdigit(static_cast<unsigned char>(peek()))) ++pos_;
    };
    digits();
    Token::Type type = Token::Type::Integer;
    if (peek() == '.' && std::isdigit(static_cast<unsigned char>(peek(1)))) {
      ++pos_;
      digits();
      type = Token::Type::Decimal;
    }
    if ((peek() == 'e' || peek() == 'E') &&
        (std::isdigit(static_cast<unsigned char>(peek(1))) ||
         ((peek(1) == '+' || peek(1) == '-') &&
          std::isdigit(static_cast<unsigned char>(peek(2)))))) {
      pos_ += 2;
      digits();
      type = Token::Type::Double;
    }
    return {type, std::string(text_.substr(start, pos_ - start)), start};
  }

  Token lexName() {
    size_t start = pos_;
    while (pos_ < text_.size() &&
           isNameChar(static_cast<unsigned char>(text_[pos_]))) {
      ++pos_;
    }
    while (pos_ > start && text_[pos_ - 1] == '.') --pos_;
    if (peek() != ':') {
      return {Token::Type::Word, std::string(text_.substr(start, pos_ - start)),
              start};
    }
    ++pos_;
    while (pos_ < text_.size()) {
      unsigned char d = static_cast<unsigned char>(text_[pos_]);
      if (isNameChar(d) || d == ':' || d == '%') {
        ++pos_;
      } else if (d == '\\' && pos_ + 1 < text_.size()) {
        pos_ += 2;
      } else {
        break;
      }
    }
    while (text_[pos_ - 1] == '.') --pos_;
    return {Token::Type::PrefixedName,
            std::string(text_.substr(start, pos_ - start)), start};
  }

  std::string_view text_;
  size_t pos_ = 0;
};

}  // namespace

std::vector<Token> tokenize(std::string_view text) { return Lexer(text).run(); }

}  // namespace sparqlog::sparql::detail
