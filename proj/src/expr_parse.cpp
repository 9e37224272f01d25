#include <cctype>
#include <charconv>
#include <cmath>

#include "varistep/error.hpp"
#include "varistep/expr.hpp"

namespace varistep::dsl {
namespace {

enum class TokenKind { Number, Identifier, Plus, Minus, Star, Slash, Caret, LParen, RParen, End };

struct Token {
  TokenKind kind = TokenKind::End;
  std::size_t offset = 0;
  std::string_view text;
  double value = 0.0;
  bool integral = false;
};

class Lexer {
 public:
  explicit Lexer(std::string_view src) : src_(src) {}

  Token next() {
    while (pos_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[pos_]))) ++pos_;
    Token tok;
    tok.offset = pos_;
    if (pos_ >= src_.size()) return tok;
    const char c = src_[pos_];
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return lex_number();
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      std::size_t end = pos_;
      while (end < src_.size() &&
             (std::isalnum(static_cast<unsigned char>(src_[end])) || src_[end] == '_')) {
        ++end;
      }
      tok.kind = TokenKind::Identifier;
      tok.text = src_.substr(pos_, end - pos_);
      pos_ = end;
      return tok;
    }
    ++pos_;
    tok.text = src_.substr(tok.offset, 1);
    switch (c) {
      case '+': tok.kind = TokenKind::Plus; return tok;
      case '-': tok.kind = TokenKind::Minus; return tok;
      case '*': tok.kind = TokenKind::Star; return tok;
      case '/': tok.kind = TokenKind::Slash; return tok;
      case '^': tok.kind = TokenKind::Caret; return tok;
      case '(': tok.kind = TokenKind::LParen; return tok;
      case ')': tok.kind = TokenKind::RParen; return tok;
      default:
        throw ParseError(tok.offset, {}, std::string("unexpected character '") + c + "'");
    }
  }

 private:
  Token lex_number() {
    Token tok;
    tok.kind = TokenKind::Number;
    tok.offset = pos_;
    std::size_t end = pos_;
    bool integral = true;
    while (end < src_.size() && std::isdigit(static_cast<unsigned char>(src_[end]))) ++end;
    if (end < src_.size() && src_[end] == '.') {
      integral = false;
      ++end;
      while (end < src_.size() && std::isdigit(static_cast<unsigned char>(src_[end]))) ++end;
    }
    if (end < src_.size() && (src_[end] == 'e' || src_[end] == 'E')) {
      std::size_t exp = end + 1;
      if (exp < src_.size() && (src_[exp] == '+' || src_[exp] == '-')) ++exp;
      if (exp < src_.size() && std::isdigit(static_cast<unsigned char>(src_[exp]))) {
        integral = false;
        end = exp;
        while (end < src_.size() && std::isdigit(static_cast<unsigned char>(src_[end]))) ++end;
      }
    }
    tok.text = src_.substr(pos_, end - pos_);
    const auto res = std::from_chars(tok.text.data(), tok.text.data() + tok.text.size(), tok.value);
    if (res.ec != std::errc() || res.ptr != tok.text.data() + tok.text.size()) {
      throw ParseError(tok.offset, {"number"}, "malformed number '" + std::string(tok.text) + "'");
    }
    tok.integral = integral;
    pos_ = end;
    return tok;
  }

  std::string_view src_;
  std::size_t pos_ = 0;
};

const std::vector<std::string>& operand_start() {
  static const std::vector<std::string> set{"number", "identifier", "'('", "'-'"};
  return set;
}

std::optional<Function> lookup_function(std::string_view name) {
  if (name == "sin") return Function::Sin;
  if (name == "cos") return Function::Cos;
  if (name == "exp") return Function::Exp;
  if (name == "log") return Function::Log;
  if (name == "sqrt") return Function::Sqrt;
  return std::nullopt;
}

class Parser {
 public:
  Parser(std::string_view src, const VariableSet& vars) : lexer_(src), vars_(vars) {
    advance();
  }

  Expr parse() {
    Expr e = expression();
    if (tok_.kind != TokenKind::End) {
      fail({"operator", "end of input"}, "unexpected '" + std::string(tok_.text) + "'");
    }
    return e;
  }

 private:
  void advance() { tok_ = lexer_.next(); }

  [[noreturn]] void fail(std::vector<std::string> expected, const std::string& detail) const {
    throw ParseError(tok_.offset, std::move(expected), detail);
  }

  std::string describe() const {
    return tok_.kind == TokenKind::End ? std::string("end of input")
                                       : "'" + std::string(tok_.text) + "'";
  }

  Expr expression() {
    Expr lhs = term();
    while (tok_.kind == TokenKind::Plus || tok_.kind == TokenKind::Minus) {
      const NodeKind op = tok_.kind == TokenKind::Plus ? NodeKind::Add : NodeKind::Subtract;
      advance();
      lhs = Expr::binary(op, lhs, term());
    }
    return lhs;
  }

  Expr term() {
    Expr lhs = unary();
    while (tok_.kind == TokenKind::Star || tok_.kind == TokenKind::Slash) {
      const NodeKind op = tok_.kind == TokenKind::Star ? NodeKind::Multiply : NodeKind::Divide;
      advance();
      lhs = Expr::binary(op, lhs, unary());
    }
    return lhs;
  }

  Expr unary() {
    if (tok_.kind == TokenKind::Minus) {
      advance();
      return Expr::negate(unary());
    }
    return power();
  }

  Expr power() {
    Expr base = primary();
    while (tok_.kind == TokenKind::Caret) {
      advance();
      base = Expr::power(base, exponent());
    }
    return base;
  }

  int exponent() {
    bool parenthesized = false;
    if (tok_.kind == TokenKind::LParen) {
      parenthesized = true;
      advance();
    }
    int sign = 1;
    if (tok_.kind == TokenKind::Minus) {
      sign = -1;
      advance();
    }
    if (tok_.kind != TokenKind::Number || !tok_.integral) {
      fail({"integer exponent"}, "expected integer exponent, found " + describe());
    }
    if (tok_.value > 1e6) fail({"integer exponent"}, "exponent too large");
    const int value = sign * static_cast<int>(tok_.value);
    advance();
    if (parenthesized) {
      if (tok_.kind != TokenKind::RParen) fail({"')'"}, "expected ')', found " + describe());
      advance();
    }
    return value;
  }

  Expr primary() {
    switch (tok_.kind) {
      case TokenKind::Number: {
        const double v = tok_.value;
        advance();
        return Expr::number(v);
      }
      case TokenKind::Identifier: {
        const Token id = tok_;
        advance();
        if (const auto f = lookup_function(id.text)) {
          if (tok_.kind != TokenKind::LParen) {
            fail({"'('"}, "expected '(' after " + std::string(id.text) + ", found " + describe());
          }
          advance();
          Expr arg = expression();
          if (tok_.kind != TokenKind::RParen) fail({"')'"}, "expected ')', found " + describe());
          advance();
          return Expr::call(*f, arg);
        }
        const auto slot = vars_.slot(id.text);
        if (!slot) {
          throw NameError("unknown identifier '" + std::string(id.text) + "' at offset " +
                          std::to_string(id.offset));
        }
        return Expr::variable(std::string(id.text), *slot);
      }
      case TokenKind::LParen: {
        advance();
        Expr inner = expression();
        if (tok_.kind != TokenKind::RParen) fail({"')'"}, "expected ')', found " + describe());
        advance();
        return inner;
      }
      default:
        fail(operand_start(), "expected operand, found " + describe());
    }
  }

  Lexer lexer_;
  const VariableSet& vars_;
  Token tok_;
};

}  // namespace

Expr parse_expression(std::string_view source, const VariableSet& vars) {
  bool blank = true;
  for (char c : source) blank = blank && std::isspace(static_cast<unsigned char>(c));
  if (blank) throw ParseError(0, operand_start(), "empty expression");
  return Parser(source, vars).parse();
}

}  // namespace varistep::dsl
